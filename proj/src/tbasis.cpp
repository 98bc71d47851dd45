#include "tdbem/tbasis.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tdbem {

BSplineBasis::BSplineBasis(int order, double step) : d(order), dt(step) {
    if (order < 1) throw std::invalid_argument("B-spline order must be >= 1");
    if (!(step > 0.0)) throw std::invalid_argument("time step must be positive");
}

std::vector<std::pair<long long, long long>> weightsExact(int d) {
    if (d < 1) throw std::invalid_argument("B-spline order must be >= 1");
    if (d > 15) throw std::invalid_argument("B-spline order too large for exact weights");
    std::vector<std::pair<long long, long long>> w;
    w.reserve(static_cast<std::size_t>(d + 2));
    for (int kappa = 0; kappa <= d + 1; ++kappa) {
        long long den = 1;
        for (int k = 0; k <= d + 1; ++k)
            if (k != kappa) den *= (k - kappa);
        long long num = d + 1;
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const long long g = std::gcd(num < 0 ? -num : num, den);
        w.emplace_back(num / g, den / g);
    }
    return w;
}

std::vector<double> weights(int d) {
    std::vector<double> w;
    for (auto [num, den] : weightsExact(d)) w.push_back(static_cast<double>(num) / static_cast<double>(den));
    return w;
}

double truncPow(double x, int d) {
    if (x <= 0.0) return 0.0;
    double r = 1.0;
    for (int i = 0; i < d; ++i) r *= x;
    return r;
}

double evalBasis(const BSplineBasis& basis, int beta, double t) {
    const auto w = weights(basis.d);
    double sum = 0.0;
    for (int kappa = 0; kappa <= basis.d + 1; ++kappa)
        sum += w[static_cast<std::size_t>(kappa)] * truncPow((t - basis.knot(kappa + beta)) / basis.dt, basis.d);
    // Outside the support the decomposition cancels only up to rounding.
    if (t <= basis.knot(beta) || t >= basis.knot(beta + basis.d + 1)) return 0.0;
    return sum;
}

namespace {

// Degree-p B-spline on knots beta..beta+p+1, in units of dt.
double coxDeBoor(int beta, int p, double x) {
    if (p == 0) return (x >= beta && x < beta + 1) ? 1.0 : 0.0;
    const double left = (x - beta) / p * coxDeBoor(beta, p - 1, x);
    const double right = (beta + p + 1 - x) / p * coxDeBoor(beta + 1, p - 1, x);
    return left + right;
}

}  // namespace

double evalBasisOracle(const BSplineBasis& basis, int beta, double t) {
    return coxDeBoor(beta, basis.d, t / basis.dt);
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace tdbem
