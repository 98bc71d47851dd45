#pragma once

#include <vector>

namespace tdbem {

// Order-d B-spline on uniform knots t_i = i*dt.
struct BSplineBasis {
    int d = 1;
    double dt = 1.0;

    BSplineBasis() = default;
    BSplineBasis(int order, double step);

    double knot(int i) const { return i * dt; }
};

// w^{kappa,d} for kappa = 0..d+1, computed exactly then rounded once.
std::vector<double> weights(int d);

// Same weights as reduced fractions (numerator, denominator).
std::vector<std::pair<long long, long long>> weightsExact(int d);

double truncPow(double x, int d);

// Basis value through the truncated-power decomposition.
double evalBasis(const BSplineBasis& basis, int beta, double t);

// Cox-de Boor recursion; independent of the decomposition.
double evalBasisOracle(const BSplineBasis& basis, int beta, double t);

double binomial(int n, int k);

}  // namespace tdbem
