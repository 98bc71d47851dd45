#include "tdbem/reference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fftw3.h>

#include "tdbem/parallel.hpp"

namespace tdbem {

namespace {

constexpr double kSeriesTol = 1e-12;
constexpr Complex kI{0.0, 1.0};

// Legendre P_0..P_n at x.
std::vector<double> legendre(int n, double x) {
    std::vector<double> p(static_cast<std::size_t>(n) + 1, 1.0);
    if (n >= 1) p[1] = x;
    for (int l = 1; l < n; ++l)
        p[static_cast<std::size_t>(l) + 1] = ((2 * l + 1) * x * p[static_cast<std::size_t>(l)] - l * p[static_cast<std::size_t>(l) - 1]) / (l + 1);
    return p;
}

Complex iPow(int n) {
    switch (((n % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

// f_n' from f_{n-1}, f_n, f_{n+1}, valid for j_n and h_n.
Complex derivative(const std::vector<Complex>& f, int n, Complex z) {
    if (n == 0) return -f[1];
    return f[static_cast<std::size_t>(n) - 1] - static_cast<double>(n + 1) / z * f[static_cast<std::size_t>(n)];
}

// Sums (2n+1) i^n c_n P_n until two consecutive terms past |z| fall below the tolerance. The
// tolerance is relative to the partial sum or the largest term, whichever is bigger: in the deep
// shadow the sum is exponentially smaller than its terms.
template <class Coeff>
Complex partialWaveSum(Coeff&& coeff, double cosTheta, Complex z, int maxOrder) {
    const std::vector<double> p = legendre(maxOrder, cosTheta);
    Complex sum{};
    double largest = 0.0;
    int small = 0;
    for (int n = 0; n <= maxOrder; ++n) {
        const Complex term = static_cast<double>(2 * n + 1) * iPow(n) * coeff(n) * p[static_cast<std::size_t>(n)];
        sum += term;
        if (!std::isfinite(std::abs(sum))) break;
        largest = std::max(largest, std::abs(term));
        small = std::abs(term) < kSeriesTol * std::max(std::abs(sum), largest) ? small + 1 : 0;
        if (small >= 2 && n > std::abs(z)) return sum;
    }
    throw std::runtime_error("partial-wave series did not converge by order " + std::to_string(maxOrder) + " at ka = " +
                             std::to_string(std::abs(z)));
}

}  // namespace

namespace {

// (e^{i z T} - 1) / (i z), entire in z
Complex phaseIntegral(Complex z, double T) {
    const Complex x = kI * z * T;
    if (std::abs(x) < 1e-3) return T * (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0);
    return (std::exp(x) - 1.0) / (kI * z);
}

}  // namespace

Complex pulseSpectrum(Complex omega, const PlanePulse& pulse) {
    const double tp = pulse.length / pulse.c;
    const double big = 2.0 * std::numbers::pi / tp;
    // int_0^tp 0.5 (1 - cos(big t)) e^{i w t} dt, split into three exponentials
    return pulse.amplitude * (0.5 * phaseIntegral(omega, tp) - 0.25 * phaseIntegral(omega + big, tp) - 0.25 * phaseIntegral(omega - big, tp));
}

std::vector<Complex> sphericalHankel(int n, Complex z) {
    std::vector<Complex> h(static_cast<std::size_t>(std::max(n, 1)) + 1);
    const Complex e = std::exp(kI * z);
    h[0] = -kI * e / z;
    h[1] = -e * (z + kI) / (z * z);
    for (int l = 1; l < n; ++l)
        h[static_cast<std::size_t>(l) + 1] = static_cast<double>(2 * l + 1) / z * h[static_cast<std::size_t>(l)] - h[static_cast<std::size_t>(l) - 1];
    h.resize(static_cast<std::size_t>(n) + 1);
    return h;
}

std::vector<Complex> sphericalBesselJ(int n, Complex z) {
    if (std::abs(z) < 1e-300) {
        std::vector<Complex> j(static_cast<std::size_t>(n) + 1);
        j[0] = 1.0;
        return j;
    }
    const int start = n + 20 + static_cast<int>(std::abs(z) + std::sqrt(40.0 * (std::abs(z) + 1.0)));
    std::vector<Complex> j(static_cast<std::size_t>(start) + 2);
    j[static_cast<std::size_t>(start)] = 1e-300;
    for (int l = start; l > 0; --l) {
        const auto i = static_cast<std::size_t>(l);
        j[i - 1] = static_cast<double>(2 * l + 1) / z * j[i] - j[i + 1];
        if (std::abs(j[i - 1]) > 1e250)
            for (std::size_t m = i - 1; m < j.size(); ++m) j[m] *= 1e-250;
    }
    // normalise against whichever closed form is better conditioned
    const Complex j0 = std::sin(z) / z;
    const Complex j1 = std::sin(z) / (z * z) - std::cos(z) / z;
    const Complex scale = std::abs(j0) >= std::abs(j1) ? j0 / j[0] : j1 / j[1];
    j.resize(static_cast<std::size_t>(n) + 1);
    for (auto& v : j) v *= scale;
    return j;
}

Complex scatteredField(Boundary bc, Complex k, double a, double r, double cosTheta, int maxOrder) {
    if (r < a) throw std::invalid_argument("scattered field is defined outside the sphere only");
    const Complex za = k * a, zr = k * r;
    const auto ja = sphericalBesselJ(maxOrder + 1, za);
    const auto ha = sphericalHankel(maxOrder + 1, za);
    const auto hr = sphericalHankel(maxOrder + 1, zr);
    auto coeff = [&](int n) {
        const auto i = static_cast<std::size_t>(n);
        if (bc == Boundary::Dirichlet) return -ja[i] / ha[i] * hr[i];
        return -derivative(ja, n, za) / derivative(ha, n, za) * hr[i];
    };
    return partialWaveSum(coeff, cosTheta, zr, maxOrder);
}

Complex totalField(Boundary bc, Complex k, double a, double r, double cosTheta, int maxOrder) {
    return std::exp(kI * k * r * cosTheta) + scatteredField(bc, k, a, r, cosTheta, maxOrder);
}

Complex surfaceUnknown(Boundary bc, Complex k, double a, double cosTheta, int maxOrder) {
    const Complex za = k * a;
    const auto h = sphericalHankel(maxOrder + 1, za);
    // Wronskian j_n h_n' - j_n' h_n = i / z^2 removes the regular functions
    auto coeff = [&](int n) {
        const auto i = static_cast<std::size_t>(n);
        if (bc == Boundary::Dirichlet) return -kI / (za * za) * k / h[i];
        return kI / (za * za) / derivative(h, n, za);
    };
    return partialWaveSum(coeff, cosTheta, za, maxOrder);
}

int seriesOrderFor(double ka) { return std::max(kDefaultMaxOrder, static_cast<int>(ka + 10.0 * std::cbrt(ka) + 20.0)); }

Eigen::MatrixXd referenceSolution(const SphereScenario& s, const std::vector<Vec3>& points, double dt, int nt,
                                  const TransformOptions& options) {
    if (dt <= 0.0 || nt < 1) throw std::invalid_argument("reference needs dt > 0 and nt >= 1");
    if (s.radius <= 0.0 || s.pulse.length <= 0.0 || s.duration <= 0.0) throw std::invalid_argument("invalid sphere scenario");
    if (options.frequencyFactor < 1 || options.oversample < 1) throw std::invalid_argument("invalid transform options");
    const int m = options.oversample;
    const double step = dt / m;
    const int nf = static_cast<int>(std::bit_ceil(static_cast<unsigned>(options.frequencyFactor * nt * m)));
    const int nh = nf / 2 + 1;
    const double window = nf * step;
    const double dOmega = 2.0 * std::numbers::pi / window;
    const double sigma = options.dampingDecades * std::log(10.0) / window;
    const auto np = static_cast<int>(points.size());
    const int order = options.maxOrder > 0 ? options.maxOrder : seriesOrderFor((nh - 1) * dOmega / s.pulse.c * s.radius);

    std::vector<double> cosTheta(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        const Vec3 rel = points[p] - s.centre;
        cosTheta[p] = rel.x() / rel.norm();
    }

    Eigen::MatrixXcd spectrum(nh, np);
    parallelFor(nh, options.threads, [&](int k) {
        const Complex omega(k * dOmega, sigma);
        const Complex wave = omega / s.pulse.c;
        const Complex factor = pulseSpectrum(omega, s.pulse) * std::exp(kI * wave * s.centre.x());
        for (int p = 0; p < np; ++p)
            spectrum(k, p) = factor * surfaceUnknown(s.bc, wave, s.radius, cosTheta[static_cast<std::size_t>(p)], order);
    });

    Eigen::MatrixXd out(nt, np);
    fftw_complex* in = fftw_alloc_complex(static_cast<std::size_t>(nh));
    double* res = fftw_alloc_real(static_cast<std::size_t>(nf));
    fftw_plan plan = fftw_plan_dft_c2r_1d(nf, in, res, FFTW_ESTIMATE);
    for (int p = 0; p < np; ++p) {
        // f(t) = e^{sigma t} / 2pi * int F(w + i sigma) e^{-i w t} dw; conjugation turns FFTW's e^{+i} into e^{-i}
        for (int k = 0; k < nh; ++k) {
            in[k][0] = spectrum(k, p).real();
            in[k][1] = -spectrum(k, p).imag();
        }
        fftw_execute(plan);
        for (int a = 0; a < nt; ++a) {
            const double t = a * dt;
            out(a, p) = std::exp(sigma * t) * dOmega / (2.0 * std::numbers::pi) * res[static_cast<std::size_t>(a) * static_cast<std::size_t>(m)];
        }
    }
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(res);
    return out;
}

double relL2Error(const Eigen::MatrixXd& numerical, const Eigen::MatrixXd& reference) {
    if (numerical.rows() != reference.rows() || numerical.cols() != reference.cols())
        throw std::invalid_argument("error needs matching point and time grids");
    const double den = reference.norm();
    if (den == 0.0) throw std::invalid_argument("reference has zero norm");
    return (numerical - reference).norm() / den;
}

std::vector<int> arcEvaluationPoints(const TriMesh& mesh, const SphereScenario& s, int count) {
    if (count < 2) throw std::invalid_argument("arc needs at least two samples");
    std::vector<int> ids;
    for (int i = 0; i < count; ++i) {
        const double phi = std::numbers::pi * i / (count - 1);
        const Vec3 target = s.centre + s.radius * Vec3(-std::cos(phi), 0.0, std::sin(phi));
        int best = 0;
        double bestDist = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < mesh.size(); ++e) {
            const double dist = (mesh.centroid(e) - target).squaredNorm();
            if (dist < bestDist) {
                bestDist = dist;
                best = static_cast<int>(e);
            }
        }
        ids.push_back(best);
    }
    return ids;
}

}  // namespace tdbem
