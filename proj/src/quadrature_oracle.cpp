// Brute-force reference for the element coefficients: the triangle is fanned from the point
// nearest to the observer and each fan triangle is integrated in (edge parameter, radial
// fraction) with nested Gauss-Kronrod, split wherever the integrand loses smoothness.
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tdbem/elemint.hpp"

namespace tdbem {

namespace {

using boost::math::quadrature::gauss_kronrod;

double posPow(double v, int k) { return v > 0.0 ? std::pow(v, k) : (k == 0 ? (v > 0.0 ? 1.0 : 0.0) : 0.0); }

struct Pointwise {
    int d;
    double s, z, sigma;
    Vec3 p, n, nx;
    CoeffKind kind;

    // Regular part of the integrand at surface point y.
    double operator()(const Vec3& y) const {
        const Vec3 diff = p - y;
        const double r = diff.norm();
        const double gap = s - r;
        if (gap <= 0.0) return 0.0;
        const double g = (d * s * posPow(gap, d - 1) - (d - 1) * posPow(gap, d)) / (r * r * r);
        switch (kind) {
            case CoeffKind::U:
                return posPow(gap, d) / r;
            case CoeffKind::W:
                return z * g;
            case CoeffKind::BmU:
                return -g * nx.dot(diff) + sigma * d * posPow(gap, d - 1) / r;
            case CoeffKind::BmW: {
                const double dg = -d * (d - 1) * posPow(gap, d - 2) / (r * r) - 3.0 * g / r;
                const double dsg = d * posPow(gap, d - 2) * ((2 - d) * gap + (d - 1) * s) / (r * r * r);
                return nx.dot(n) * g + z * dg * nx.dot(diff) / r + sigma * z * dsg;
            }
        }
        return 0.0;
    }
};

// Cut lists are unsorted until sortedCuts and always span [0, 1].
void addCut(std::vector<double>& cuts, double v) {
    if (v > 0.0 && v < 1.0) cuts.push_back(v);
}

std::vector<double> sortedCuts(std::vector<double> cuts) {
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

template <class F>
double piecewise(F f, const std::vector<double>& cuts, double tol) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        acc += gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 10, tol);
    }
    return acc;
}

Vec3 nearestOnTriangle(const Vec3& p, const Triangle& t) {
    // minimise over barycentric coordinates by checking the face and the three edges
    const Vec3 n = t.normal();
    const Vec3 foot = p - (p - t.a).dot(n) * n;
    const std::array<Vec3, 3> v{t.a, t.b, t.c};
    bool inside = true;
    for (int k = 0; k < 3; ++k) {
        const Vec3& a = v[static_cast<std::size_t>(k)];
        const Vec3& b = v[static_cast<std::size_t>((k + 1) % 3)];
        if ((b - a).cross(foot - a).dot(n) < 0.0) inside = false;
    }
    if (inside) return foot;
    Vec3 best = t.a;
    double bestDist = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        const Vec3& a = v[static_cast<std::size_t>(k)];
        const Vec3& b = v[static_cast<std::size_t>((k + 1) % 3)];
        const double u = std::clamp((p - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
        const Vec3 c = a + u * (b - a);
        if ((c - p).norm() < bestDist) {
            bestDist = (c - p).norm();
            best = c;
        }
    }
    return best;
}

}  // namespace

double quadratureOracle(const Vec3& xi, const Triangle& e, int gamma, const BSplineBasis& basis, double c, CoeffKind which,
                        const Vec3& nx, double relTol) {
    const int d = basis.d;
    const double s = c * gamma * basis.dt;
    const Vec3 n = e.normal();
    const double z = (xi - e.a).dot(n);
    // fan centre: the perpendicular foot when it lies on the element, else the nearest boundary point
    const Vec3 centre = nearestOnTriangle(xi, e);
    const Vec3 g = centre - xi;
    if (g.norm() >= s) return 0.0;
    // (s - r) carries a relative rounding error of order eps * s / (s - r) near the front
    relTol = std::max(relTol, 1e3 * std::numeric_limits<double>::epsilon() * s / (s - g.norm()));
    const Pointwise f{d, s, z, kBurtonMillerTimeSign, xi, n, nx, which};

    const std::array<Vec3, 3> v{e.a, e.b, e.c};
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Vec3& v1 = v[static_cast<std::size_t>(k)];
        const Vec3 edge = v[static_cast<std::size_t>((k + 1) % 3)] - v1;
        const Vec3 base = v1 - centre;
        const double area2 = base.cross(edge).dot(n);
        if (std::abs(area2) < 1e-14 * edge.squaredNorm()) continue;

        std::vector<double> tCuts{0.0, 1.0};
        {
            const Vec3 w = v1 - xi;
            const double qa = edge.squaredNorm(), qb = w.dot(edge), qc = w.squaredNorm() - s * s;
            const double disc = qb * qb - qa * qc;
            if (disc > 0.0) {
                addCut(tCuts, (-qb - std::sqrt(disc)) / qa);
                addCut(tCuts, (-qb + std::sqrt(disc)) / qa);
            }
            addCut(tCuts, -base.dot(edge) / qa);  // ray perpendicular to the edge
        }
        tCuts = sortedCuts(tCuts);

        auto frontFraction = [&](const Vec3& dir) {
            const double dd = dir.squaredNorm(), gd = g.dot(dir);
            const double cc = (g.norm() - s) * (g.norm() + s);
            const double root = std::sqrt(gd * gd - dd * cc);
            return gd > 0.0 ? -cc / (gd + root) : (root - gd) / dd;
        };
        auto radial = [&](double t) {
            const Vec3 dir = base + t * edge;
            std::vector<double> lCuts{0.0, 1.0};
            addCut(lCuts, frontFraction(dir));
            const double dirLen = dir.norm();
            for (double lz = std::abs(z) / dirLen; lz > 0.0 && lz < 1.0; lz *= 10.0) addCut(lCuts, lz);
            lCuts = sortedCuts(lCuts);
            auto inner = [&](double lam) { return f(centre + lam * dir) * lam; };
            return piecewise(inner, lCuts, relTol);
        };
        total += area2 * piecewise(radial, tCuts, relTol);

        // d = 1: kernels with a jump at the wavefront contribute a line integral over the front
        if (d == 1 && which == CoeffKind::BmW) {
            auto arc = [&](double t) {
                const Vec3 dir = base + t * edge;
                const double lam = frontFraction(dir);
                if (lam >= 1.0) return 0.0;
                const Vec3 yf = centre + lam * dir;
                const double drdl = (yf - xi).dot(dir) / s;
                return lam / drdl * (z / (s * s)) * (kBurtonMillerTimeSign - nx.dot(xi - yf) / s);
            };
            total += area2 * piecewise(arc, tCuts, relTol);
        }
    }
    return total / (4.0 * std::numbers::pi * std::pow(c * basis.dt, d));
}

}  // namespace tdbem
