#include "tdbem/elemint.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "tdbem/hyperdual.hpp"
#include "tdbem/mesh.hpp"

namespace tdbem {

double Triangle::longestEdge() const { return std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()}); }

Triangle triangleOf(const TriMesh& mesh, std::size_t j) {
    const int t = static_cast<int>(j);
    return {mesh.vertex(t, 0), mesh.vertex(t, 1), mesh.vertex(t, 2)};
}

namespace {

std::atomic<long> gFallbacks{0};

using std::abs;
using std::asinh;
using std::atan;
using std::sqrt;

template <class S>
S ipow(const S& a, int n) {
    S r(1.0);
    for (int i = 0; i < n; ++i) r = r * a;
    return r;
}

// y * Int (s - r)^m / (x^2 + y^2) dx as an antiderivative in x, divided by m.
// Expands (s - r)^m binomially; odd powers of r reduce to log/arctan terms.
template <class S>
S edgePrimitive(int m, const S& x, const S& y, const S& z, const S& s) {
    const S y2 = y * y;
    const S z2 = z * z;
    const S a2 = y2 + z2;
    const S r = sqrt(x * x + a2);
    const S atanXY = atan(x / y);
    const S logTerm = asinh(x / sqrt(a2));
    const S zTerm = z * atan(x * z / (y * r));

    const int jMax = m / 2;
    // P_l = Int (x^2 + y^2)^l dx, R_n = Int r^{2n+1} dx
    std::array<S, 3> P{};
    std::array<S, 3> R{};
    for (int l = 0; l < jMax; ++l) {
        S acc(0.0);
        for (int t = 0; t <= l; ++t) acc += binomial(l, t) * ipow(y2, l - t) * ipow(x, 2 * t + 1) / (2.0 * t + 1.0);
        P[static_cast<std::size_t>(l)] = acc;
    }
    S prev = logTerm;
    for (int n = 0; n < jMax; ++n) {
        const S cur = x * ipow(r, 2 * n + 1) / (2.0 * n + 2.0) + a2 * ((2.0 * n + 1.0) / (2.0 * n + 2.0)) * prev;
        R[static_cast<std::size_t>(n)] = cur;
        prev = cur;
    }

    S total(0.0);
    for (int k = 0; k <= m; ++k) {
        S term(0.0);
        if (k % 2 == 0) {
            const int j = k / 2;
            term = ipow(z2, j) * atanXY;
            for (int i = 1; i <= j; ++i) term += y * binomial(j, i) * ipow(z2, j - i) * P[static_cast<std::size_t>(i - 1)];
        } else {
            const int j = (k - 1) / 2;
            term = ipow(z2, j) * (y * logTerm + zTerm);
            for (int i = 1; i <= j; ++i) {
                S q(0.0);
                for (int t = 0; t <= i - 1; ++t) q += binomial(i - 1, t) * ipow(-z2, i - 1 - t) * R[static_cast<std::size_t>(t)];
                term += y * binomial(j, i) * ipow(z2, j - i) * q;
            }
        }
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        total += sign * binomial(m, k) * ipow(s, m - k) * term;
    }
    return total / static_cast<double>(m);
}

struct GaussRule {
    std::vector<double> x, w;  // on [0, 1]
};

template <int N>
GaussRule makeRule() {
    using G = boost::math::quadrature::gauss<double, N>;
    GaussRule rule;
    const auto& ab = G::abscissa();
    const auto& wt = G::weights();
    for (std::size_t i = 0; i < ab.size(); ++i) {
        const double xi = ab[i];
        if (xi == 0.0) {
            rule.x.push_back(0.5);
            rule.w.push_back(0.5 * wt[i]);
            continue;
        }
        rule.x.push_back(0.5 * (1.0 - xi));
        rule.w.push_back(0.5 * wt[i]);
        rule.x.push_back(0.5 * (1.0 + xi));
        rule.w.push_back(0.5 * wt[i]);
    }
    return rule;
}

const GaussRule& rule8() {
    static const GaussRule r = makeRule<8>();
    return r;
}
const GaussRule& rule16() {
    static const GaussRule r = makeRule<16>();
    return r;
}

double magnitude(double v) { return std::abs(v); }
double magnitude(const HyperDual& v) { return std::max({std::abs(v.v), std::abs(v.d1), std::abs(v.d2), std::abs(v.d12)}); }

template <class S, class F>
S applyRule(const GaussRule& rule, F& f, double lo, double hi) {
    S acc(0.0);
    const double len = hi - lo;
    for (std::size_t i = 0; i < rule.x.size(); ++i) acc += (rule.w[i] * len) * f(lo + len * rule.x[i]);
    return acc;
}

template <class S, class F>
S adaptive(F& f, double lo, double hi, double absTol, int depth) {
    const S coarse = applyRule<S>(rule8(), f, lo, hi);
    const S fine = applyRule<S>(rule16(), f, lo, hi);
    if (magnitude(fine - coarse) <= absTol || depth >= 12) return fine;
    const double mid = 0.5 * (lo + hi);
    return adaptive<S>(f, lo, mid, absTol, depth + 1) + adaptive<S>(f, mid, hi, absTol, depth + 1);
}

template <class S>
S project(const Vec3& v, const Vec3& p0, const Vec3& dir1, const Vec3& dir2, const Vec3& e) {
    if constexpr (std::is_same_v<S, double>) {
        (void)dir1;
        (void)dir2;
        return (v - p0).dot(e);
    } else {
        return S((v - p0).dot(e), -dir1.dot(e), -dir2.dot(e), 0.0);
    }
}

// Int_E (s - r)_+^d / r dS with P = p0 + e1 dir1 + e2 dir2 and s = s0 + e2 sigma.
template <class S>
S integrate(const Triangle& tri, const Vec3& n, double scale, const Vec3& p0, const Vec3& dir1, const Vec3& dir2, double sigma,
            double s0, int d) {
    const int m = d + 1;
    const std::array<Vec3, 3> v{tri.a, tri.b, tri.c};
    S s(s0);
    S z;
    if constexpr (std::is_same_v<S, double>) {
        z = (p0 - tri.a).dot(n);
    } else {
        s = S(s0, 0.0, sigma, 0.0);
        z = S((p0 - tri.a).dot(n), dir1.dot(n), dir2.dot(n), 0.0);
    }
    S absZ = abs(z);
    if (std::abs(value(z)) < 1e-12 * scale) {
        // on the element plane: limit from the side opposite to the normal
        if constexpr (std::is_same_v<S, double>) {
            z = 0.0;
            absZ = 0.0;
        } else {
            z.v = 0.0;
            absZ = -z;
        }
    }

    S angle(0.0);
    S edges(0.0);
    for (int e = 0; e < 3; ++e) {
        const Vec3& v1 = v[static_cast<std::size_t>(e)];
        const Vec3& v2 = v[static_cast<std::size_t>((e + 1) % 3)];
        const Vec3 ex = (v2 - v1).normalized();
        const Vec3 ey = n.cross(ex);
        const S y = project<S>(v1, p0, dir1, dir2, ey);
        if (std::abs(value(y)) < 1e-12 * scale) continue;  // point on the edge line: zero angle, zero strip
        const S x1 = project<S>(v1, p0, dir1, dir2, ex);
        const S x2 = project<S>(v2, p0, dir1, dir2, ex);
        angle -= atan(x2 / y) - atan(x1 / y);

        const S a2 = y * y + z * z;
        const double gap2 = s0 * s0 - value(a2);
        if (gap2 <= 0.0) continue;
        const double xc = std::sqrt(gap2);
        const S xa = value(x1) < -xc ? S(-xc) : x1;
        const S xb = value(x2) > xc ? S(xc) : x2;
        if (value(xa) >= value(xb)) continue;

        edges += edgePrimitive<S>(m, xb, y, z, s) - edgePrimitive<S>(m, xa, y, z, s);
    }
    const S cap = s - absZ;
    const S inner = value(cap) > 0.0 ? ipow(cap, m) / static_cast<double>(m) * angle : S(0.0);
    return inner + edges;
}

Vec3 closestPoint(const Vec3& p, const Triangle& t) {
    const Vec3 ab = t.b - t.a, ac = t.c - t.a, ap = p - t.a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return t.a;
    const Vec3 bp = p - t.b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return t.b;
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return t.a + d1 / (d1 - d3) * ab;
    const Vec3 cp = p - t.c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return t.c;
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return t.a + d2 / (d2 - d6) * ac;
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return t.b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (t.c - t.b);
    const double denom = 1.0 / (va + vb + vc);
    return t.a + ab * (vb * denom) + ac * (vc * denom);
}


template <class S>
using Vec3S = std::array<S, 3>;

template <class S>
Vec3S<S> lift(const Vec3& p0, const Vec3& dir1, const Vec3& dir2) {
    Vec3S<S> out;
    for (int k = 0; k < 3; ++k) {
        if constexpr (std::is_same_v<S, double>) {
            out[static_cast<std::size_t>(k)] = p0[k];
        } else {
            out[static_cast<std::size_t>(k)] = S(p0[k], dir1[k], dir2[k], 0.0);
        }
    }
    return out;
}

template <class S>
S dotS(const Vec3S<S>& a, const Vec3S<S>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class S>
Vec3S<S> affine(const Vec3& base, const Vec3& dir, const S& t, const Vec3S<S>& minus) {
    Vec3S<S> out;
    for (std::size_t k = 0; k < 3; ++k) out[k] = base[static_cast<Eigen::Index>(k)] + t * dir[static_cast<Eigen::Index>(k)] - minus[k];
    return out;
}

// Same integral over the triangle, fanned from the triangle point nearest to P. Used when the
// wavefront has only just reached the element from outside its plane projection: the fan
// triangles then do not overlap, so nothing cancels.
template <class S>
S integrateFromNearest(const Triangle& tri, const Vec3& q, double scale, const Vec3S<S>& p, const S& s, int d, double relTol) {
    const std::array<Vec3, 3> v{tri.a, tri.b, tri.c};
    const Vec3S<S> zero{S(0.0), S(0.0), S(0.0)};
    Vec3S<S> g;  // q - P
    for (std::size_t k = 0; k < 3; ++k) g[k] = q[static_cast<Eigen::Index>(k)] - p[k];
    const S gg = dotS(g, g);
    S total(0.0);
    for (int e = 0; e < 3; ++e) {
        const Vec3& v1 = v[static_cast<std::size_t>(e)];
        const Vec3 edge = v[static_cast<std::size_t>((e + 1) % 3)] - v1;
        const double area2 = (v1 - q).cross(edge).norm();
        if (area2 < 1e-14 * scale * scale) continue;

        // where the front crosses the edge
        const Vec3S<S> w = affine<S>(v1, Vec3::Zero(), S(0.0), p);
        const Vec3S<S> ev = affine<S>(edge, Vec3::Zero(), S(0.0), zero);
        const double qa = edge.squaredNorm();
        const S qb = dotS(w, ev);
        const S qc = dotS(w, w) - s * s;
        std::vector<S> cuts{S(0.0), S(1.0)};
        const S disc = qb * qb - qa * qc;
        if (value(disc) > 0.0) {
            for (const double sign : {-1.0, 1.0}) {
                const S root = (-qb + sign * sqrt(disc)) / qa;
                if (value(root) > 0.0 && value(root) < 1.0) cuts.push_back(root);
            }
        }
        std::sort(cuts.begin(), cuts.end(), [](const S& a, const S& b) { return value(a) < value(b); });

        const Vec3 base = v1 - q;
        auto radial = [&](const S& t) -> S {
            const Vec3S<S> dir = affine<S>(base, edge, t, zero);
            const S dd = dotS(dir, dir);
            const S gd = dotS(g, dir);
            const S root = sqrt(gd * gd - dd * (gg - s * s));
            const S lamFront = value(gd) > 0.0 ? (s * s - gg) / (gd + root) : (root - gd) / dd;
            const S upper = value(lamFront) >= 1.0 ? S(1.0) : lamFront;
            S acc(0.0);
            const GaussRule& rule = rule16();
            for (std::size_t i = 0; i < rule.x.size(); ++i) {
                const S lam = upper * rule.x[i];
                Vec3S<S> rel;
                for (std::size_t k = 0; k < 3; ++k) rel[k] = g[k] + lam * dir[k];
                const S r = sqrt(dotS(rel, rel));
                const S gap = s - r;
                if (value(gap) <= 0.0) continue;
                acc += rule.w[i] * (ipow(gap, d) / r * lam);
            }
            return acc * upper * area2;
        };
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const S ta = cuts[i];
            const S len = cuts[i + 1] - cuts[i];
            if (value(len) <= 0.0) continue;
            auto f = [&](double u) -> S { return radial(ta + len * u) * len; };
            const S whole = applyRule<S>(rule16(), f, 0.0, 1.0);
            total += adaptive<S>(f, 0.0, 1.0, relTol * std::max(magnitude(whole), 1e-300), 0);
        }
    }
    return total;
}

// Dispatch between the closed form and the nearest-point fan.
template <class S>
S elementIntegral(const Triangle& tri, const Vec3& p0, const Vec3& dir1, const Vec3& dir2, double sigma, double s0, int d) {
    const Vec3 n = tri.normal();
    const double scale = tri.longestEdge();
    const Vec3 q = closestPoint(p0, tri);
    const double rMin = (q - p0).norm();
    if (s0 <= rMin) return S(0.0);
    const Vec3 foot = p0 - (p0 - tri.a).dot(n) * n;
    const bool footOutside = (q - foot).norm() > 1e-9 * scale;
    // closed-form cancellation grows like ((s - rMin) / s)^-(d+2) once the foot is outside
    if (footOutside && (s0 - rMin) / s0 < std::pow(10.0, -8.0 / (d + 2))) {
        gFallbacks.fetch_add(1, std::memory_order_relaxed);
        S s(s0);
        if constexpr (!std::is_same_v<S, double>) s = S(s0, 0.0, sigma, 0.0);
        const double relTol = std::max(1e-14, 1e2 * std::numeric_limits<double>::epsilon() * s0 / (s0 - rMin));
        return integrateFromNearest<S>(tri, q, scale, lift<S>(p0, dir1, dir2), s, d, relTol);
    }
    return integrate<S>(tri, n, scale, p0, dir1, dir2, sigma, s0, d);
}

}  // namespace

ElementIntegrator::ElementIntegrator(const Vec3& xi, const Vec3& nx, const Triangle& tri, const KernelParams& params)
    : xi_(xi), nx_(nx), tri_(tri), n_(tri.normal()), p_(params), scale_(tri.longestEdge()) {
    if (p_.d < 1 || p_.d > 3) throw std::invalid_argument("element integrals support basis order 1..3, got " + std::to_string(p_.d));
    rMin_ = (closestPoint(xi, tri) - xi).norm();
    rMax_ = std::max({(tri.a - xi).norm(), (tri.b - xi).norm(), (tri.c - xi).norm()});
}

ElemCoeffs ElementIntegrator::operator()(int gamma) const { return atReach(p_.c * gamma * p_.dt); }

ElemCoeffs ElementIntegrator::atReach(double s) const {
    if (s <= rMin_) return {};
    const HyperDual total = elementIntegral<HyperDual>(tri_, xi_, n_, nx_, kBurtonMillerTimeSign, s, p_.d);
    const double norm = 1.0 / (4.0 * std::numbers::pi * std::pow(p_.c * p_.dt, p_.d));
    return {total.v * norm, -total.d1 * norm, total.d2 * norm, -total.d12 * norm};
}

long ElementIntegrator::fallbackCount() { return gFallbacks.load(); }

double singleLayerCoeff(const Vec3& xi, const Triangle& e, int gamma, const BSplineBasis& basis, double c) {
    const KernelParams p{c, basis.d, basis.dt};
    const double s = c * gamma * basis.dt;
    const double total = elementIntegral<double>(e, xi, Vec3::Zero(), Vec3::Zero(), 0.0, s, basis.d);
    return total / (4.0 * std::numbers::pi * std::pow(p.c * p.dt, p.d));
}

double doubleLayerCoeff(const Vec3& xi, const Triangle& e, int gamma, const BSplineBasis& basis, double c) {
    return ElementIntegrator(xi, Vec3::Zero(), e, {c, basis.d, basis.dt})(gamma).w;
}

std::pair<double, double> bmCoeffs(const Vec3& xi, const Vec3& nx, const Triangle& e, int gamma, const BSplineBasis& basis, double c) {
    const ElemCoeffs k = ElementIntegrator(xi, nx, e, {c, basis.d, basis.dt})(gamma);
    return {k.bmU, k.bmW};
}

double genericEdgeAntiderivative(int d, double x, double y, double z, double s) { return edgePrimitive<double>(d + 1, x, y, z, s); }

double tabulatedEdgeAntiderivative(int d, double x, double y, double z, double s) {
    const double r = std::sqrt(x * x + y * y + z * z);
    const double bigR = std::sqrt(y * y + z * z);
    const double t1 = std::atan(x / y);
    const double t2 = std::atan(x * z / (y * r));
    const double lg = std::log((x + r) / bigR);
    switch (d) {
        case 1:
            return x * y / 2 + (s * s + z * z) / 2 * t1 - s * z * t2 - s * y * lg;
        case 2:
            return (2 * (s * s * s + 3 * s * z * z) * t1 - 2 * z * (3 * s * s + z * z) * t2 - x * y * (-6 * s + r) -
                    y * (6 * s * s + y * y + 3 * z * z) * lg) /
                   6;
        case 3:
            return (x * y * (18 * s * s + x * x + 3 * y * y + 6 * z * z - 6 * s * r) + 3 * (std::pow(s, 4) + 6 * s * s * z * z + std::pow(z, 4)) * t1 -
                    12 * s * z * (s * s + z * z) * t2 - 6 * y * s * (2 * s * s + y * y + 3 * z * z) * lg) /
                   12;
        default:
            throw std::invalid_argument("tabulated antiderivative exists for d = 1, 2, 3");
    }
}

}  // namespace tdbem
