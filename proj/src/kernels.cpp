#include "tdbem/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "tdbem/tbasis.hpp"

namespace tdbem {

namespace {

double separation(const SpaceTimeArgs& a) {
    const double r = (a.x - a.y).norm();
    if (r == 0.0) throw std::domain_error("kernel evaluated at coincident points");
    return r;
}

double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

}  // namespace

double kernelU(const SpaceTimeArgs& a, const KernelParams& p) {
    const double r = separation(a);
    return truncPow(p.c * (a.t - a.s) - r, p.d) / r;
}

Vec3 kernelW(const SpaceTimeArgs& a, const KernelParams& p) {
    const double r = separation(a);
    const double T = p.c * (a.t - a.s);
    const double lead = p.d * truncPow(T - r, p.d - 1) * T;
    const double tail = (p.d - 1) * truncPow(T - r, p.d);
    return (lead - tail) * (a.x - a.y) / (r * r * r);
}

double kernelUDeriv(int order, const SpaceTimeArgs& a, const KernelParams& p) {
    if (order < 0 || order > p.d) return 0.0;
    const double r = separation(a);
    const double gap = p.c * (a.t - a.s) - r;
    if (order == 0) return truncPow(gap, p.d) / r;
    if (gap <= 0.0) return 0.0;
    return binomial(p.d, order) * ipow(gap, p.d - order) / r;
}

double taylorShift(const SpaceTimeArgs& a, double targetTime, const KernelParams& p) {
    const double r = separation(a);
    if (p.c * (a.t - a.s) - r <= 0.0 || p.c * (targetTime - a.s) - r <= 0.0)
        throw std::domain_error("Taylor shift requires both times past the wavefront");
    const double step = p.c * (targetTime - a.t);
    double sum = 0.0;
    double pw = 1.0;
    for (int q = 0; q <= p.d; ++q) {
        sum += kernelUDeriv(q, a, p) * pw;
        pw *= step;
    }
    return sum;
}

}  // namespace tdbem
