#pragma once

#include "tdbem/kernels.hpp"
#include "tdbem/tbasis.hpp"

namespace tdbem {

// Raised-cosine plane pulse travelling in +x: 0.5 (1 - cos(2 pi (c t - x) / length)) on the band.
struct PlanePulse {
    double c = 1.0;
    double length = 0.5;
    double amplitude = 1.0;
};

struct IncidentSample {
    double value = 0.0;
    Vec3 gradient = Vec3::Zero();
    double timeDerivative = 0.0;
};

IncidentSample incident(const Vec3& x, double t, const PlanePulse& pulse);

// B-spline coefficient for basis index beta reproducing a smooth signal f.
// Order 1 interpolates at the basis peak; higher orders use a centred quasi-interpolant.
template <class F>
double splineCoefficient(F&& f, const BSplineBasis& basis, int beta) {
    if (basis.d == 1) return f(basis.knot(beta + 1));
    const double centre = basis.dt * (beta + 0.5 * (basis.d + 1));
    const double f0 = f(centre);
    const double curvature = f(centre + basis.dt) - 2.0 * f0 + f(centre - basis.dt);
    return f0 - (basis.d + 1) / 24.0 * curvature;
}

}  // namespace tdbem
