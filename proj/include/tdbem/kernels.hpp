#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace tdbem {

using Vec3 = Eigen::Vector3d;

struct KernelParams {
    double c = 1.0;
    int d = 1;
    double dt = 1.0;
};

struct SpaceTimeArgs {
    Vec3 x;
    Vec3 y;
    double t = 0.0;
    double s = 0.0;
};

// (c(t-s) - r)_+^d / r
double kernelU(const SpaceTimeArgs& a, const KernelParams& p);

// grad_y of kernelU
Vec3 kernelW(const SpaceTimeArgs& a, const KernelParams& p);

// (1/(c^p p!)) d^p U / dt^p, i.e. C(d,p) (c(t-s) - r)^{d-p} / r in the smooth regime
double kernelUDeriv(int order, const SpaceTimeArgs& a, const KernelParams& p);

// Sum_p U^(p)(t) (c(t'-t))^p; throws unless both times are past the wavefront.
double taylorShift(const SpaceTimeArgs& a, double targetTime, const KernelParams& p);

}  // namespace tdbem
