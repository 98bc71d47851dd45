#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "tdbem/incident.hpp"
#include "tdbem/marching.hpp"
#include "tdbem/mesh.hpp"

namespace tdbem {

using Complex = std::complex<double>;

// Sphere hit by the plane pulse. Soft sphere: u = 0 (Dirichlet); hard sphere: q = 0 (Neumann).
struct SphereScenario {
    double radius = 0.5;
    Vec3 centre{0.5, 0.0, 0.0};
    Boundary bc = Boundary::Neumann;
    PlanePulse pulse;
    double duration = 9.6;  // analysis time Nt dt
};

// Fourier transform F(w) = int f(t) e^{iwt} dt of the pulse seen at x1 = 0; Im w > 0 allowed.
Complex pulseSpectrum(Complex omega, const PlanePulse& pulse);

// Spherical Hankel functions of the first kind h_0..h_n (upward recurrence) and the regular
// functions j_0..j_n (Miller downward recurrence), for complex argument.
std::vector<Complex> sphericalHankel(int n, Complex z);
std::vector<Complex> sphericalBesselJ(int n, Complex z);

inline constexpr int kDefaultMaxOrder = 80;

// Frequency-domain fields for a unit plane wave e^{ik(x1 - centre1)} with k = omega / c, at
// radius r >= a and polar angle theta measured from +x1. Throws if the series does not converge.
Complex scatteredField(Boundary bc, Complex k, double a, double r, double cosTheta, int maxOrder = kDefaultMaxOrder);
Complex totalField(Boundary bc, Complex k, double a, double r, double cosTheta, int maxOrder = kDefaultMaxOrder);
// Boundary unknown on the surface: total u for the hard sphere, total q = du/dr for the soft one.
Complex surfaceUnknown(Boundary bc, Complex k, double a, double cosTheta, int maxOrder = kDefaultMaxOrder);
// Series cap used by the transform: the default, raised to cover |ka| at the top frequency.
int seriesOrderFor(double ka);

// The transform samples at dt / oversample over a window of Nf samples, Nf the next power of two
// >= frequencyFactor * oversample * Nt, on the contour Im w = sigma = ln(10^decades) / window.
struct TransformOptions {
    int frequencyFactor = 4;
    int oversample = 4;
    double dampingDecades = 8;
    int maxOrder = 0;  // 0: seriesOrderFor the top frequency
    int threads = 1;
};

// Time history of the surface unknown (total field) at steps alpha * dt, alpha < nt, for each
// point; rows are steps, columns points.
Eigen::MatrixXd referenceSolution(const SphereScenario& s, const std::vector<Vec3>& points, double dt, int nt,
                                  const TransformOptions& options = {});

// sqrt(sum (v - ref)^2) / sqrt(sum ref^2).
double relL2Error(const Eigen::MatrixXd& numerical, const Eigen::MatrixXd& reference);

// Collocation points nearest to `count` equidistant samples on the arc x2 = 0, x3 >= 0.
std::vector<int> arcEvaluationPoints(const TriMesh& mesh, const SphereScenario& s, int count = 33);

}  // namespace tdbem
