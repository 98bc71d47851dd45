#pragma once

#include <array>
#include <utility>

#include "tdbem/kernels.hpp"
#include "tdbem/tbasis.hpp"

namespace tdbem {

class TriMesh;

struct Triangle {
    Vec3 a, b, c;

    Vec3 normal() const { return (b - a).cross(c - a).normalized(); }
    double area() const { return 0.5 * (b - a).cross(c - a).norm(); }
    Vec3 centroid() const { return (a + b + c) / 3.0; }
    double longestEdge() const;
};

Triangle triangleOf(const TriMesh& mesh, std::size_t j);

// Sign of the time derivative in the Burton-Miller operator when normals point out of the scatterer.
inline constexpr double kBurtonMillerTimeSign = 1.0;

// Retarded coefficients of one (collocation point, element) pair at one lag.
struct ElemCoeffs {
    double u = 0.0;    // single layer
    double w = 0.0;    // double layer
    double bmU = 0.0;  // Burton-Miller operator applied to u
    double bmW = 0.0;  // Burton-Miller operator applied to w
};

enum class CoeffKind { U, W, BmU, BmW };

// Closed-form integration of (s - r)_+^d / r over a flat triangle, with derivatives in the
// collocation point and in s obtained by hyper-dual differentiation. Points on the element
// plane are taken in the limit from the side opposite to the normal.
class ElementIntegrator {
public:
    ElementIntegrator(const Vec3& xi, const Vec3& nx, const Triangle& tri, const KernelParams& params);

    // Coefficients at lag gamma, i.e. s = c * gamma * dt.
    ElemCoeffs operator()(int gamma) const;
    ElemCoeffs atReach(double s) const;

    double minDistance() const { return rMin_; }
    double maxDistance() const { return rMax_; }

    // Fraction of edge evaluations that fell back to quadrature (diagnostics).
    static long fallbackCount();

private:
    Vec3 xi_, nx_;
    Triangle tri_;
    Vec3 n_;
    KernelParams p_;
    double scale_;
    double rMin_, rMax_;
};

double singleLayerCoeff(const Vec3& xi, const Triangle& e, int gamma, const BSplineBasis& basis, double c);
double doubleLayerCoeff(const Vec3& xi, const Triangle& e, int gamma, const BSplineBasis& basis, double c);
std::pair<double, double> bmCoeffs(const Vec3& xi, const Vec3& nx, const Triangle& e, int gamma, const BSplineBasis& basis, double c);

// Adaptive polar quadrature of the same coefficients, built only from the pointwise kernels.
// Evaluated at xi as given, with no side limit.
double quadratureOracle(const Vec3& xi, const Triangle& e, int gamma, const BSplineBasis& basis, double c, CoeffKind which,
                        const Vec3& nx = Vec3::Zero(), double relTol = 1e-11);

// Transcriptions of the tabulated edge antiderivatives for d = 1, 2, 3 (test oracle).
double tabulatedEdgeAntiderivative(int d, double x, double y, double z, double s);
// Same edge quantity from the generic expansion used by ElementIntegrator.
double genericEdgeAntiderivative(int d, double x, double y, double z, double s);

}  // namespace tdbem
