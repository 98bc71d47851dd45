#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tdbem/elemint.hpp"

using namespace tdbem;

namespace {

const Triangle kTri{Vec3(0, 0, 0), Vec3(0.3, 0.02, 0), Vec3(0.08, 0.25, 0)};

void checkClose(double got, double want, double tol) {
    CHECK(std::abs(got - want) <= tol * std::max(1.0, std::abs(want)));
}

}  // namespace

TEST_SUITE("elemint") {

TEST_CASE("generic edge expansion matches the tabulated antiderivatives") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int d = 1; d <= 3; ++d) {
        for (int i = 0; i < 100; ++i) {
            const double x = u(rng), y = 0.05 + std::abs(u(rng)), z = u(rng);
            const double s = std::sqrt(x * x + y * y + z * z) + 0.5 * std::abs(u(rng));
            checkClose(genericEdgeAntiderivative(d, x, y, z, s), tabulatedEdgeAntiderivative(d, x, y, z, s), 1e-10);
        }
    }
    CHECK_THROWS(tabulatedEdgeAntiderivative(4, 0.1, 0.2, 0.3, 1.0));
}

TEST_CASE("coefficients vanish before the front reaches the element") {
    const BSplineBasis basis(2, 0.1);
    const Vec3 xi(0.1, 0.1, 1.0);
    CHECK(singleLayerCoeff(xi, kTri, 9, basis, 1.0) == 0.0);
    CHECK(doubleLayerCoeff(xi, kTri, 9, basis, 1.0) == 0.0);
    CHECK(singleLayerCoeff(xi, kTri, 11, basis, 1.0) > 0.0);
}

TEST_CASE("single and double layer agree with adaptive quadrature") {
    const std::vector<Vec3> observers{Vec3(0.1, 0.08, 0.05), Vec3(-0.2, 0.4, -0.15), Vec3(0.6, -0.1, 0.3), Vec3(0.12, 0.1, 0.0)};
    for (int d = 1; d <= 3; ++d) {
        const BSplineBasis basis(d, 0.05);
        for (std::size_t o = 0; o < observers.size(); ++o) {
            const Vec3& xi = observers[o];
            for (int gamma = 1; gamma <= 20; gamma += 3) {
                CAPTURE(d);
                CAPTURE(o);
                CAPTURE(gamma);
                checkClose(singleLayerCoeff(xi, kTri, gamma, basis, 1.0), quadratureOracle(xi, kTri, gamma, basis, 1.0, CoeffKind::U), 1e-8);
                if (xi.z() != 0.0)
                    checkClose(doubleLayerCoeff(xi, kTri, gamma, basis, 1.0), quadratureOracle(xi, kTri, gamma, basis, 1.0, CoeffKind::W),
                               1e-8);
            }
        }
    }
}

TEST_CASE("Burton-Miller images agree with adaptive quadrature") {
    const Vec3 nx = Vec3(0.3, -0.2, 0.9).normalized();
    const std::vector<Vec3> observers{Vec3(0.1, 0.08, 0.07), Vec3(0.5, 0.3, -0.2)};
    for (int d = 1; d <= 3; ++d) {
        const BSplineBasis basis(d, 0.05);
        for (const Vec3& xi : observers) {
            for (int gamma = 2; gamma <= 18; gamma += 4) {
                CAPTURE(d);
                CAPTURE(gamma);
                const auto [bu, bw] = bmCoeffs(xi, nx, kTri, gamma, basis, 1.0);
                checkClose(bu, quadratureOracle(xi, kTri, gamma, basis, 1.0, CoeffKind::BmU, nx), 1e-7);
                checkClose(bw, quadratureOracle(xi, kTri, gamma, basis, 1.0, CoeffKind::BmW, nx), 1e-7);
            }
        }
    }
}

TEST_CASE("far observer sees a point source") {
    // r >> element size: coefficient -> area * (s - r)^d / r / (4 pi (c dt)^d)
    const BSplineBasis basis(1, 1.0);
    const Vec3 xi = kTri.centroid() + Vec3(0, 0, 200.0);
    const double got = singleLayerCoeff(xi, kTri, 260, basis, 1.0);
    const double want = kTri.area() * 60.0 / 200.0 / (4.0 * std::numbers::pi);
    CHECK(got == doctest::Approx(want).epsilon(1e-5));
}

}
