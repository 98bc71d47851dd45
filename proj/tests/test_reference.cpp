#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tdbem/reference.hpp"

using namespace tdbem;
using namespace std::complex_literals;

namespace {

bool near(Complex a, Complex b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_SUITE("reference") {

TEST_CASE("low-order spherical functions have closed forms") {
    for (Complex z : {Complex(0.7, 0.0), Complex(3.1, 0.2), Complex(12.0, 0.05), Complex(0.01, 0.001)}) {
        const auto h = sphericalHankel(1, z);
        const auto j = sphericalBesselJ(1, z);
        CHECK(near(h[0], -1i * std::exp(1i * z) / z, 1e-12));
        CHECK(near(h[1], -std::exp(1i * z) * (z + 1i) / (z * z), 1e-12));
        CHECK(near(j[0], std::sin(z) / z, 1e-12));
        CHECK(near(j[1], std::sin(z) / (z * z) - std::cos(z) / z, 1e-8));
    }
}

TEST_CASE("cross products obey the Wronskian") {
    // j_n h_{n-1} - j_{n-1} h_n = i / z^2
    for (Complex z : {Complex(0.5, 0.1), Complex(4.0, 0.3), Complex(25.0, 0.02)}) {
        const int n = 40;
        const auto h = sphericalHankel(n, z);
        const auto j = sphericalBesselJ(n, z);
        for (int m = 1; m <= n; ++m) {
            const Complex w = j[static_cast<std::size_t>(m)] * h[static_cast<std::size_t>(m - 1)] - j[static_cast<std::size_t>(m - 1)] * h[static_cast<std::size_t>(m)];
            CAPTURE(m);
            CHECK(std::abs(w - 1i / (z * z)) <= 1e-9 * std::abs(1.0 / (z * z)));
        }
    }
    // small-argument limit j_n(z) ~ z^n / (2n+1)!!
    const auto j = sphericalBesselJ(10, Complex(1e-3, 0.0));
    double dfact = 1.0;
    for (int k = 1; k <= 21; k += 2) dfact *= k;
    CHECK(j[10].real() == doctest::Approx(std::pow(1e-3, 10) / dfact).epsilon(1e-5));
}

TEST_CASE("pulse spectrum matches quadrature of the pulse") {
    const PlanePulse pulse{1.0, 0.5, 1.3};
    const double T = pulse.length / pulse.c;
    for (Complex w : {Complex(0.0, 0.0), Complex(1e-5, 0.0), Complex(3.0, 0.4), Complex(12.566370614359172, 0.0), Complex(40.0, 1.0)}) {
        // composite Simpson on the support
        const int n = 4000;
        Complex acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double t = T * i / n;
            const double f = incident(Vec3::Zero(), t, pulse).value;
            const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += wgt * f * std::exp(1i * w * t);
        }
        acc *= T / n / 3.0;
        CAPTURE(w);
        CHECK(near(pulseSpectrum(w, pulse), acc, 1e-9));
    }
}

TEST_CASE("boundary conditions hold on the surface") {
    const double a = 0.5;
    for (Complex k : {Complex(0.3, 0.05), Complex(5.0, 0.3), Complex(30.0, 0.1)}) {
        for (double ct : {-0.9, 0.0, 0.3, 1.0}) {
            CHECK(std::abs(totalField(Boundary::Dirichlet, k, a, a, ct)) <= 1e-10);
            // hard sphere: radial derivative of the total field vanishes
            const double h = 1e-5;
            const Complex dr = (totalField(Boundary::Neumann, k, a, a + h, ct) - totalField(Boundary::Neumann, k, a, a + 2 * h, ct) * 0.25 -
                                0.75 * totalField(Boundary::Neumann, k, a, a, ct)) /
                               (0.5 * h);
            CHECK(std::abs(dr) <= 1e-5 * std::abs(k) * std::max(1.0, std::abs(totalField(Boundary::Neumann, k, a, a, ct))));
            CHECK(near(surfaceUnknown(Boundary::Neumann, k, a, ct), totalField(Boundary::Neumann, k, a, a, ct), 1e-10));
            const Complex dq = (totalField(Boundary::Dirichlet, k, a, a + h, ct) - totalField(Boundary::Dirichlet, k, a, a + 2 * h, ct) * 0.25) / (0.5 * h);
            CHECK(near(surfaceUnknown(Boundary::Dirichlet, k, a, ct), dq, 1e-5 * std::abs(k)));
        }
    }
}

TEST_CASE("far from the sphere the total field is the plane wave") {
    const Complex k(2.0, 0.0);
    // tiny sphere: scattering ~ (ka)^2 / (kr)
    const Complex u = totalField(Boundary::Neumann, k, 1e-3, 5.0, 0.2);
    CHECK(near(u, std::exp(1i * k * 5.0 * 0.2), 1e-5));
}

TEST_CASE("time histories are causal and converge with sampling") {
    SphereScenario s;
    s.bc = Boundary::Neumann;
    const std::vector<Vec3> pts{s.centre + Vec3(-0.5, 0, 0), s.centre + Vec3(0, 0, 0.5), s.centre + Vec3(0.5, 0, 0)};
    const double dt = 0.04;
    const int nt = 120;
    const Eigen::MatrixXd r4 = referenceSolution(s, pts, dt, nt);
    TransformOptions fine;
    fine.oversample = 8;
    const Eigen::MatrixXd r8 = referenceSolution(s, pts, dt, nt, fine);
    CHECK(relL2Error(r4, r8) < 1e-3);

    // nothing reaches the side or the back before the shortest path around the sphere
    const double side = 0.5, back = 0.5 + 0.5 * std::numbers::pi / 2.0;
    for (int a = 0; a < nt; ++a) {
        const double t = a * dt;
        if (t < side - 0.05) CHECK(std::abs(r8(a, 1)) < 1e-4);
        if (t < back - 0.05) CHECK(std::abs(r8(a, 2)) < 1e-4);
    }
    // pressure doubling at the front point while the pulse is short compared with the radius
    for (int a = 1; a <= 2; ++a) {
        const double inc = incident(pts[0], a * dt, s.pulse).value;
        CHECK(r8(a, 0) == doctest::Approx(2.0 * inc).epsilon(0.05));
    }
    // the field dies out after the pulse has passed
    CHECK(r8.bottomRows(20).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("helpers validate their input") {
    CHECK_THROWS_AS(relL2Error(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
    CHECK_THROWS_AS(relL2Error(Eigen::MatrixXd::Ones(2, 3), Eigen::MatrixXd::Ones(3, 2)), std::invalid_argument);
    CHECK(relL2Error(Eigen::MatrixXd::Constant(2, 2, 1.1), Eigen::MatrixXd::Ones(2, 2)) == doctest::Approx(0.1));
    SphereScenario s;
    const TriMesh mesh = makeIcosphere(8, s.radius, s.centre);
    const auto ids = arcEvaluationPoints(mesh, s, 9);
    REQUIRE(ids.size() == 9);
    for (int id : ids) CHECK(mesh.centroid(static_cast<std::size_t>(id)).z() > -0.05);
    CHECK(mesh.centroid(static_cast<std::size_t>(ids.front())).x() < 0.05);
    CHECK(mesh.centroid(static_cast<std::size_t>(ids.back())).x() > 0.95);
    CHECK_THROWS_AS(arcEvaluationPoints(mesh, s, 1), std::invalid_argument);
}

}
