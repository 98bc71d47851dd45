#include <doctest.h>

#include <random>

#include "tdbem/incident.hpp"
#include "tdbem/kernels.hpp"

using namespace tdbem;

TEST_SUITE("kernels") {

TEST_CASE("single layer is the truncated power over r") {
    const KernelParams p{2.0, 2, 0.1};
    SpaceTimeArgs a{Vec3(1, 0, 0), Vec3(0, 0, 0), 1.0, 0.0};
    CHECK(kernelU(a, p) == doctest::Approx(1.0));  // (2 - 1)^2 / 1
    a.t = 0.4;
    CHECK(kernelU(a, p) == 0.0);
    a.x = a.y;
    CHECK_THROWS_AS(kernelU(a, p), std::domain_error);
}

TEST_CASE("double layer is the source gradient (finite differences)") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int d = 1; d <= 3; ++d) {
        const KernelParams p{1.3, d, 0.1};
        for (int i = 0; i < 20; ++i) {
            SpaceTimeArgs a{Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)), 3.0, 0.2};
            const Vec3 g = kernelW(a, p);
            const double h = 1e-6;
            for (int k = 0; k < 3; ++k) {
                SpaceTimeArgs lo = a, hi = a;
                lo.y[k] -= h;
                hi.y[k] += h;
                CHECK(g[k] == doctest::Approx((kernelU(hi, p) - kernelU(lo, p)) / (2 * h)).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("Taylor shift reproduces the shifted kernel past the front") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int d = 1; d <= 3; ++d) {
        const KernelParams p{1.0, d, 0.05};
        for (int i = 0; i < 200; ++i) {
            SpaceTimeArgs a{Vec3(u(rng), u(rng), u(rng)), Vec3(-u(rng), -u(rng), -u(rng)), 4.0 + u(rng), 0.0};
            const double target = a.t + 2.0 * (u(rng) - 0.2);
            SpaceTimeArgs shifted = a;
            shifted.t = target;
            const double exact = kernelU(shifted, p);
            CHECK(std::abs(taylorShift(a, target, p) - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
        }
    }
    const KernelParams p{1.0, 1, 0.05};
    CHECK_THROWS_AS(taylorShift({Vec3(3, 0, 0), Vec3::Zero(), 1.0, 0.0}, 5.0, p), std::domain_error);
}

TEST_CASE("Taylor coefficients are binomial multiples of the gap powers") {
    const KernelParams p{1.0, 3, 0.1};
    const SpaceTimeArgs a{Vec3(0.5, 0, 0), Vec3::Zero(), 2.5, 0.0};
    CHECK(kernelUDeriv(1, a, p) == doctest::Approx(3.0 * 4.0 / 0.5));
    CHECK(kernelUDeriv(2, a, p) == doctest::Approx(3.0 * 2.0 / 0.5));
    CHECK(kernelUDeriv(3, a, p) == doctest::Approx(1.0 / 0.5));
    CHECK(kernelUDeriv(4, a, p) == 0.0);
}

TEST_CASE("incident pulse values and derivatives") {
    const PlanePulse pulse{1.0, 0.5, 1.0};
    CHECK(incident(Vec3(0, 0, 0), 0.25, pulse).value == doctest::Approx(1.0));
    const IncidentSample before = incident(Vec3(0.3, 0, 0), 0.2, pulse);
    CHECK(before.value == 0.0);
    CHECK(before.gradient.norm() == 0.0);
    const double h = 1e-6;
    for (double t : {0.05, 0.17, 0.33, 0.49}) {
        const Vec3 x(0.0, 0.4, -0.2);
        const IncidentSample s = incident(x, t, pulse);
        const double fd = (incident(x, t + h, pulse).value - incident(x, t - h, pulse).value) / (2 * h);
        CHECK(s.timeDerivative == doctest::Approx(fd).epsilon(1e-8));
        const double gx = (incident(x + Vec3(h, 0, 0), t, pulse).value - incident(x - Vec3(h, 0, 0), t, pulse).value) / (2 * h);
        CHECK(s.gradient.x() == doctest::Approx(gx).epsilon(1e-8));
    }
}

}
