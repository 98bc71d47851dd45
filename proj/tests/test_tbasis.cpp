#include <doctest.h>

#include <cmath>
#include <random>

#include "tdbem/tbasis.hpp"

using namespace tdbem;

TEST_SUITE("tbasis") {

TEST_CASE("weight table matches the published fractions") {
    using W = std::vector<std::pair<long long, long long>>;
    CHECK(weightsExact(1) == W{{1, 1}, {-2, 1}, {1, 1}});
    CHECK(weightsExact(2) == W{{1, 2}, {-3, 2}, {3, 2}, {-1, 2}});
    CHECK(weightsExact(3) == W{{1, 6}, {-2, 3}, {1, 1}, {-2, 3}, {1, 6}});
    CHECK(weightsExact(4) == W{{1, 24}, {-5, 24}, {5, 12}, {-5, 12}, {5, 24}, {-1, 24}});
}

TEST_CASE("weights annihilate polynomials of degree d") {
    for (int d = 1; d <= 4; ++d) {
        const auto w = weights(d);
        for (int deg = 0; deg <= d; ++deg) {
            double sum = 0.0;
            for (int k = 0; k < static_cast<int>(w.size()); ++k) sum += w[static_cast<std::size_t>(k)] * std::pow(k, deg);
            CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("truncated-power evaluation agrees with Cox-de Boor") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 8.0);
    for (int d = 1; d <= 3; ++d) {
        const BSplineBasis basis(d, 0.37);
        double worst = 0.0;
        for (int i = 0; i < 2000; ++i) {
            const double t = u(rng) * basis.dt;
            const int beta = static_cast<int>(u(rng) + 1.0);
            worst = std::max(worst, std::abs(evalBasis(basis, beta, t) - evalBasisOracle(basis, beta, t)));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("basis is a partition of unity with the expected support") {
    for (int d = 1; d <= 3; ++d) {
        const BSplineBasis basis(d, 0.5);
        for (double t = (d + 1) * 0.5; t < 6.0; t += 0.137) {
            double sum = 0.0;
            for (int beta = 0; beta < 20; ++beta) sum += evalBasis(basis, beta, t);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(evalBasis(basis, 2, 0.99) == 0.0);
        CHECK(evalBasis(basis, 2, (2 + d + 1) * 0.5 + 1e-9) == doctest::Approx(0.0).epsilon(1e-12));
    }
    CHECK(evalBasis(BSplineBasis(1, 1.0), 0, 1.0) == doctest::Approx(1.0));  // hat peak
}

TEST_CASE("invalid orders are rejected") {
    CHECK_THROWS(BSplineBasis(0, 0.1));
    CHECK_THROWS(BSplineBasis(1, 0.0));
}

}
