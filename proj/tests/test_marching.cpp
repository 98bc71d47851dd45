#include <doctest.h>

#include "tdbem/marching.hpp"

using namespace tdbem;

namespace {

struct Fixture {
    TriMesh mesh = makeIcosphere(2, 0.5, Vec3(0.5, 0, 0));
    ProblemSpec spec;

    explicit Fixture(int d, Bie bie = Bie::Obie, bool mixed = false) {
        spec.mesh = &mesh;
        spec.boundary.assign(mesh.size(), Boundary::Neumann);
        if (mixed)
            for (std::size_t j = 0; j < mesh.size(); j += 3) spec.boundary[j] = Boundary::Dirichlet;
        spec.bie = bie;
        spec.basis = BSplineBasis(d, 0.1);
        spec.nt = 30;
        spec.incident = {1.0, 0.5, 1.0};
    }
};

}  // namespace

TEST_SUITE("marching") {

TEST_CASE("kappa-summed right-hand side equals the raw double sum") {
    for (int d = 1; d <= 3; ++d) {
        for (bool mixed : {false, true}) {
            Fixture f(d, d == 2 ? Bie::Bmbie : Bie::Obie, mixed);
            const RetardedMatrixSet full = assembleRetarded(f.spec, {}, f.spec.nt + d + 2);
            const auto w = weights(d);
            march(f.spec, full, {.onStep = [&](int alpha, const TimeHistory& h) {
                      // both forms drop the unknown of step alpha - 1 and keep everything else
                      const Eigen::VectorXd a = stepRhs(full, h, f.spec.boundary, w, alpha);
                      const Eigen::VectorXd b = rawRhs(full, h, f.spec.boundary, w, alpha);
                      CHECK((a - b).norm() <= 1e-10 * std::max(1.0, b.norm()));
                  }});
        }
    }
}

TEST_CASE("history truncation at the pair horizon is exact") {
    for (int d = 1; d <= 3; ++d) {
        Fixture f(d);
        const TimeHistory trunc = march(f.spec);
        const TimeHistory full = march(f.spec, assembleRetarded(f.spec, {}, f.spec.nt + d + 2));
        REQUIRE(trunc.solvedSteps == full.solvedSteps);
        CHECK((trunc.u - full.u).norm() <= 1e-10 * full.u.norm());
    }
}

TEST_CASE("threaded right-hand side matches serial") {
    Fixture f(2);
    const RetardedMatrixSet m = assembleRetarded(f.spec);
    const TimeHistory h = march(f.spec, m);
    const auto w = weights(2);
    for (int alpha : {3, 11, 25}) {
        const Eigen::VectorXd a = stepRhs(m, h, f.spec.boundary, w, alpha, 1);
        const Eigen::VectorXd b = stepRhs(m, h, f.spec.boundary, w, alpha, 3);
        CHECK((a - b).norm() == 0.0);
    }
}

TEST_CASE("stored pairs only run to their own horizon") {
    Fixture f(1);
    const RetardedMatrixSet m = assembleRetarded(f.spec);
    for (int i = 0; i < m.rows(); ++i)
        for (const auto& run : m.runs(i)) {
            CHECK(run.first >= 1);
            CHECK(run.horizon <= m.gammaStar());
            CHECK(m.coeffU(run.horizon + 1, i, run.col) == 0.0);
        }
    CHECK(m.storedEntries() > 0);
}

TEST_CASE("prescribed data reproduces the incident field") {
    Fixture f(1, Bie::Obie, true);
    const Eigen::MatrixXd known = knownData(f.spec);
    for (std::size_t j = 0; j < f.mesh.size(); ++j) {
        const Vec3& x = f.mesh.centroid(j);
        for (int beta = 0; beta < f.spec.nt; ++beta) {
            const IncidentSample s = incident(x, f.spec.basis.knot(beta + 1), f.spec.incident);
            const double want = f.spec.boundary[j] == Boundary::Dirichlet ? -s.value : -s.gradient.dot(f.mesh.normal(j));
            CHECK(known(beta, static_cast<Eigen::Index>(j)) == doctest::Approx(want));
        }
    }
}

TEST_CASE("field values use the partition of unity") {
    for (int d = 1; d <= 3; ++d) {
        const BSplineBasis basis(d, 0.1);
        TimeHistory h;
        const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(20, 1);
        for (int alpha = d + 1; alpha < 20; ++alpha) CHECK(h.valueAt(ones, basis, alpha, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("blow-up detector stops the march") {
    Fixture f(1);
    f.spec.blowUpFactor = 1e-3;
    int calls = 0;
    const TimeHistory h = march(f.spec, {.onStep = [&](int, const TimeHistory&) { ++calls; }});
    CHECK(h.unstable);
    CHECK(h.status == "unstable");
    CHECK(h.solvedSteps == calls);
    CHECK(h.solvedSteps < f.spec.nt - 1);
}

TEST_CASE("invalid problems are rejected") {
    Fixture f(1);
    f.spec.boundary.pop_back();
    CHECK_THROWS_AS(march(f.spec), std::invalid_argument);
    Fixture g(1);
    g.spec.basis.d = 4;
    CHECK_THROWS_AS(march(g.spec), std::invalid_argument);
    Fixture h(1);
    h.spec.mesh = nullptr;
    CHECK_THROWS_AS(march(h.spec), std::invalid_argument);
}

}
