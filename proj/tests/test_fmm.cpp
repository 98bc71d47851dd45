#include <doctest.h>

#include <random>

#include "tdbem/elemint.hpp"
#include "tdbem/fmm.hpp"

using namespace tdbem;

namespace {

TimeHistory impulseHistory(int nt, int ns, int step, int element, bool doubleLayer) {
    TimeHistory h;
    h.tau = Eigen::MatrixXd::Zero(nt, ns);
    h.sigma = h.tau;
    h.u = h.tau;
    h.q = h.tau;
    h.solvedSteps = nt;
    (doubleLayer ? h.sigma : h.tau)(step, element) = 1.0;
    return h;
}

struct SphereCase {
    TriMesh mesh = makeIcosphere(4, 1.0, Vec3::Zero());
    ProblemSpec spec;
    SpaceTimeTree tree;

    SphereCase(int d, double dt, int nt) : tree(mesh, 1.0, dt, {10, 8}) {
        spec.mesh = &mesh;
        spec.boundary.assign(mesh.size(), Boundary::Neumann);
        spec.basis = BSplineBasis(d, dt);
        spec.nt = nt;
    }

    // a target close to element 0 but outside its neighbouring leaves
    int farPartner() const {
        int best = -1;
        for (int e = 0; e < static_cast<int>(mesh.size()); ++e)
            if (!tree.elementsNear(e, 0) && (best < 0 || (mesh.centroid(static_cast<std::size_t>(e)) - mesh.centroid(0)).norm() <
                                                              (mesh.centroid(static_cast<std::size_t>(best)) - mesh.centroid(0)).norm()))
                best = e;
        return best;
    }
};

}  // namespace

TEST_SUITE("fmm") {

TEST_CASE("moment and local transfers are adjoint") {
    std::mt19937 rng(1);
    std::normal_distribution<double> g;
    const InterpScheme s(5), t(4);
    const Eigen::MatrixXd tx = s.transfer(-0.5, 0.5), ty = s.transfer(0.5, 0.5), tz = s.transfer(-0.5, 0.5), tt = t.transfer(0.5, 0.5);
    Eigen::VectorXd child(5 * 5 * 5 * 4), parent(5 * 5 * 5 * 4);
    for (auto& v : child) v = g(rng);
    for (auto& v : parent) v = g(rng);
    Eigen::VectorXd up = Eigen::VectorXd::Zero(parent.size()), down = Eigen::VectorXd::Zero(child.size());
    transferMoment(tx, ty, tz, tt, child, up);
    transferLocal(tx, ty, tz, tt, parent, down);
    CHECK(up.dot(parent) == doctest::Approx(child.dot(down)).epsilon(1e-12));
    // a constant local stays constant on the child
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(parent.size()), onChild = Eigen::VectorXd::Zero(child.size());
    transferLocal(tx, ty, tz, tt, ones, onChild);
    CHECK((onChild - Eigen::VectorXd::Ones(child.size())).norm() <= 1e-12 * std::sqrt(static_cast<double>(child.size())));
}

TEST_CASE("far field of a single impulse matches the element coefficient") {
    const int nt = 150, n0 = 5;
    SphereCase sc(2, 0.02, nt);
    REQUIRE(sc.tree.hasFarField());
    const int i = sc.farPartner();
    REQUIRE(i >= 0);
    FmmOptions opt;
    opt.ps = 8;
    opt.pt = 8;
    opt.leafCapacity = 10;
    FarField far(sc.spec, sc.tree, opt);
    const TimeHistory h = impulseHistory(nt, static_cast<int>(sc.mesh.size()), n0, 0, false);
    double peak = 0.0, worst = 0.0;
    for (int a = 1; a < nt; ++a) {
        const double got = far.evaluate(a, h)[i];
        const double want = a - n0 >= 1 ? singleLayerCoeff(sc.mesh.centroid(static_cast<std::size_t>(i)), triangleOf(sc.mesh, 0), a - n0, sc.spec.basis, 1.0) : 0.0;
        peak = std::max(peak, std::abs(want));
        worst = std::max(worst, std::abs(got - want));
    }
    CHECK(peak > 1.0);
    CHECK(worst <= 1e-3 * peak);
}

TEST_CASE("FFT and dense translation give the same far field") {
    const int nt = 80;
    SphereCase sc(1, 0.02, nt);
    FmmOptions opt;
    opt.ps = 4;
    opt.pt = 4;
    opt.leafCapacity = 10;
    FarField fft(sc.spec, sc.tree, opt);
    opt.mode = M2LMode::Dense;
    FarField dense(sc.spec, sc.tree, opt);
    std::mt19937 rng(6);
    std::normal_distribution<double> g;
    TimeHistory h = impulseHistory(nt, static_cast<int>(sc.mesh.size()), 0, 0, false);
    for (Eigen::Index k = 0; k < h.tau.size(); ++k) {
        h.tau.data()[k] = g(rng);
        h.sigma.data()[k] = g(rng);
    }
    for (int a = 1; a < nt; ++a) {
        const Eigen::VectorXd x = fft.evaluate(a, h), y = dense.evaluate(a, h);
        CHECK((x - y).norm() <= 1e-10 * std::max(1.0, y.norm()));
    }
}

TEST_CASE("steps must not go backwards and moments need solved steps") {
    const int nt = 80;
    SphereCase sc(1, 0.02, nt);
    FmmOptions opt;
    opt.ps = 4;
    opt.pt = 4;
    opt.leafCapacity = 10;
    FarField far(sc.spec, sc.tree, opt);
    TimeHistory h = impulseHistory(nt, static_cast<int>(sc.mesh.size()), 0, 0, false);
    far.evaluate(60, h);
    CHECK_THROWS_AS(far.evaluate(10, h), std::logic_error);
    FarField early(sc.spec, sc.tree, opt);
    h.solvedSteps = 3;
    CHECK_THROWS_AS(early.evaluate(70, h), std::logic_error);
    opt.ps = 3;
    CHECK_THROWS_AS(fastMarch(sc.spec, opt), std::invalid_argument);
}

TEST_CASE("without a far field the fast solver is the stored-matrix solver") {
    SphereCase sc(1, 0.05, 25);
    sc.spec.incident = {1.0, 0.5, 1.0};
    FmmOptions opt;
    opt.leafCapacity = 100000;
    FastStats stats;
    const TimeHistory fast = fastMarch(sc.spec, opt, {}, nullptr, &stats);
    const TimeHistory conv = march(sc.spec);
    CHECK(stats.interactions == 0);
    CHECK((fast.u - conv.u).norm() == 0.0);
}

}
