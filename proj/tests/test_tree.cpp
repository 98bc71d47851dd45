#include <doctest.h>

#include <cmath>
#include <set>

#include "tdbem/tree.hpp"

using namespace tdbem;

namespace {

int chebyshev(const std::array<int, 3>& a, const std::array<int, 3>& b) {
    int m = 0;
    for (int k = 0; k < 3; ++k) m = std::max(m, std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]));
    return m;
}

int ancestor(const SpaceTimeTree& t, int leaf, int level) {
    int cell = leaf;
    for (int l = t.depth(); l > level; --l) cell = t.level(l).cells[static_cast<std::size_t>(cell)].parent;
    return cell;
}

}  // namespace

TEST_SUITE("tree") {

TEST_CASE("leaves partition the elements within capacity") {
    const TriMesh mesh = makeIcosphere(4, 1.0, Vec3::Zero());
    const SpaceTimeTree t(mesh, 1.0, 0.02, {20, 8});
    std::vector<int> seen(mesh.size(), 0);
    for (int leaf = 0; leaf < static_cast<int>(t.leaves().size()); ++leaf) {
        const Cell& c = t.leaves()[static_cast<std::size_t>(leaf)];
        CHECK(c.elements.size() <= 20);
        CHECK_FALSE(c.elements.empty());
        for (int e : c.elements) {
            ++seen[static_cast<std::size_t>(e)];
            CHECK(t.leafOf(e) == leaf);
            CHECK((mesh.centroid(static_cast<std::size_t>(e)) - c.centre).lpNorm<Eigen::Infinity>() <=
                  t.level(t.depth()).halfWidth * (1 + 1e-9));
        }
    }
    for (int s : seen) CHECK(s == 1);
}

TEST_CASE("interaction lists partition the far field") {
    const TriMesh mesh = makeIcosphere(4, 1.0, Vec3::Zero());
    const SpaceTimeTree t(mesh, 1.0, 0.005, {5, 8});
    REQUIRE(t.depth() >= 3);
    // brute-force lists: children of the parent's neighbours that are not neighbours
    for (int l = 2; l <= t.depth(); ++l) {
        const auto& cells = t.level(l).cells;
        const auto& parents = t.level(l - 1).cells;
        for (const Cell& c : cells) {
            std::set<int> want, got;
            for (int s = 0; s < static_cast<int>(cells.size()); ++s) {
                const Cell& src = cells[static_cast<std::size_t>(s)];
                if (chebyshev(parents[static_cast<std::size_t>(src.parent)].coord, parents[static_cast<std::size_t>(c.parent)].coord) <= 1 &&
                    chebyshev(src.coord, c.coord) > 1)
                    want.insert(s);
            }
            for (const auto& it : c.interactions) {
                got.insert(it.source);
                const Cell& src = cells[static_cast<std::size_t>(it.source)];
                for (int k = 0; k < 3; ++k)
                    CHECK(it.offset[static_cast<std::size_t>(k)] == src.coord[static_cast<std::size_t>(k)] - c.coord[static_cast<std::size_t>(k)]);
            }
            CHECK(got == want);
        }
    }
    // every non-adjacent leaf pair is covered by exactly one interacting ancestor pair
    const int nl = static_cast<int>(t.leaves().size());
    for (int a = 0; a < nl; ++a)
        for (int b = 0; b < nl; ++b) {
            int covers = 0;
            for (int l = 2; l <= t.depth(); ++l) {
                const int ca = ancestor(t, a, l), cb = ancestor(t, b, l);
                for (const auto& it : t.level(l).cells[static_cast<std::size_t>(ca)].interactions) covers += it.source == cb;
            }
            CHECK(covers == (t.leavesAdjacent(a, b) ? 0 : 1));
        }
}

TEST_CASE("time intervals double per level and hold their steps") {
    const TriMesh mesh = makeIcosphere(4, 1.0, Vec3::Zero());
    const double dt = 0.02;
    const SpaceTimeTree t(mesh, 1.0, dt, {10, 8});
    const double leaf = t.level(t.depth()).intervalLength;
    CHECK(leaf == doctest::Approx(2.0 * t.level(t.depth()).halfWidth - dt));
    for (int l = 0; l < t.depth(); ++l) CHECK(t.level(l).intervalLength == doctest::Approx(2.0 * t.level(l + 1).intervalLength));
    for (int l = 2; l <= t.depth(); ++l) {
        const double len = t.level(l).intervalLength;
        for (int alpha = 0; alpha < 400; ++alpha) {
            const int k = t.intervalOfStep(l, alpha);
            CHECK(alpha * dt >= k * len - 1e-12);
            CHECK(alpha * dt < (k + 1) * len + 1e-12);
            CHECK(std::abs(alpha * dt - t.targetCentre(l, k)) <= 0.5 * len + 1e-12);
        }
        CHECK(t.causalityMargin(l) > 0.0);
    }
}

TEST_CASE("causality and step-length checks throw") {
    const TriMesh mesh = makeIcosphere(4, 1.0, Vec3::Zero());
    CHECK_THROWS_AS(SpaceTimeTree(mesh, 1.0, 0.02, {10, 1}), std::runtime_error);
    CHECK_THROWS_AS(SpaceTimeTree(mesh, 1.0, 2.0, {10, 8}), std::runtime_error);
    CHECK_THROWS_AS(SpaceTimeTree(mesh, 1.0, 0.02, {0, 8}), std::invalid_argument);
    // a single leaf has no far field and skips the checks
    const SpaceTimeTree one(mesh, 1.0, 5.0, {100000, 1});
    CHECK_FALSE(one.hasFarField());
    CHECK(one.depth() == 0);
}

}
