#pragma once

#include <array>
#include <vector>

#include "tdbem/mesh.hpp"

namespace tdbem {

struct Interaction {
    int source = 0;                 // cell index on the same level
    std::array<int, 3> offset{};    // source minus target, in cell widths
};

struct Cell {
    std::array<int, 3> coord{};
    Vec3 centre = Vec3::Zero();
    int parent = -1;
    std::vector<int> children;
    std::vector<int> elements;  // leaves only
    std::vector<Interaction> interactions;
};

struct TreeLevel {
    double halfWidth = 0.0;       // h_s
    double intervalLength = 0.0;  // 2 h_t
    std::vector<Cell> cells;      // non-empty cells only
};

struct TreeOptions {
    int leafCapacity = 100;
    int mu = 8;
    int maxDepth = 12;
};

// Uniform-depth octree over the mesh (elements binned by centroid, empty cells dropped) with a
// time-interval hierarchy. The leaf interval is 2 h_s / c - dt and doubles per level up: a target
// step alpha belongs to interval floor(alpha dt / (2 h_t)), a source step n to the interval of
// step n + 1, so every source step of an earlier interval is final before the target is solved and
// no well-separated pair interacts within one interval.
class SpaceTimeTree {
public:
    SpaceTimeTree(const TriMesh& mesh, double c, double dt, const TreeOptions& options);

    int depth() const { return static_cast<int>(levels_.size()) - 1; }
    const TreeLevel& level(int l) const { return levels_[static_cast<std::size_t>(l)]; }
    const std::vector<Cell>& leaves() const { return levels_.back().cells; }

    int leafOf(int element) const { return leafOf_[static_cast<std::size_t>(element)]; }
    bool leavesAdjacent(int a, int b) const;
    bool elementsNear(int i, int j) const { return leavesAdjacent(leafOf(i), leafOf(j)); }

    int intervalOfStep(int level, int step) const;
    // Target interval k spans [k, k+1) * 2 h_t; the matching source interval is shifted back by dt.
    double targetCentre(int level, int k) const;
    double sourceCentre(int level, int k) const { return targetCentre(level, k) - dt_; }

    double c() const { return c_; }
    double dt() const { return dt_; }
    int mu() const { return mu_; }
    bool hasFarField() const;
    std::size_t interactionCount() const;

    // Smallest c (t - s) - r over interaction pairs at lag mu + 1, per level (infinite without pairs).
    double causalityMargin(int level) const;

private:
    std::vector<TreeLevel> levels_;
    std::vector<int> leafOf_;
    double c_, dt_;
    int mu_;
};

SpaceTimeTree buildTree(const TriMesh& mesh, double c, double dt, const TreeOptions& options = {});

}  // namespace tdbem
