#include "tdbem/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace tdbem {

namespace {

using Coord = std::array<int, 3>;

long long packCoord(const Coord& c) {
    return (static_cast<long long>(c[0]) << 42) | (static_cast<long long>(c[1]) << 21) | static_cast<long long>(c[2]);
}

Coord binOf(const Vec3& x, const Vec3& corner, double width, int n) {
    Coord c;
    for (int k = 0; k < 3; ++k)
        c[static_cast<std::size_t>(k)] = std::clamp(static_cast<int>(std::floor((x[k] - corner[k]) / width)), 0, n - 1);
    return c;
}

int chebyshev(const Coord& a, const Coord& b) {
    int m = 0;
    for (int k = 0; k < 3; ++k) m = std::max(m, std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]));
    return m;
}

}  // namespace

SpaceTimeTree::SpaceTimeTree(const TriMesh& mesh, double c, double dt, const TreeOptions& options)
    : c_(c), dt_(dt), mu_(options.mu) {
    if (mesh.size() == 0) throw std::invalid_argument("cannot build a tree over an empty mesh");
    if (options.leafCapacity < 1) throw std::invalid_argument("leaf capacity must be positive");
    if (options.mu < 1) throw std::invalid_argument("mu must be positive");
    if (!(c > 0.0) || !(dt > 0.0)) throw std::invalid_argument("wave speed and time step must be positive");

    Vec3 lo = mesh.vertices().front(), hi = lo;
    for (const Vec3& v : mesh.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const double side = (hi - lo).maxCoeff() * (1.0 + 1e-9) + 1e-12;
    const Vec3 corner = 0.5 * (lo + hi) - Vec3::Constant(0.5 * side);
    const int ns = static_cast<int>(mesh.size());

    // shallowest uniform depth meeting the capacity
    int depth = 0;
    for (;; ++depth) {
        if (depth == options.maxDepth) break;
        const int n = 1 << depth;
        std::unordered_map<long long, int> count;
        int worst = 0;
        for (int i = 0; i < ns; ++i)
            worst = std::max(worst, ++count[packCoord(binOf(mesh.centroid(static_cast<std::size_t>(i)), corner, side / n, n))]);
        if (worst <= options.leafCapacity) break;
    }

    levels_.resize(static_cast<std::size_t>(depth + 1));
    std::vector<std::unordered_map<long long, int>> index(levels_.size());
    leafOf_.assign(static_cast<std::size_t>(ns), -1);
    for (int l = 0; l <= depth; ++l) {
        const int n = 1 << l;
        TreeLevel& lev = levels_[static_cast<std::size_t>(l)];
        lev.halfWidth = 0.5 * side / n;
        for (int i = 0; i < ns; ++i) {
            const Coord cc = binOf(mesh.centroid(static_cast<std::size_t>(i)), corner, side / n, n);
            auto [it, inserted] = index[static_cast<std::size_t>(l)].try_emplace(packCoord(cc), static_cast<int>(lev.cells.size()));
            if (inserted) {
                Cell cell;
                cell.coord = cc;
                cell.centre = corner + Vec3(cc[0] + 0.5, cc[1] + 0.5, cc[2] + 0.5) * (side / n);
                lev.cells.push_back(std::move(cell));
            }
            if (l == depth) {
                lev.cells[static_cast<std::size_t>(it->second)].elements.push_back(i);
                leafOf_[static_cast<std::size_t>(i)] = it->second;
            }
        }
        if (l > 0) {
            auto& parents = levels_[static_cast<std::size_t>(l - 1)].cells;
            for (int k = 0; k < static_cast<int>(lev.cells.size()); ++k) {
                Cell& cell = lev.cells[static_cast<std::size_t>(k)];
                const Coord pc{cell.coord[0] / 2, cell.coord[1] / 2, cell.coord[2] / 2};
                cell.parent = index[static_cast<std::size_t>(l - 1)].at(packCoord(pc));
                parents[static_cast<std::size_t>(cell.parent)].children.push_back(k);
            }
        }
    }

    // time intervals: leaf length 2 h_s / c - dt, doubling towards the root
    const double leafInterval = 2.0 * levels_.back().halfWidth / c - dt;
    for (int l = depth; l >= 0; --l)
        levels_[static_cast<std::size_t>(l)].intervalLength = leafInterval * std::ldexp(1.0, depth - l);

    // interaction lists: children of the parent's neighbours that are not neighbours themselves
    for (int l = 2; l <= depth; ++l) {
        auto& cells = levels_[static_cast<std::size_t>(l)].cells;
        const auto& parents = levels_[static_cast<std::size_t>(l - 1)].cells;
        for (auto& cell : cells) {
            const Cell& parent = parents[static_cast<std::size_t>(cell.parent)];
            for (int dx = -1; dx <= 1; ++dx)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dz = -1; dz <= 1; ++dz) {
                        const Coord nc{parent.coord[0] + dx, parent.coord[1] + dy, parent.coord[2] + dz};
                        const auto it = index[static_cast<std::size_t>(l - 1)].find(packCoord(nc));
                        if (it == index[static_cast<std::size_t>(l - 1)].end()) continue;
                        for (int child : parents[static_cast<std::size_t>(it->second)].children) {
                            const Cell& src = cells[static_cast<std::size_t>(child)];
                            if (chebyshev(src.coord, cell.coord) <= 1) continue;
                            cell.interactions.push_back({child, {src.coord[0] - cell.coord[0], src.coord[1] - cell.coord[1],
                                                                 src.coord[2] - cell.coord[2]}});
                        }
                    }
        }
    }

    if (!hasFarField()) return;
    if (!(leafInterval > 0.0)) {
        std::ostringstream msg;
        msg << "time step " << dt << " is too long for leaf cells of width " << 2.0 * levels_.back().halfWidth
            << "; raise the leaf capacity or shorten the time step";
        throw std::runtime_error(msg.str());
    }
    for (int l = 2; l <= depth; ++l) {
        const double margin = causalityMargin(l);
        if (!(margin > 0.0)) {
            std::ostringstream msg;
            msg << "causality check failed on level " << l << " (margin " << margin << "): mu = " << mu_
                << " intervals do not clear the largest interaction distance; increase mu or the leaf capacity, or shorten the time step";
            throw std::runtime_error(msg.str());
        }
    }
}

bool SpaceTimeTree::leavesAdjacent(int a, int b) const {
    const auto& cells = leaves();
    return chebyshev(cells[static_cast<std::size_t>(a)].coord, cells[static_cast<std::size_t>(b)].coord) <= 1;
}

int SpaceTimeTree::intervalOfStep(int level, int step) const {
    const double ratio = dt_ / this->level(level).intervalLength;
    return static_cast<int>(std::floor(step * ratio));
}

double SpaceTimeTree::targetCentre(int level, int k) const { return (k + 0.5) * this->level(level).intervalLength; }

bool SpaceTimeTree::hasFarField() const { return interactionCount() > 0; }

std::size_t SpaceTimeTree::interactionCount() const {
    std::size_t n = 0;
    for (const auto& lev : levels_)
        for (const auto& cell : lev.cells) n += cell.interactions.size();
    return n;
}

double SpaceTimeTree::causalityMargin(int l) const {
    const TreeLevel& lev = level(l);
    // t in target interval k + mu + 1, s in source interval k: t - s >= mu * 2 h_t + dt
    const double reach = c_ * (mu_ * lev.intervalLength + dt_);
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& cell : lev.cells)
        for (const auto& it : cell.interactions) {
            double r2 = 0.0;
            for (int k = 0; k < 3; ++k) {
                const double span = (std::abs(it.offset[static_cast<std::size_t>(k)]) + 1) * 2.0 * lev.halfWidth;
                r2 += span * span;
            }
            margin = std::min(margin, reach - std::sqrt(r2));
        }
    return margin;
}

SpaceTimeTree buildTree(const TriMesh& mesh, double c, double dt, const TreeOptions& options) {
    return SpaceTimeTree(mesh, c, dt, options);
}

}  // namespace tdbem
