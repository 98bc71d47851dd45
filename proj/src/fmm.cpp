#include "tdbem/fmm.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tdbem/elemint.hpp"

namespace tdbem {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// out = T applied along one axis of a column-major (ps, ps, ps, pt) array
Eigen::VectorXd alongAxis(const Eigen::MatrixXd& t, const Eigen::VectorXd& v, int axis, const std::array<int, 4>& dims) {
    int inner = 1;
    for (int k = 0; k < axis; ++k) inner *= dims[static_cast<std::size_t>(k)];
    const int n = dims[static_cast<std::size_t>(axis)];
    const int outer = static_cast<int>(v.size()) / (inner * n);
    Eigen::VectorXd out(v.size());
    for (int o = 0; o < outer; ++o) {
        const Eigen::Map<const Eigen::MatrixXd> in(v.data() + static_cast<Eigen::Index>(o) * n * inner, inner, n);
        Eigen::Map<Eigen::MatrixXd> res(out.data() + static_cast<Eigen::Index>(o) * n * inner, inner, n);
        res.noalias() = in * t.transpose();
    }
    return out;
}

Eigen::VectorXd tensorApply(const Eigen::MatrixXd& tx, const Eigen::MatrixXd& ty, const Eigen::MatrixXd& tz, const Eigen::MatrixXd& tt,
                            const Eigen::VectorXd& v) {
    const auto ps = static_cast<int>(tx.rows());
    const std::array<int, 4> dims{ps, ps, ps, static_cast<int>(tt.rows())};
    Eigen::VectorXd r = alongAxis(tx, v, 0, dims);
    r = alongAxis(ty, r, 1, dims);
    r = alongAxis(tz, r, 2, dims);
    return alongAxis(tt, r, 3, dims);
}

// Degree-5 seven-point rule on the reference triangle: barycentric points and weights summing to one.
struct TriPoint {
    double l0, l1, l2, w;
};
constexpr double kA1 = 0.059715871789770, kB1 = 0.470142064105115, kW1 = 0.132394152788506;
constexpr double kA2 = 0.797426985353087, kB2 = 0.101286507323456, kW2 = 0.125939180544827;
constexpr std::array<TriPoint, 7> kTriRule{{{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
                                            {kA1, kB1, kB1, kW1},
                                            {kB1, kA1, kB1, kW1},
                                            {kB1, kB1, kA1, kW1},
                                            {kA2, kB2, kB2, kW2},
                                            {kB2, kA2, kB2, kW2},
                                            {kB2, kB2, kA2, kW2}}};

// Spatial cardinals l_a(xi) and their directional derivative along dir, for one point.
void spatialWeights(const InterpScheme& s, const Vec3& xi, const Vec3& dir, double invH, Eigen::Ref<Eigen::VectorXd> val,
                    Eigen::Ref<Eigen::VectorXd> der) {
    const int p = s.size();
    std::array<std::vector<double>, 3> w, dw;
    for (int k = 0; k < 3; ++k) {
        w[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(p));
        dw[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(p));
        s.weights(xi[k], w[static_cast<std::size_t>(k)]);
        s.derivWeights(xi[k], dw[static_cast<std::size_t>(k)]);
    }
    for (int a2 = 0; a2 < p; ++a2)
        for (int a1 = 0; a1 < p; ++a1)
            for (int a0 = 0; a0 < p; ++a0) {
                const auto i0 = static_cast<std::size_t>(a0), i1 = static_cast<std::size_t>(a1), i2 = static_cast<std::size_t>(a2);
                const int idx = a0 + p * (a1 + p * a2);
                val[idx] += w[0][i0] * w[1][i1] * w[2][i2];
                der[idx] += invH * (dir[0] * dw[0][i0] * w[1][i1] * w[2][i2] + dir[1] * w[0][i0] * dw[1][i1] * w[2][i2] +
                                    dir[2] * w[0][i0] * w[1][i1] * dw[2][i2]);
            }
}

}  // namespace

void transferMoment(const Eigen::MatrixXd& tx, const Eigen::MatrixXd& ty, const Eigen::MatrixXd& tz, const Eigen::MatrixXd& tt,
                    const Eigen::VectorXd& child, Eigen::VectorXd& parent) {
    parent += tensorApply(tx, ty, tz, tt, child);
}

void transferLocal(const Eigen::MatrixXd& tx, const Eigen::MatrixXd& ty, const Eigen::MatrixXd& tz, const Eigen::MatrixXd& tt,
                   const Eigen::VectorXd& parent, Eigen::VectorXd& child) {
    child += tensorApply(tx.transpose(), ty.transpose(), tz.transpose(), tt.transpose(), parent);
}

struct FarField::LevelState {
    std::unique_ptr<M2LLevelOperators> ops;
    std::vector<Eigen::VectorXd> moment;  // accumulating, current source interval
    std::vector<std::unique_ptr<LocalRecurrence>> recurrence;
    std::vector<Eigen::VectorXd> local;   // translated + inherited, current target interval
    int lastInterval = 0;                 // last target interval holding a step
};

FarField::FarField(const ProblemSpec& spec, const SpaceTimeTree& tree, const FmmOptions& options)
    : spec_(spec), tree_(tree), opt_(options), space_(options.ps), time_(options.pt) {
    validate(spec);
    const TriMesh& mesh = *spec.mesh;
    const int depth = tree.depth();
    const int s3 = opt_.ps * opt_.ps * opt_.ps;
    const int size = s3 * opt_.pt;
    const double norm = 1.0 / (4.0 * std::numbers::pi * std::pow(spec.c * spec.basis.dt, spec.basis.d));

    // per-element source and target weights at the leaf level
    const TreeLevel& leafLevel = tree.level(depth);
    const double hs = leafLevel.halfWidth;
    sourceA_.resize(leafLevel.cells.size());
    sourceB_.resize(leafLevel.cells.size());
    targetW_.assign(mesh.size(), Eigen::VectorXd::Zero(s3));
    targetD_.assign(mesh.size(), Eigen::VectorXd::Zero(s3));
    for (std::size_t c = 0; c < leafLevel.cells.size(); ++c) {
        const Cell& cell = leafLevel.cells[c];
        sourceA_[c] = Eigen::MatrixXd::Zero(s3, static_cast<Eigen::Index>(cell.elements.size()));
        sourceB_[c] = Eigen::MatrixXd::Zero(s3, static_cast<Eigen::Index>(cell.elements.size()));
        for (std::size_t e = 0; e < cell.elements.size(); ++e) {
            const auto j = static_cast<std::size_t>(cell.elements[e]);
            const Triangle tri = triangleOf(mesh, j);
            const Vec3& n = mesh.normal(j);
            for (const TriPoint& q : kTriRule) {
                const Vec3 y = q.l0 * tri.a + q.l1 * tri.b + q.l2 * tri.c;
                Eigen::VectorXd val = Eigen::VectorXd::Zero(s3), der = Eigen::VectorXd::Zero(s3);
                spatialWeights(space_, (y - cell.centre) / hs, n, 1.0 / hs, val, der);
                const double w = q.w * mesh.area(j) * norm;
                sourceA_[c].col(static_cast<Eigen::Index>(e)) += w * val;
                sourceB_[c].col(static_cast<Eigen::Index>(e)) += w * der;
            }
            spatialWeights(space_, (mesh.centroid(j) - cell.centre) / hs, mesh.normal(j), 1.0 / hs, targetW_[j], targetD_[j]);
        }
    }

    for (int bit = 0; bit < 2; ++bit) {
        childSpace_[static_cast<std::size_t>(bit)] = space_.transfer(bit == 0 ? -0.5 : 0.5, 0.5);
        childTime_[static_cast<std::size_t>(bit)] = time_.transfer(bit == 0 ? -0.5 : 0.5, 0.5);
    }

    // first level whose subtree carries interactions; coarser levels never hold data
    first_ = depth + 1;
    for (int l = 2; l <= depth; ++l) {
        bool any = false;
        for (const Cell& cell : tree.level(l).cells) any = any || !cell.interactions.empty();
        if (any) {
            first_ = l;
            break;
        }
    }
    const M2LConfig base{opt_.ps, opt_.pt, spec.basis.d, tree.mu(), spec.c, spec.basis.dt, opt_.mode};
    for (int l = first_; l <= depth; ++l) {
        const TreeLevel& lev = tree.level(l);
        auto st = std::make_unique<LevelState>();
        st->ops = std::make_unique<M2LLevelOperators>(base, lev.halfWidth, lev.intervalLength);
        st->moment.assign(lev.cells.size(), Eigen::VectorXd::Zero(size));
        st->local.assign(lev.cells.size(), Eigen::VectorXd::Zero(size));
        st->recurrence.resize(lev.cells.size());
        for (std::size_t c = 0; c < lev.cells.size(); ++c)
            if (!lev.cells[c].interactions.empty())
                st->recurrence[c] = std::make_unique<LocalRecurrence>(size, spec.basis.d, tree.mu(), st->ops->intervalSpan());
        st->lastInterval = tree.intervalOfStep(l, spec.nt - 1);
        levels_.push_back(std::move(st));
    }
}

FarField::~FarField() = default;

double FarField::normalisedTime(int level, int k, double t, bool source) const {
    const double centre = source ? tree_.sourceCentre(level, k) : tree_.targetCentre(level, k);
    return (t - centre) / (0.5 * tree_.level(level).intervalLength);
}

Eigen::VectorXd FarField::p2m(int leaf, int k, const TimeHistory& history) const {
    const int depth = tree_.depth();
    const int s3 = opt_.ps * opt_.ps * opt_.ps;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(s3 * opt_.pt);
    const Cell& cell = tree_.level(depth).cells[static_cast<std::size_t>(leaf)];
    const auto ne = static_cast<Eigen::Index>(cell.elements.size());
    Eigen::VectorXd tau(ne), sigma(ne);
    std::vector<double> wt(static_cast<std::size_t>(opt_.pt));
    const int start = std::max(0, static_cast<int>(std::floor(k * tree_.level(depth).intervalLength / spec_.basis.dt)) - 2);
    for (int n = start; n + 1 < spec_.nt && tree_.intervalOfStep(depth, n + 1) <= k; ++n) {
        if (tree_.intervalOfStep(depth, n + 1) != k) continue;
        if (n >= history.solvedSteps) throw std::logic_error("moment needs a step that is not solved yet");
        for (Eigen::Index e = 0; e < ne; ++e) {
            tau[e] = history.tau(n, cell.elements[static_cast<std::size_t>(e)]);
            sigma[e] = history.sigma(n, cell.elements[static_cast<std::size_t>(e)]);
        }
        const Eigen::VectorXd v = sourceA_[static_cast<std::size_t>(leaf)] * tau - sourceB_[static_cast<std::size_t>(leaf)] * sigma;
        time_.weights(normalisedTime(depth, k, n * spec_.basis.dt, true), wt);
        for (int t = 0; t < opt_.pt; ++t) m.segment(static_cast<Eigen::Index>(t) * s3, s3) += wt[static_cast<std::size_t>(t)] * v;
    }
    return m;
}

double FarField::l2p(int element, int alpha, const Eigen::VectorXd& local) const {
    const int depth = tree_.depth();
    const int k = tree_.intervalOfStep(depth, alpha);
    const double eta = normalisedTime(depth, k, alpha * spec_.basis.dt, false);
    const int s3 = opt_.ps * opt_.ps * opt_.ps;
    std::vector<double> wt(static_cast<std::size_t>(opt_.pt)), dwt(static_cast<std::size_t>(opt_.pt));
    time_.weights(eta, wt);
    const auto e = static_cast<std::size_t>(element);
    double v = 0.0;
    if (spec_.bie == Bie::Obie) {
        for (int m = 0; m < opt_.pt; ++m)
            v += wt[static_cast<std::size_t>(m)] * targetW_[e].dot(local.segment(static_cast<Eigen::Index>(m) * s3, s3));
        return v;
    }
    time_.derivWeights(eta, dwt);
    const double dtScale = kBurtonMillerTimeSign / (spec_.c * 0.5 * tree_.level(depth).intervalLength);
    for (int m = 0; m < opt_.pt; ++m) {
        const auto seg = local.segment(static_cast<Eigen::Index>(m) * s3, s3);
        v += wt[static_cast<std::size_t>(m)] * targetD_[e].dot(seg) + dtScale * dwt[static_cast<std::size_t>(m)] * targetW_[e].dot(seg);
    }
    return v;
}

void FarField::translate(int level, int k) {
    LevelState& st = *levels_[static_cast<std::size_t>(level - first_)];
    if (k + 1 > st.lastInterval) return;
    const auto& cells = tree_.level(level).cells;
    const M2LLevelOperators& ops = *st.ops;
    const int mu = tree_.mu();

    std::vector<M2LLevelOperators::Source> src(cells.size());
    std::vector<bool> active(cells.size(), false);
    auto t0 = Clock::now();
    for (std::size_t c = 0; c < cells.size(); ++c)
        if (st.moment[c].cwiseAbs().maxCoeff() > 0.0) {
            active[c] = true;
            src[c] = ops.prepare(st.moment[c]);
        }
    times_.m2lNear += since(t0);

    const int nearLast = std::min(mu + 1, st.lastInterval - k);  // lags beyond the run are never read
    const bool distant = k + mu + 2 <= st.lastInterval;
    std::vector<std::size_t> targets;
    std::vector<std::vector<M2LLevelOperators::Term>> terms;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (!st.recurrence[c]) continue;
        targets.push_back(c);
        auto& list = terms.emplace_back();
        for (const auto& it : cells[c].interactions)
            if (active[static_cast<std::size_t>(it.source)]) list.push_back({&src[static_cast<std::size_t>(it.source)], it.offset});
    }
    std::vector<std::vector<Eigen::VectorXd>> slots, distantSlots;
    t0 = Clock::now();
    ops.applyMany(terms, 0, nearLast, slots);
    times_.m2lNear += since(t0);
    t0 = Clock::now();
    if (distant) ops.applyMany(terms, mu + 1, ops.slots(), distantSlots);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        auto& s = slots[i];
        for (int j = nearLast; j < ops.slots(); ++j) {
            auto& v = s[static_cast<std::size_t>(j)];
            if (distant && j > mu) v = std::move(distantSlots[i][static_cast<std::size_t>(j)]);
            else v = Eigen::VectorXd::Zero(ops.size());
        }
        st.recurrence[targets[i]]->push(k, s);
    }
    times_.m2lDistant += since(t0);
}

void FarField::closeLeafInterval(int k, const TimeHistory& history) {
    const int depth = tree_.depth();
    LevelState& leafState = *levels_.back();
    auto t0 = Clock::now();
    for (std::size_t c = 0; c < leafState.moment.size(); ++c) leafState.moment[c] = p2m(static_cast<int>(c), k, history);
    times_.p2m += since(t0);

    for (int l = depth; l >= first_; --l) {
        const int shift = depth - l;
        if (((k + 1) % (1 << shift)) != 0) break;
        const int kl = k >> shift;
        translate(l, kl);
        LevelState& st = *levels_[static_cast<std::size_t>(l - first_)];
        if (l > first_) {
            t0 = Clock::now();
            LevelState& up = *levels_[static_cast<std::size_t>(l - 1 - first_)];
            const auto& cells = tree_.level(l).cells;
            const auto& parents = tree_.level(l - 1).cells;
            for (std::size_t c = 0; c < cells.size(); ++c) {
                const Cell& cell = cells[c];
                const Cell& parent = parents[static_cast<std::size_t>(cell.parent)];
                const auto bit = [&](int ax) {
                    return static_cast<std::size_t>(cell.coord[static_cast<std::size_t>(ax)] - 2 * parent.coord[static_cast<std::size_t>(ax)]);
                };
                transferMoment(childSpace_[bit(0)], childSpace_[bit(1)], childSpace_[bit(2)], childTime_[static_cast<std::size_t>(kl % 2)],
                               st.moment[c], up.moment[static_cast<std::size_t>(cell.parent)]);
            }
            times_.m2m += since(t0);
        }
        for (auto& m : st.moment) m.setZero();
    }
}

void FarField::openLeafInterval(int k) {
    const int depth = tree_.depth();
    for (int l = first_; l <= depth; ++l) {
        const int shift = depth - l;
        if ((k % (1 << shift)) != 0) continue;
        const int kl = k >> shift;
        LevelState& st = *levels_[static_cast<std::size_t>(l - first_)];
        const auto& cells = tree_.level(l).cells;
        const auto t0 = Clock::now();
        for (std::size_t c = 0; c < cells.size(); ++c) {
            Eigen::VectorXd& loc = st.local[c];
            if (st.recurrence[c])
                loc = st.recurrence[c]->local(kl);
            else
                loc.setZero();
            if (l > first_) {
                const Cell& cell = cells[c];
                const Cell& parent = tree_.level(l - 1).cells[static_cast<std::size_t>(cell.parent)];
                const auto bit = [&](int ax) {
                    return static_cast<std::size_t>(cell.coord[static_cast<std::size_t>(ax)] - 2 * parent.coord[static_cast<std::size_t>(ax)]);
                };
                const LevelState& up = *levels_[static_cast<std::size_t>(l - 1 - first_)];
                transferLocal(childSpace_[bit(0)], childSpace_[bit(1)], childSpace_[bit(2)], childTime_[static_cast<std::size_t>(kl % 2)],
                              up.local[static_cast<std::size_t>(cell.parent)], loc);
            }
        }
        times_.l2l += since(t0);
    }
}

Eigen::VectorXd FarField::evaluate(int alpha, const TimeHistory& history) {
    const int depth = tree_.depth();
    const auto ns = static_cast<Eigen::Index>(spec_.mesh->size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(ns);
    if (levels_.empty()) return out;
    const int k = tree_.intervalOfStep(depth, alpha);
    if (k < leafInterval_) throw std::logic_error("far field must be evaluated with non-decreasing steps");
    while (leafInterval_ < k) {
        closeLeafInterval(leafInterval_, history);
        openLeafInterval(++leafInterval_);
    }
    const auto t0 = Clock::now();
    const LevelState& leaf = *levels_.back();
    for (Eigen::Index i = 0; i < ns; ++i) {
        const auto& loc = leaf.local[static_cast<std::size_t>(tree_.leafOf(static_cast<int>(i)))];
        out[i] = l2p(static_cast<int>(i), alpha, loc);
    }
    times_.l2p += since(t0);
    return out;
}

TimeHistory fastMarch(const ProblemSpec& spec, const FmmOptions& options, const MarchOptions& marchOptions, PhaseTimes* times,
                      FastStats* stats) {
    validate(spec);
    if (options.ps < 4 || options.pt < 4) throw std::invalid_argument("fast solver needs ps, pt >= 4");
    const auto t0 = Clock::now();
    const SpaceTimeTree tree(*spec.mesh, spec.c, spec.basis.dt, TreeOptions{options.leafCapacity, options.mu});
    const RetardedMatrixSet near = assembleRetarded(spec, [&](int i, int j) { return tree.elementsNear(i, j); });
    Marcher marcher(spec, near);
    std::unique_ptr<FarField> far;
    if (tree.hasFarField()) far = std::make_unique<FarField>(spec, tree, options);
    const double assembly = since(t0);

    for (int alpha = 1; alpha < spec.nt; ++alpha) {
        bool ok;
        if (far) {
            const Eigen::VectorXd b = far->evaluate(alpha, marcher.history());
            ok = marcher.advance(alpha, &b);
        } else {
            ok = marcher.advance(alpha);
        }
        if (marchOptions.onStep) marchOptions.onStep(alpha, marcher.history());
        if (!ok) break;
    }

    if (times != nullptr) {
        *times = far ? far->times() : PhaseTimes{};
        times->assembly = assembly;
        times->nearField = marcher.timings().rhs;
        times->solve = marcher.timings().solve;
    }
    if (stats != nullptr) {
        stats->depth = tree.depth();
        stats->leaves = tree.leaves().size();
        stats->interactions = tree.interactionCount();
        stats->nearEntries = near.storedEntries();
    }
    return marcher.history();
}

}  // namespace tdbem
