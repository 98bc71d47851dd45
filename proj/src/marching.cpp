#include "tdbem/marching.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "tdbem/elemint.hpp"
#include "tdbem/parallel.hpp"

namespace tdbem {

namespace {

bool unknownIsU(Boundary b) { return b == Boundary::Neumann; }

}  // namespace

void validate(const ProblemSpec& spec) {
    if (spec.mesh == nullptr || spec.mesh->size() == 0) throw std::invalid_argument("problem has no mesh");
    if (spec.boundary.size() != spec.mesh->size()) throw std::invalid_argument("boundary flags do not match the element count");
    if (spec.nt < 1) throw std::invalid_argument("number of time steps must be positive");
    if (!(spec.c > 0.0)) throw std::invalid_argument("wave speed must be positive");
    if (spec.basis.d < 1 || spec.basis.d > 3) throw std::invalid_argument("basis order must be 1, 2 or 3");
}

int computeGammaStar(const MeshStats& stats, const BSplineBasis& basis, double c) {
    return static_cast<int>(std::ceil(stats.maxDiameter / (c * basis.dt))) + basis.d + 1;
}

const RetardedMatrixSet::Run* RetardedMatrixSet::find(int i, int j) const {
    const auto& rr = runs(i);
    const auto it = std::lower_bound(rr.begin(), rr.end(), j, [](const Run& r, int col) { return r.col < col; });
    return (it != rr.end() && it->col == j) ? &*it : nullptr;
}

double RetardedMatrixSet::coeffU(int gamma, int i, int j) const {
    const Run* r = find(i, j);
    if (r == nullptr || gamma < r->first || gamma > r->horizon) return 0.0;
    return single_[r->offset + static_cast<std::size_t>(gamma - r->first)];
}

double RetardedMatrixSet::coeffW(int gamma, int i, int j) const {
    const Run* r = find(i, j);
    if (r == nullptr || gamma < r->first || gamma > r->horizon) return 0.0;
    return double_[r->offset + static_cast<std::size_t>(gamma - r->first)];
}

namespace {

Eigen::SparseMatrix<double> lagMatrix(const RetardedMatrixSet& m, int gamma, bool singleLayer) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m.rows(); ++i)
        for (const auto& r : m.runs(i)) {
            if (gamma < r.first || gamma > r.horizon) continue;
            const double* v = singleLayer ? m.single(r) : m.dbl(r);
            trip.emplace_back(i, r.col, v[gamma - r.first]);
        }
    Eigen::SparseMatrix<double> out(m.rows(), m.rows());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}  // namespace

Eigen::SparseMatrix<double> RetardedMatrixSet::matrixU(int gamma) const { return lagMatrix(*this, gamma, true); }
Eigen::SparseMatrix<double> RetardedMatrixSet::matrixW(int gamma) const { return lagMatrix(*this, gamma, false); }

std::size_t RetardedMatrixSet::bytes() const {
    std::size_t runsCount = 0;
    for (const auto& r : rowRuns_) runsCount += r.size();
    return (single_.size() + double_.size()) * sizeof(double) + runsCount * sizeof(Run);
}

RetardedMatrixSet assembleRetarded(const ProblemSpec& spec, const std::function<bool(int, int)>& pairFilter, int horizonOverride) {
    validate(spec);
    const TriMesh& mesh = *spec.mesh;
    const int ns = static_cast<int>(mesh.size());
    const double step = spec.c * spec.basis.dt;
    const KernelParams params{spec.c, spec.basis.d, spec.basis.dt};
    const bool bm = spec.bie == Bie::Bmbie;

    std::vector<Triangle> tris(static_cast<std::size_t>(ns));
    for (int j = 0; j < ns; ++j) tris[static_cast<std::size_t>(j)] = triangleOf(mesh, static_cast<std::size_t>(j));

    struct RowData {
        std::vector<RetardedMatrixSet::Run> runs;
        std::vector<double> a, b;
    };
    std::vector<RowData> rows(static_cast<std::size_t>(ns));
    parallelFor(ns, spec.threads, [&](int i) {
        RowData& row = rows[static_cast<std::size_t>(i)];
        const Vec3& xi = mesh.centroid(static_cast<std::size_t>(i));
        const Vec3& ni = mesh.normal(static_cast<std::size_t>(i));
        for (int j = 0; j < ns; ++j) {
            if (pairFilter && !pairFilter(i, j)) continue;
            const ElementIntegrator integ(xi, ni, tris[static_cast<std::size_t>(j)], params);
            const int first = static_cast<int>(std::floor(integ.minDistance() / step)) + 1;
            const int horizon = horizonOverride > 0 ? horizonOverride
                                                    : static_cast<int>(std::ceil(integ.maxDistance() / step)) + spec.basis.d + 1;
            if (first > horizon) continue;
            row.runs.push_back({j, first, horizon, row.a.size()});
            for (int g = first; g <= horizon; ++g) {
                const ElemCoeffs k = integ(g);
                row.a.push_back(bm ? k.bmU : k.u);
                row.b.push_back(bm ? k.bmW : k.w);
            }
        }
    });

    RetardedMatrixSet out;
    out.d_ = spec.basis.d;
    out.bie_ = spec.bie;
    out.gammaStar_ = horizonOverride > 0 ? horizonOverride : computeGammaStar(meshStats(mesh), spec.basis, spec.c);
    std::size_t total = 0;
    for (const auto& r : rows) total += r.a.size();
    out.single_.reserve(total);
    out.double_.reserve(total);
    out.rowRuns_.resize(static_cast<std::size_t>(ns));
    for (int i = 0; i < ns; ++i) {
        RowData& row = rows[static_cast<std::size_t>(i)];
        const std::size_t base = out.single_.size();
        for (auto r : row.runs) {
            r.offset += base;
            out.rowRuns_[static_cast<std::size_t>(i)].push_back(r);
        }
        out.single_.insert(out.single_.end(), row.a.begin(), row.a.end());
        out.double_.insert(out.double_.end(), row.b.begin(), row.b.end());
        row = {};
    }
    return out;
}

double TimeHistory::valueAt(const Eigen::MatrixXd& coeffs, const BSplineBasis& basis, int alpha, int element) const {
    double sum = 0.0;
    const double t = basis.knot(alpha);
    for (int beta = std::max(0, alpha - basis.d - 1); beta < alpha && beta < coeffs.rows(); ++beta)
        sum += evalBasis(basis, beta, t) * coeffs(beta, element);
    return sum;
}

Eigen::MatrixXd knownData(const ProblemSpec& spec) {
    const TriMesh& mesh = *spec.mesh;
    const int ns = static_cast<int>(mesh.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec.nt, ns);
    for (int j = 0; j < ns; ++j) {
        const Vec3& x = mesh.centroid(static_cast<std::size_t>(j));
        const Vec3& n = mesh.normal(static_cast<std::size_t>(j));
        const bool dirichlet = spec.boundary[static_cast<std::size_t>(j)] == Boundary::Dirichlet;
        auto f = [&](double t) {
            const IncidentSample s = incident(x, t, spec.incident);
            return dirichlet ? -s.value : -s.gradient.dot(n);
        };
        for (int beta = 0; beta < spec.nt; ++beta) out(beta, j) = splineCoefficient(f, spec.basis, beta);
    }
    return out;
}

double kappaSum(const Eigen::MatrixXd& v, const std::vector<double>& w, int beta, int j, int kMax, bool skipCurrent) {
    double sum = 0.0;
    for (int k = skipCurrent ? 1 : 0; k <= kMax && beta - k >= 0; ++k) sum += w[static_cast<std::size_t>(k)] * v(beta - k, j);
    return sum;
}

void updateKappaSums(TimeHistory& h, const std::vector<double>& w, int beta) {
    const int kMax = static_cast<int>(w.size()) - 1;
    for (int j = 0; j < h.u.cols(); ++j) {
        h.tau(beta, j) = kappaSum(h.q, w, beta, j, kMax);
        h.sigma(beta, j) = kappaSum(h.u, w, beta, j, kMax);
    }
}

StepSystem::StepSystem(const RetardedMatrixSet& m, const std::vector<Boundary>& boundary, double w0) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m.rows(); ++i)
        for (const auto& r : m.runs(i)) {
            if (r.first != 1) continue;
            const bool uUnknown = unknownIsU(boundary[static_cast<std::size_t>(r.col)]);
            const double v = uUnknown ? m.dbl(r)[0] : -m.single(r)[0];
            trip.emplace_back(i, r.col, w0 * v);
        }
    a_.resize(m.rows(), m.rows());
    a_.setFromTriplets(trip.begin(), trip.end());
    a_.makeCompressed();
    lu_.compute(a_);
    if (lu_.info() != Eigen::Success) throw std::runtime_error("step matrix is singular");
}

Eigen::VectorXd StepSystem::solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = lu_.solve(b);
    const double bn = b.norm();
    if (lu_.info() != Eigen::Success || !x.allFinite()) throw std::runtime_error("step solve failed");
    if (bn > 0.0 && (a_ * x - b).norm() > 1e-10 * bn) throw std::runtime_error("step solve residual above tolerance");
    return x;
}

Eigen::VectorXd stepRhs(const RetardedMatrixSet& m, const TimeHistory& h, const std::vector<Boundary>& boundary,
                        const std::vector<double>& w, int alpha, int threads) {
    const int d1 = static_cast<int>(w.size()) - 1;  // d + 1
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m.rows());
    parallelFor(m.rows(), threads, [&](int i) {
        double acc = 0.0;
        for (const auto& r : m.runs(i)) {
            const int j = r.col;
            const double* uc = m.single(r);
            const double* wc = m.dbl(r);
            const int last = std::min(r.horizon, alpha);
            const bool uUnknown = unknownIsU(boundary[static_cast<std::size_t>(j)]);
            for (int g = r.first; g <= last; ++g) {
                const int beta = alpha - g;
                const int kMax = std::min(d1, r.horizon - g);
                double tau, sigma;
                if (g == 1) {
                    tau = kappaSum(h.q, w, beta, j, kMax, !uUnknown);
                    sigma = kappaSum(h.u, w, beta, j, kMax, uUnknown);
                } else if (kMax == d1) {
                    tau = h.tau(beta, j);
                    sigma = h.sigma(beta, j);
                } else {
                    tau = kappaSum(h.q, w, beta, j, kMax);
                    sigma = kappaSum(h.u, w, beta, j, kMax);
                }
                acc += uc[g - r.first] * tau - wc[g - r.first] * sigma;
            }
        }
        b[i] = acc;
    });
    return b;
}

Eigen::VectorXd rawRhs(const RetardedMatrixSet& m, const TimeHistory& h, const std::vector<Boundary>& boundary,
                       const std::vector<double>& w, int alpha) {
    const int d1 = static_cast<int>(w.size()) - 1;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m.rows());
    // extended precision: the spline weights cancel across lags, and this is the reference form
    for (int i = 0; i < m.rows(); ++i) {
        long double acc = 0.0L;
        for (int j = 0; j < m.rows(); ++j) {
            const bool uUnknown = unknownIsU(boundary[static_cast<std::size_t>(j)]);
            for (int beta = 0; beta <= alpha - 1; ++beta) {
                const bool current = beta == alpha - 1;
                const long double qv = (current && !uUnknown) ? 0.0 : h.q(beta, j);
                const long double uv = (current && uUnknown) ? 0.0 : h.u(beta, j);
                for (int k = 0; k <= d1; ++k) {
                    const int g = alpha - beta - k;
                    if (g < 1) continue;
                    acc += static_cast<long double>(w[static_cast<std::size_t>(k)]) * (m.coeffU(g, i, j) * qv - m.coeffW(g, i, j) * uv);
                }
            }
        }
        b[i] = static_cast<double>(acc);
    }
    return b;
}

Marcher::Marcher(const ProblemSpec& spec, const RetardedMatrixSet& nearMatrices)
    : spec_(spec), m_(nearMatrices), w_(tdbem::weights(spec.basis.d)), known_(knownData(spec)), system_(nearMatrices, spec.boundary, w_[0]) {
    const auto ns = static_cast<Eigen::Index>(spec.mesh->size());
    hist_.u = Eigen::MatrixXd::Zero(spec.nt, ns);
    hist_.q = Eigen::MatrixXd::Zero(spec.nt, ns);
    hist_.tau = Eigen::MatrixXd::Zero(spec.nt, ns);
    hist_.sigma = Eigen::MatrixXd::Zero(spec.nt, ns);
}

bool Marcher::advance(int alpha, const Eigen::VectorXd* extraRhs) {
    if (hist_.unstable) return false;
    const int beta = alpha - 1;
    const auto ns = hist_.u.cols();
    for (Eigen::Index j = 0; j < ns; ++j) {
        if (unknownIsU(spec_.boundary[static_cast<std::size_t>(j)]))
            hist_.q(beta, j) = known_(beta, j);
        else
            hist_.u(beta, j) = known_(beta, j);
    }
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    Eigen::VectorXd b = stepRhs(m_, hist_, spec_.boundary, w_, alpha, spec_.threads);
    if (extraRhs != nullptr) b += *extraRhs;
    const auto t1 = Clock::now();
    const Eigen::VectorXd x = system_.solve(b);
    times_.rhs += std::chrono::duration<double>(t1 - t0).count();
    times_.solve += std::chrono::duration<double>(Clock::now() - t1).count();
    for (Eigen::Index j = 0; j < ns; ++j) {
        if (unknownIsU(spec_.boundary[static_cast<std::size_t>(j)]))
            hist_.u(beta, j) = x[j];
        else
            hist_.q(beta, j) = x[j];
    }
    updateKappaSums(hist_, w_, beta);
    hist_.solvedSteps = alpha;
    const double limit = spec_.blowUpFactor * spec_.incident.amplitude;
    if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > limit) {
        hist_.unstable = true;
        hist_.status = "unstable";
        return false;
    }
    return true;
}

TimeHistory march(const ProblemSpec& spec, const RetardedMatrixSet& matrices, const MarchOptions& options) {
    validate(spec);
    Marcher marcher(spec, matrices);
    for (int alpha = 1; alpha < spec.nt; ++alpha) {
        const bool ok = marcher.advance(alpha);
        if (options.onStep) options.onStep(alpha, marcher.history());
        if (!ok) break;
    }
    return marcher.history();
}

TimeHistory march(const ProblemSpec& spec, const MarchOptions& options) {
    const RetardedMatrixSet m = assembleRetarded(spec);
    return march(spec, m, options);
}

}  // namespace tdbem
