#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tdbem/incident.hpp"
#include "tdbem/mesh.hpp"
#include "tdbem/tbasis.hpp"

namespace tdbem {

enum class Bie { Obie, Bmbie };

// Which boundary value is prescribed on an element.
enum class Boundary { Dirichlet, Neumann };

struct ProblemSpec {
    const TriMesh* mesh = nullptr;
    std::vector<Boundary> boundary;  // per element
    Bie bie = Bie::Obie;
    BSplineBasis basis;
    double c = 1.0;
    int nt = 2;
    PlanePulse incident;
    double blowUpFactor = 1e6;
    int threads = 1;
};

void validate(const ProblemSpec& spec);

int computeGammaStar(const MeshStats& stats, const BSplineBasis& basis, double c);

// Retarded coefficients stored per element pair as one contiguous run of lags. A pair's run
// starts at the first lag the wavefront reaches the element and stops at the pair's own
// history horizon, past which the spline-weighted coefficients vanish identically.
class RetardedMatrixSet {
public:
    struct Run {
        int col = 0;
        int first = 0;   // first stored lag
        int horizon = 0; // last stored lag
        std::size_t offset = 0;
    };

    RetardedMatrixSet() = default;

    int rows() const { return static_cast<int>(rowRuns_.size()); }
    int gammaStar() const { return gammaStar_; }
    int order() const { return d_; }
    Bie bie() const { return bie_; }

    const std::vector<Run>& runs(int i) const { return rowRuns_[static_cast<std::size_t>(i)]; }
    const double* single(const Run& r) const { return single_.data() + r.offset; }
    const double* dbl(const Run& r) const { return double_.data() + r.offset; }

    // Coefficient of the single/double layer (or their Burton-Miller images) at lag gamma.
    double coeffU(int gamma, int i, int j) const;
    double coeffW(int gamma, int i, int j) const;

    Eigen::SparseMatrix<double> matrixU(int gamma) const;
    Eigen::SparseMatrix<double> matrixW(int gamma) const;

    std::size_t storedEntries() const { return single_.size(); }
    std::size_t bytes() const;

private:
    friend RetardedMatrixSet assembleRetarded(const ProblemSpec&, const std::function<bool(int, int)>&, int);
    const Run* find(int i, int j) const;

    int gammaStar_ = 0;
    int d_ = 1;
    Bie bie_ = Bie::Obie;
    std::vector<std::vector<Run>> rowRuns_;
    std::vector<double> single_, double_;
};

// pairFilter restricts the stored pairs; horizonOverride > 0 stores every pair up to that lag
// (used to check that the history truncation is exact).
RetardedMatrixSet assembleRetarded(const ProblemSpec& spec, const std::function<bool(int, int)>& pairFilter = {},
                                   int horizonOverride = 0);

// Boundary coefficients u^beta, q^beta for every element; rows are steps, columns elements.
struct TimeHistory {
    Eigen::MatrixXd u, q;
    Eigen::MatrixXd tau, sigma;  // full kappa sums of q and u for solved steps
    int solvedSteps = 0;  // number of beta indices filled
    bool unstable = false;
    std::string status = "stable";

    // Field value at t_alpha, i.e. sum_beta N^beta(t_alpha) coefficient^beta.
    double valueAt(const Eigen::MatrixXd& coeffs, const BSplineBasis& basis, int alpha, int element) const;
};

// Prescribed boundary data: -u_in (Dirichlet) or -du_in/dn (Neumann) in spline coefficients.
Eigen::MatrixXd knownData(const ProblemSpec& spec);

// Refreshes tau/sigma at step beta once u^beta and q^beta are final.
void updateKappaSums(TimeHistory& h, const std::vector<double>& w, int beta);

// Kappa-summed history sum_{k=0}^{K} w^k v^{beta-k} (negative steps are zero); the k=0 term is skipped on request.
double kappaSum(const Eigen::MatrixXd& v, const std::vector<double>& w, int beta, int j, int kMax, bool skipCurrent = false);

class StepSystem {
public:
    StepSystem(const RetardedMatrixSet& matrices, const std::vector<Boundary>& boundary, double w0);
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    const Eigen::SparseMatrix<double>& matrix() const { return a_; }

private:
    Eigen::SparseMatrix<double> a_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

// Right-hand side of the step system at collocation step alpha from the kappa-summed histories.
// history must hold final u/q for steps < alpha-1 and the prescribed values at alpha-1.
Eigen::VectorXd stepRhs(const RetardedMatrixSet& m, const TimeHistory& h, const std::vector<Boundary>& boundary,
                        const std::vector<double>& w, int alpha, int threads = 1);

// Same quantity from the unsimplified double sum over source steps and spline pieces.
// Needs matrices stored at least up to lag alpha + d + 1; used as a reference only.
Eigen::VectorXd rawRhs(const RetardedMatrixSet& m, const TimeHistory& h, const std::vector<Boundary>& boundary,
                       const std::vector<double>& w, int alpha);

struct MarchOptions {
    // Called after every solved step with (alpha, history).
    std::function<void(int, const TimeHistory&)> onStep;
};

TimeHistory march(const ProblemSpec& spec, const MarchOptions& options = {});
TimeHistory march(const ProblemSpec& spec, const RetardedMatrixSet& matrices, const MarchOptions& options = {});

struct StepTimings {
    double rhs = 0.0;    // seconds spent on the stored-matrix right-hand side
    double solve = 0.0;  // seconds spent in the step solve
};

// Per-step driver shared with the fast solver: owns the history and the step factorisation.
class Marcher {
public:
    Marcher(const ProblemSpec& spec, const RetardedMatrixSet& nearMatrices);

    int steps() const { return spec_.nt; }
    const TimeHistory& history() const { return hist_; }
    const std::vector<double>& weights() const { return w_; }
    const StepTimings& timings() const { return times_; }

    // Solves for x^{alpha-1} given extra right-hand-side contributions (e.g. a far field).
    // Returns false once the blow-up detector fires.
    bool advance(int alpha, const Eigen::VectorXd* extraRhs = nullptr);

private:
    const ProblemSpec& spec_;
    const RetardedMatrixSet& m_;
    std::vector<double> w_;
    Eigen::MatrixXd known_;
    StepSystem system_;
    TimeHistory hist_;
    StepTimings times_;
};

}  // namespace tdbem
