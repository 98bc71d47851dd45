#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "tdbem/interp.hpp"
#include "tdbem/m2l.hpp"
#include "tdbem/marching.hpp"
#include "tdbem/tree.hpp"

namespace tdbem {

struct FmmOptions {
    int ps = 8;
    int pt = 8;
    int leafCapacity = 100;
    int mu = 8;
    M2LMode mode = M2LMode::Fft;
};

struct PhaseTimes {
    double assembly = 0.0;
    double p2m = 0.0;
    double m2m = 0.0;
    double m2lNear = 0.0;
    double m2lDistant = 0.0;
    double l2l = 0.0;
    double l2p = 0.0;
    double nearField = 0.0;
    double solve = 0.0;

    double total() const { return assembly + p2m + m2m + m2lNear + m2lDistant + l2l + l2p + nearField + solve; }
    bool operator==(const PhaseTimes&) const = default;
};

// Applies the 1D transfer matrices along x, y, z and time of a space-time node vector.
// up: parent += T child (moments); otherwise child += T^T parent (locals).
void transferMoment(const Eigen::MatrixXd& tx, const Eigen::MatrixXd& ty, const Eigen::MatrixXd& tz, const Eigen::MatrixXd& tt,
                    const Eigen::VectorXd& child, Eigen::VectorXd& parent);
void transferLocal(const Eigen::MatrixXd& tx, const Eigen::MatrixXd& ty, const Eigen::MatrixXd& tz, const Eigen::MatrixXd& tt,
                   const Eigen::VectorXd& parent, Eigen::VectorXd& child);

// Far-field part of the step right-hand side: contributions between elements whose leaves are not
// adjacent, evaluated with interpolated kernels on the space-time tree.
class FarField {
public:
    FarField(const ProblemSpec& spec, const SpaceTimeTree& tree, const FmmOptions& options);
    ~FarField();
    FarField(const FarField&) = delete;
    FarField& operator=(const FarField&) = delete;

    // Right-hand-side contribution at collocation step alpha. The history must be final for every
    // step below alpha - 1; calls must use non-decreasing alpha.
    Eigen::VectorXd evaluate(int alpha, const TimeHistory& history);

    // Moment of a leaf over leaf source interval k.
    Eigen::VectorXd p2m(int leaf, int k, const TimeHistory& history) const;
    // Evaluates a leaf local of target interval k at element i and step alpha.
    double l2p(int element, int alpha, const Eigen::VectorXd& local) const;

    const SpaceTimeTree& tree() const { return tree_; }
    const InterpScheme& spaceScheme() const { return space_; }
    const InterpScheme& timeScheme() const { return time_; }
    const PhaseTimes& times() const { return times_; }
    int firstLevel() const { return first_; }

private:
    struct LevelState;
    void closeLeafInterval(int k, const TimeHistory& history);
    void openLeafInterval(int k);
    void translate(int level, int k);
    double normalisedTime(int level, int k, double t, bool source) const;

    const ProblemSpec& spec_;
    const SpaceTimeTree& tree_;
    FmmOptions opt_;
    InterpScheme space_, time_;
    int first_ = 2;
    int leafInterval_ = 0;
    std::vector<Eigen::MatrixXd> sourceA_, sourceB_;  // per leaf: ps^3 x elements
    std::vector<Eigen::VectorXd> targetW_, targetD_;  // per element: l_a and n . grad l_a
    std::array<Eigen::MatrixXd, 2> childSpace_, childTime_;
    std::vector<std::unique_ptr<LevelState>> levels_;
    PhaseTimes times_;
};

struct FastStats {
    int depth = 0;
    std::size_t leaves = 0;
    std::size_t interactions = 0;
    std::size_t nearEntries = 0;
};

TimeHistory fastMarch(const ProblemSpec& spec, const FmmOptions& options, const MarchOptions& marchOptions = {},
                      PhaseTimes* times = nullptr, FastStats* stats = nullptr);

}  // namespace tdbem
