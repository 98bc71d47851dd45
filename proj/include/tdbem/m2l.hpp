#pragma once

#include <array>
#include <complex>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tdbem {

using CellOffset = std::array<int, 3>;

// c_m^p(k) = C(p,m) ((k-1)^{p-m} - 2 k^{p-m} + (k+1)^{p-m}) (-1)^m
double recurrenceCoeff(int p, int m, long long k);

enum class M2LMode { Dense, Fft };

struct M2LConfig {
    int ps = 8;
    int pt = 8;
    int d = 1;
    int mu = 8;
    double c = 1.0;
    double dt = 1.0;
    M2LMode mode = M2LMode::Fft;
};

// Translation operators of one tree level. Slot l - 1 (l = 1..mu+1) holds U at interval lag l,
// slot mu + p (p = 1..d) holds the p-th Taylor coefficient U^(p) at lag mu + 1. Vectors are
// indexed a1 + ps (a2 + ps (a3 + ps m)).
//
// Uniform nodes make every operator a 4D Toeplitz block, so the FFT mode applies them as
// zero-padded circular convolutions. Kernel spectra are kept only for the 16 offsets with
// sorted non-negative components; other offsets reuse them through a signed axis permutation
// of the frequency grid.
class M2LLevelOperators {
public:
    M2LLevelOperators(const M2LConfig& config, double halfWidth, double intervalLength);
    ~M2LLevelOperators();
    M2LLevelOperators(const M2LLevelOperators&) = delete;
    M2LLevelOperators& operator=(const M2LLevelOperators&) = delete;

    int slots() const { return cfg_.mu + 1 + cfg_.d; }
    int size() const { return cfg_.ps * cfg_.ps * cfg_.ps * cfg_.pt; }
    const M2LConfig& config() const { return cfg_; }
    double intervalSpan() const { return cfg_.c * intervalLength_; }  // T

    // Kernel between target node (a, m) and source node (b, n) for an interval lag and Taylor order.
    double kernel(int lag, int order, const CellOffset& offset, const std::array<int, 3>& a, const std::array<int, 3>& b, int m,
                  int n) const;
    Eigen::MatrixXd dense(int lag, int order, const CellOffset& offset) const;
    Eigen::MatrixXd denseSlot(int slot, const CellOffset& offset) const;

    // Transformed source moment, reusable across targets.
    struct Source {
        Eigen::VectorXd moment;
        std::vector<std::complex<double>> spectrum;
    };
    Source prepare(const Eigen::VectorXd& moment) const;

    struct Term {
        const Source* source;
        CellOffset offset;
    };
    // out[slot] = sum over terms of U_slot(offset) * moment, for slots in [first, last).
    void apply(const std::vector<Term>& terms, int first, int last, std::vector<Eigen::VectorXd>& out) const;
    // apply for many targets at once; out[t] receives target t. In FFT mode each kernel spectrum is
    // streamed once per batch of targets rather than once per term, which is what bounds the cost.
    void applyMany(std::span<const std::vector<Term>> targets, int first, int last,
                   std::vector<std::vector<Eigen::VectorXd>>& out) const;

private:
    struct Fft;
    const std::vector<std::complex<double>>& spectrum(int canonicalClass, int slot) const;
    int slotLag(int slot) const { return slot <= cfg_.mu ? slot + 1 : cfg_.mu + 1; }
    int slotOrder(int slot) const { return slot <= cfg_.mu ? 0 : slot - cfg_.mu; }

    M2LConfig cfg_;
    double halfWidth_, intervalLength_;
    std::unique_ptr<Fft> fft_;
    mutable std::map<std::pair<int, int>, std::vector<std::complex<double>>> spectra_;
    mutable std::map<std::tuple<int, int, int, int>, Eigen::MatrixXd> denseCache_;
};

// Local coefficients of one observation cell fed by per-interval translated moments, following the
// near-future update for lags 1..mu+1 and the recurrence for the distant future.
class LocalRecurrence {
public:
    LocalRecurrence(int size, int d, int mu, double intervalSpan);

    // Source interval k has closed; slots as produced by M2LLevelOperators::apply. k must increase by one.
    void push(int k, const std::vector<Eigen::VectorXd>& slots);
    // Translated part of the local of interval l; valid for l in (k, k + mu + 2] after push(k).
    const Eigen::VectorXd& local(int l) const;
    int lastPushed() const { return last_; }

private:
    Eigen::VectorXd& slot(int l) { return ring_[static_cast<std::size_t>(l % static_cast<int>(ring_.size()))]; }

    int d_, mu_;
    double span_;
    int last_ = -1;
    std::vector<Eigen::VectorXd> ring_;
    std::vector<Eigen::VectorXd> deriv_;            // L^(p), p = 1..d
    std::vector<std::vector<Eigen::VectorXd>> aux_;  // L^(p,m), p = 2..d, m = 0..p-2
    Eigen::VectorXd zero_;
};

}  // namespace tdbem
