#include "tdbem/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tdbem {

InterpScheme::InterpScheme(int p) : p_(p) {
    if (p < 4) throw std::invalid_argument("interpolation needs at least 4 nodes");
    h_ = 2.0 / (p - 1);
    nodes_.resize(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) nodes_[static_cast<std::size_t>(k)] = -1.0 + k * h_;
    nodes_.back() = 1.0;

    fd_ = Eigen::MatrixXd::Zero(p, p);
    const double inv = 1.0 / (2.0 * h_);
    fd_(0, 0) = -3.0 * inv;
    fd_(0, 1) = 4.0 * inv;
    fd_(0, 2) = -inv;
    for (int k = 1; k + 1 < p; ++k) {
        fd_(k, k - 1) = -inv;
        fd_(k, k + 1) = inv;
    }
    fd_(p - 1, p - 1) = 3.0 * inv;
    fd_(p - 1, p - 2) = -4.0 * inv;
    fd_(p - 1, p - 3) = inv;
}

void InterpScheme::eval(double xi, std::span<double> out, bool derivative) const {
    if (out.size() != static_cast<std::size_t>(p_)) throw std::invalid_argument("weight buffer has the wrong size");
    std::fill(out.begin(), out.end(), 0.0);
    const int k = std::clamp(static_cast<int>(std::floor((xi + 1.0) / h_)), 0, p_ - 2);
    const double u = (xi - nodes_[static_cast<std::size_t>(k)]) / h_;
    double h00, h10, h01, h11;
    if (!derivative) {
        h00 = (2.0 * u - 3.0) * u * u + 1.0;
        h10 = ((u - 2.0) * u + 1.0) * u;
        h01 = (3.0 - 2.0 * u) * u * u;
        h11 = (u - 1.0) * u * u;
    } else {
        // d/dxi = (1/h) d/du; the derivative terms already carry a factor h
        h00 = (6.0 * u - 6.0) * u / h_;
        h10 = (3.0 * u - 4.0) * u + 1.0;
        h01 = (6.0 - 6.0 * u) * u / h_;
        h11 = (3.0 * u - 2.0) * u;
        h10 /= h_;
        h11 /= h_;
    }
    out[static_cast<std::size_t>(k)] += h00;
    out[static_cast<std::size_t>(k + 1)] += h01;
    for (int j = 0; j < p_; ++j)
        out[static_cast<std::size_t>(j)] += h_ * (h10 * fd_(k, j) + h11 * fd_(k + 1, j));
}

void InterpScheme::weights(double xi, std::span<double> out) const { eval(xi, out, false); }
void InterpScheme::derivWeights(double xi, std::span<double> out) const { eval(xi, out, true); }

double InterpScheme::cardinal(int a, double xi) const {
    std::vector<double> w(static_cast<std::size_t>(p_));
    weights(xi, w);
    return w[static_cast<std::size_t>(a)];
}

double InterpScheme::cardinalDeriv(int a, double xi) const {
    std::vector<double> w(static_cast<std::size_t>(p_));
    derivWeights(xi, w);
    return w[static_cast<std::size_t>(a)];
}

double InterpScheme::interpolate(std::span<const double> values, double xi) const {
    std::vector<double> w(static_cast<std::size_t>(p_));
    weights(xi, w);
    double s = 0.0;
    for (int a = 0; a < p_; ++a) s += w[static_cast<std::size_t>(a)] * values[static_cast<std::size_t>(a)];
    return s;
}

Eigen::MatrixXd InterpScheme::transfer(double offset, double scale) const {
    Eigen::MatrixXd t(p_, p_);
    std::vector<double> w(static_cast<std::size_t>(p_));
    for (int b = 0; b < p_; ++b) {
        weights(offset + scale * nodes_[static_cast<std::size_t>(b)], w);
        for (int a = 0; a < p_; ++a) t(a, b) = w[static_cast<std::size_t>(a)];
    }
    return t;
}

InterpScheme makeInterp(int p) { return InterpScheme(p); }

}  // namespace tdbem
