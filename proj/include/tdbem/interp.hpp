#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tdbem {

// Piecewise-cubic Hermite interpolation on p uniform nodes in [-1, 1]. Nodal derivatives are
// second-order finite differences of the nodal values (central inside, one-sided at the ends),
// so the interpolant is linear in the values and reproduces quadratics exactly. Arguments
// outside [-1, 1] extrapolate the end piece.
class InterpScheme {
public:
    explicit InterpScheme(int p);

    int size() const { return p_; }
    const std::vector<double>& nodes() const { return nodes_; }
    double spacing() const { return h_; }

    // out[a] = l_a(xi); out.size() == size()
    void weights(double xi, std::span<double> out) const;
    // out[a] = l_a'(xi)
    void derivWeights(double xi, std::span<double> out) const;

    double cardinal(int a, double xi) const;
    double cardinalDeriv(int a, double xi) const;
    double interpolate(std::span<const double> values, double xi) const;

    // T(a, b) = l_a(offset + scale * omega_b): values of the cardinals at the nodes of an
    // embedded sub-interval. Used for hierarchy transfers.
    Eigen::MatrixXd transfer(double offset, double scale) const;

private:
    void eval(double xi, std::span<double> out, bool derivative) const;

    int p_;
    double h_;
    std::vector<double> nodes_;
    Eigen::MatrixXd fd_;  // nodal derivative = fd_ * values
};

InterpScheme makeInterp(int p);

}  // namespace tdbem
