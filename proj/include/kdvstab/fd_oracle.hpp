#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace kdvstab {

// Uniform grid on [0, L] with n_points interior nodes x_k = k h, k = 1..n_points.
struct Grid {
    double length = 0.0;
    int n_points = 0;

    double h() const { return length / (n_points + 1); }
    Eigen::VectorXd interior_nodes() const;
};

Grid make_grid(double length, int n_points);

enum class OperatorKind { a_coupled, b_scalar };

// Finite-difference operator restricted to the discrete boundary-condition
// subspace.  `matrix` acts on coordinates with respect to `basis`, whose
// columns are interior nodal vectors orthonormal in the trapezoid inner
// product; for a_coupled the coordinates are stacked (eta, w).
struct DiscreteOperator {
    Grid grid;
    OperatorKind kind = OperatorKind::b_scalar;
    Eigen::MatrixXd matrix;
    Eigen::SparseMatrix<double> basis;

    // Apply to interior nodal values (projecting onto the subspace first).
    Eigen::VectorXcd apply(const Eigen::VectorXcd& nodal) const;
    Eigen::VectorXcd to_coordinates(const Eigen::VectorXcd& nodal) const;
    Eigen::VectorXcd to_nodal(const Eigen::VectorXcd& coords) const;
};

// A(eta, w) = (-w' - w''', -eta' - eta'''), eta(0)=eta(L)=eta'(0)=0,
// w(0)=w(L)=w'(L)=0.
DiscreteOperator build_discrete_A(const Grid& grid);

// By = -y'''(L-x) - y'(L-x), y(0)=y(L)=y'(L)=0.
DiscreteOperator build_discrete_B_op(const Grid& grid);

struct DiscreteEigenpair {
    std::complex<double> value;
    Eigen::VectorXcd vector; // interior nodal values, unit discrete L2 norm
};

// `count` eigenpairs of smallest modulus, sorted by |value| ascending (for the
// coupled operator +i|mu| precedes -i|mu|).
std::vector<DiscreteEigenpair> discrete_eigs(const DiscreteOperator& op, int count);

// Eigenvalues only, real for b_scalar (imaginary parts for a_coupled), sorted
// by modulus.
Eigen::VectorXd discrete_eigenvalues(const DiscreteOperator& op);

// ||M -/+ M^T||_F / ||M||_F: symmetry defect of b_scalar, skew defect of a_coupled.
double structure_defect(const DiscreteOperator& op);

// Max |Re| (a_coupled) or max |Im| (b_scalar) of the full dense spectrum over
// the operator 2-norm.
double spectrum_defect(const DiscreteOperator& op);

// Relative discrete L2 residual of (op - value) applied to the sampled
// function(s), measured on interior rows whose centred stencils stay clear of
// the boundary closures.  For b_scalar pass y in `first`; for a_coupled pass
// (eta, w).  Values are on interior nodes.
double stencil_residual(const Grid& grid, OperatorKind kind, const Eigen::VectorXcd& first,
                        const Eigen::VectorXcd& second, std::complex<double> value);

// Residual of op applied to the sampled function, projected on the given
// resolved eigenvectors, relative to |value| * ||sample||.
double weak_residual(const DiscreteOperator& op, const std::vector<DiscreteEigenpair>& eigs,
                     const Eigen::VectorXcd& nodal, std::complex<double> value);

// Second-order one-sided slopes of a function vanishing at both ends.
std::complex<double> left_slope(const Eigen::VectorXcd& interior, double h);
std::complex<double> right_slope(const Eigen::VectorXcd& interior, double h);

} // namespace kdvstab
