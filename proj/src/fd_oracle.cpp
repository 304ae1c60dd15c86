#include "kdvstab/fd_oracle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "kdvstab/errors.hpp"

namespace kdvstab {

namespace {

using Sparse = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

// Full-grid operators on nodes 0..n-1 (n = n_points + 2).
struct FullGrid {
    Sparse d1, d2, mass;
};

FullGrid full_operators(const Grid& grid)
{
    const int n = grid.n_points + 2;
    const double h = grid.h();
    Triplets t1, t2, tm;
    for (int k = 1; k < n - 1; ++k) {
        t1.emplace_back(k, k - 1, -0.5 / h);
        t1.emplace_back(k, k + 1, 0.5 / h);
        t2.emplace_back(k, k - 1, 1.0 / (h * h));
        t2.emplace_back(k, k, -2.0 / (h * h));
        t2.emplace_back(k, k + 1, 1.0 / (h * h));
    }
    // one-sided first derivative closures, second derivative closures copy
    // the adjacent interior row
    t1.emplace_back(0, 0, -1.5 / h);
    t1.emplace_back(0, 1, 2.0 / h);
    t1.emplace_back(0, 2, -0.5 / h);
    t1.emplace_back(n - 1, n - 3, 0.5 / h);
    t1.emplace_back(n - 1, n - 2, -2.0 / h);
    t1.emplace_back(n - 1, n - 1, 1.5 / h);
    for (int c = 0; c < 3; ++c) {
        double w = (c == 1 ? -2.0 : 1.0) / (h * h);
        t2.emplace_back(0, c, w);
        t2.emplace_back(n - 1, n - 3 + c, w);
    }
    for (int k = 0; k < n; ++k)
        tm.emplace_back(k, k, (k == 0 || k == n - 1) ? 0.5 * h : h);

    FullGrid g;
    g.d1.resize(n, n);
    g.d2.resize(n, n);
    g.mass.resize(n, n);
    g.d1.setFromTriplets(t1.begin(), t1.end());
    g.d2.setFromTriplets(t2.begin(), t2.end());
    g.mass.setFromTriplets(tm.begin(), tm.end());
    return g;
}

// Antisymmetric weak form of y''' + y':
// z^T B y ~ 1/2 int (z'' y' - z' y'') + 1/2 int (z y' - z' y).
Sparse weak_form(const FullGrid& g)
{
    Sparse d2t = g.d2.transpose();
    Sparse d1t = g.d1.transpose();
    Sparse b = Sparse(d2t * g.mass * g.d1) - Sparse(d1t * g.mass * g.d2) + Sparse(g.mass * g.d1) -
               Sparse(d1t * g.mass);
    return 0.5 * b;
}

Sparse interior_selector(int n_points)
{
    Sparse p(n_points, n_points + 2);
    Triplets t;
    for (int k = 0; k < n_points; ++k)
        t.emplace_back(k, k + 1, 1.0);
    p.setFromTriplets(t.begin(), t.end());
    return p;
}

Sparse reflection(int n)
{
    Sparse j(n, n);
    Triplets t;
    for (int k = 0; k < n; ++k)
        t.emplace_back(k, n - 1 - k, 1.0);
    j.setFromTriplets(t.begin(), t.end());
    return j;
}

// Trapezoid-orthonormal basis of {y : y[drop] = y[keep] / 4} on interior
// nodes; this is the discrete form of a vanishing one-sided end slope.
Sparse constrained_basis(int n_points, double h, int drop, int keep)
{
    Sparse z(n_points, n_points - 1);
    Triplets t;
    const double unit = 1.0 / std::sqrt(h);
    const double folded = 1.0 / std::sqrt(h * (1.0 + 1.0 / 16.0));
    int col = 0;
    for (int k = 0; k < n_points; ++k) {
        if (k == drop)
            continue;
        if (k == keep) {
            t.emplace_back(k, col, folded);
            t.emplace_back(drop, col, 0.25 * folded);
        } else {
            t.emplace_back(k, col, unit);
        }
        ++col;
    }
    z.setFromTriplets(t.begin(), t.end());
    return z;
}

Eigen::VectorXcd sparse_times(const Sparse& m, const Eigen::VectorXcd& v)
{
    Eigen::VectorXd re = m * v.real();
    Eigen::VectorXd im = m * v.imag();
    Eigen::VectorXcd out(re.size());
    out.real() = re;
    out.imag() = im;
    return out;
}

// Sum of |centred third + first derivative| stencil; valid for 2 <= k <= M-2.
std::complex<double> kdv_stencil(const Eigen::VectorXcd& y, int k, double h)
{
    return (y[k + 2] - 2.0 * y[k + 1] + 2.0 * y[k - 1] - y[k - 2]) / (2.0 * h * h * h) +
           (y[k + 1] - y[k - 1]) / (2.0 * h);
}

Eigen::VectorXcd pad(const Eigen::VectorXcd& interior)
{
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(interior.size() + 2);
    y.segment(1, interior.size()) = interior;
    return y;
}

} // namespace

Eigen::VectorXd Grid::interior_nodes() const
{
    Eigen::VectorXd x(n_points);
    for (int k = 0; k < n_points; ++k)
        x[k] = (k + 1) * h();
    return x;
}

Grid make_grid(double length, int n_points)
{
    if (!(length > 0.0))
        fail(ErrorKind::invalid_argument, "grid length must be positive");
    if (n_points < 16)
        fail(ErrorKind::grid_too_coarse, "finite-difference grid needs at least 16 interior points");
    return Grid{length, n_points};
}

Eigen::VectorXcd DiscreteOperator::to_coordinates(const Eigen::VectorXcd& nodal) const
{
    Sparse bt = basis.transpose();
    return sparse_times(bt, nodal) * grid.h();
}

Eigen::VectorXcd DiscreteOperator::to_nodal(const Eigen::VectorXcd& coords) const
{
    return sparse_times(basis, coords);
}

Eigen::VectorXcd DiscreteOperator::apply(const Eigen::VectorXcd& nodal) const
{
    return to_nodal(matrix.cast<std::complex<double>>() * to_coordinates(nodal));
}

DiscreteOperator build_discrete_B_op(const Grid& grid_in)
{
    Grid grid = make_grid(grid_in.length, grid_in.n_points);
    const int n_int = grid.n_points;
    FullGrid g = full_operators(grid);
    Sparse bm = weak_form(g);
    Sparse p = interior_selector(n_int);
    Sparse pt = p.transpose();
    Sparse s = -Sparse(p * reflection(n_int + 2) * bm * pt);
    Sparse z = constrained_basis(n_int, grid.h(), n_int - 1, n_int - 2);
    Sparse zt = z.transpose();

    DiscreteOperator op;
    op.grid = grid;
    op.kind = OperatorKind::b_scalar;
    op.matrix = Eigen::MatrixXd(Sparse(zt * s * z));
    op.basis = z;
    return op;
}

DiscreteOperator build_discrete_A(const Grid& grid_in)
{
    Grid grid = make_grid(grid_in.length, grid_in.n_points);
    const int n_int = grid.n_points;
    FullGrid g = full_operators(grid);
    Sparse bm = weak_form(g);
    Sparse p = interior_selector(n_int);
    Sparse pt = p.transpose();
    Sparse bint = p * bm * pt;
    Sparse z_eta = constrained_basis(n_int, grid.h(), 0, 1);
    Sparse z_w = constrained_basis(n_int, grid.h(), n_int - 1, n_int - 2);
    Sparse z_eta_t = z_eta.transpose();
    Eigen::MatrixXd coupling = -Eigen::MatrixXd(Sparse(z_eta_t * bint * z_w));

    const int m = n_int - 1;
    DiscreteOperator op;
    op.grid = grid;
    op.kind = OperatorKind::a_coupled;
    op.matrix = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    op.matrix.topRightCorner(m, m) = coupling;
    op.matrix.bottomLeftCorner(m, m) = -coupling.transpose();

    Triplets t;
    for (int k = 0; k < z_eta.outerSize(); ++k)
        for (Sparse::InnerIterator it(z_eta, k); it; ++it)
            t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < z_w.outerSize(); ++k)
        for (Sparse::InnerIterator it(z_w, k); it; ++it)
            t.emplace_back(n_int + it.row(), m + it.col(), it.value());
    op.basis.resize(2 * n_int, 2 * m);
    op.basis.setFromTriplets(t.begin(), t.end());
    return op;
}

std::vector<DiscreteEigenpair> discrete_eigs(const DiscreteOperator& op, int count)
{
    const int dim = static_cast<int>(op.matrix.rows());
    if (count <= 0 || count > dim)
        fail(ErrorKind::invalid_argument, "eigenpair count out of range");
    std::vector<DiscreteEigenpair> out;

    if (op.kind == OperatorKind::b_scalar) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix);
        if (es.info() != Eigen::Success)
            fail(ErrorKind::convergence_failure, "symmetric eigensolver failed");
        std::vector<int> order(dim);
        for (int k = 0; k < dim; ++k)
            order[k] = k;
        const auto& vals = es.eigenvalues();
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return std::abs(vals[a]) < std::abs(vals[b]); });
        for (int k = 0; k < count; ++k) {
            Eigen::VectorXcd coords = es.eigenvectors().col(order[k]).cast<std::complex<double>>();
            out.push_back({vals[order[k]], op.to_nodal(coords)});
        }
        return out;
    }

    const int m = dim / 2;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(op.matrix.topRightCorner(m, m),
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        fail(ErrorKind::convergence_failure, "singular value decomposition failed");
    const std::complex<double> I(0.0, 1.0);
    for (int k = 0; static_cast<int>(out.size()) < count; ++k) {
        int idx = m - 1 - k / 2;
        double sigma = svd.singularValues()[idx];
        double sign = (k % 2 == 0) ? 1.0 : -1.0;
        Eigen::VectorXcd coords(2 * m);
        coords.head(m) = svd.matrixU().col(idx).cast<std::complex<double>>();
        coords.tail(m) = sign * I * svd.matrixV().col(idx).cast<std::complex<double>>();
        coords /= std::sqrt(2.0);
        out.push_back({sign * I * sigma, op.to_nodal(coords)});
    }
    return out;
}

Eigen::VectorXd discrete_eigenvalues(const DiscreteOperator& op)
{
    Eigen::VectorXd vals;
    if (op.kind == OperatorKind::b_scalar) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            fail(ErrorKind::convergence_failure, "symmetric eigensolver failed");
        vals = es.eigenvalues();
    } else {
        const Eigen::Index m = op.matrix.rows() / 2;
        Eigen::BDCSVD<Eigen::MatrixXd> svd(op.matrix.topRightCorner(m, m));
        if (svd.info() != Eigen::Success)
            fail(ErrorKind::convergence_failure, "singular value decomposition failed");
        vals.resize(2 * m);
        vals.head(m) = svd.singularValues();
        vals.tail(m) = -svd.singularValues();
    }
    std::vector<double> v(vals.data(), vals.data() + vals.size());
    std::stable_sort(v.begin(), v.end(), [](double a, double b) {
        if (std::abs(a) != std::abs(b))
            return std::abs(a) < std::abs(b);
        return a > b;
    });
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double structure_defect(const DiscreteOperator& op)
{
    double sign = op.kind == OperatorKind::b_scalar ? -1.0 : 1.0;
    return (op.matrix + sign * op.matrix.transpose()).norm() / op.matrix.norm();
}

double spectrum_defect(const DiscreteOperator& op)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(op.matrix, false);
    if (es.info() != Eigen::Success)
        fail(ErrorKind::convergence_failure, "general eigensolver failed");
    const auto& ev = es.eigenvalues();
    double off = op.kind == OperatorKind::b_scalar ? ev.imag().cwiseAbs().maxCoeff()
                                                   : ev.real().cwiseAbs().maxCoeff();
    double norm2 = ev.cwiseAbs().maxCoeff();
    return off / norm2;
}

double stencil_residual(const Grid& grid, OperatorKind kind, const Eigen::VectorXcd& first,
                        const Eigen::VectorXcd& second, std::complex<double> value)
{
    const double h = grid.h();
    const int m = grid.n_points + 1;
    double num = 0.0, den = 0.0;
    if (kind == OperatorKind::b_scalar) {
        Eigen::VectorXcd y = pad(first);
        for (int k = 2; k <= m - 2; ++k) {
            std::complex<double> by = -kdv_stencil(y, m - k, h);
            num += std::norm(by - value * y[k]);
            den += std::norm(value * y[k]);
        }
    } else {
        Eigen::VectorXcd eta = pad(first), w = pad(second);
        for (int k = 2; k <= m - 2; ++k) {
            num += std::norm(-kdv_stencil(w, k, h) - value * eta[k]);
            num += std::norm(-kdv_stencil(eta, k, h) - value * w[k]);
            den += std::norm(value * eta[k]) + std::norm(value * w[k]);
        }
    }
    return std::sqrt(num / den);
}

double weak_residual(const DiscreteOperator& op, const std::vector<DiscreteEigenpair>& eigs,
                     const Eigen::VectorXcd& nodal, std::complex<double> value)
{
    Eigen::VectorXcd c = op.to_coordinates(nodal);
    Eigen::VectorXcd r = op.matrix.cast<std::complex<double>>() * c - value * c;
    double proj = 0.0;
    for (const auto& e : eigs)
        proj += std::norm(op.to_coordinates(e.vector).dot(r));
    return std::sqrt(proj) / (std::abs(value) * c.norm());
}

std::complex<double> left_slope(const Eigen::VectorXcd& interior, double h)
{
    return (4.0 * interior[0] - interior[1]) / (2.0 * h);
}

std::complex<double> right_slope(const Eigen::VectorXcd& interior, double h)
{
    const Eigen::Index n = interior.size();
    return (-4.0 * interior[n - 1] + interior[n - 2]) / (2.0 * h);
}

} // namespace kdvstab
