#pragma once

#include <array>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace kdvstab {

using cplx = std::complex<double>;
using Roots = std::array<cplx, 3>;

// One eigenpair of the scalar operator  By = -y'''(L-x) - y'(L-x),
// y(0) = y(L) = y'(L) = 0.  The eigenfunction is
//   v(x) = sum_j a_j (exp(r_j x) - i exp(r_j (L-x))),   r_j^3 + r_j = i lambda.
// a_j can be astronomically small when Re r_j L is large, so the scaled
// coefficient a~_j = a_j exp(scale_j L) is stored, scale_j = max(0, Re r_j).
struct EigenMode {
    int n = 0;
    double lambda = 0.0;
    double length = 0.0;
    Roots roots{};
    std::array<cplx, 3> scaled_coeffs{};
    std::array<double, 3> scales{};
    cplx trace_vp0{};
    cplx trace_vpL{};
    double residual = 0.0;

    // Unscaled a_j (may underflow to zero, never overflows).
    cplx coeff(int j) const;
};

// Roots of r^3 + r - i lambda ordered so that for lambda -> +inf they follow
// -i, (sqrt3/2 + i/2), (-sqrt3/2 + i/2) times lambda^{1/3}.  For lambda < 0 the
// first root is the real-s root continuing to +i|lambda|^{1/3} and the second
// is the pair member with negative real part.
Roots char_roots(double lambda, double tol = 1e-12);

// 3x3 boundary system with column j multiplied by exp(-scale_j L).  Its null
// vector is the scaled coefficient vector.
Eigen::Matrix3cd boundary_matrix(const Roots& roots, double length);

// det(boundary_matrix) / prod_{i<j} (r_i - r_j).  Symmetric in the roots, hence
// continuous in lambda; its phase is constant (-pi/4 mod pi) on the real axis.
cplx dispersion_det(double lambda, double length);

// Real-valued form Re(exp(i pi/4) * dispersion_det); sign changes bracket
// eigenvalues.
double dispersion_real(double lambda, double length);

// Smallest over largest singular value of the row-normalized boundary matrix.
double boundary_rank_defect(double lambda, double length);

struct DispersionScan {
    double length = 0.0;
    std::pair<double, double> lambda_window{};
    std::vector<std::pair<double, double>> samples; // (lambda, |det|)
    std::vector<double> located_roots;
};

// Uniform-in-cbrt(lambda) scan of a window with sign-change refinement.
DispersionScan scan_window(double length, double lambda_lo, double lambda_hi, int n_samples);

struct ScanOptions {
    int samples_per_spacing = 64;
    int warmup_roots = 3;
    double certify_tol = 1e-8;
};

struct SpectrumFit {
    int k1 = 0;
    int k2 = 0;
};

// Builds and normalizes the mode at an eigenvalue.
EigenMode solve_mode(double lambda, double length, int n);

// The `count` eigenvalues nearest zero: ceil(count/2) from the nonnegative
// branch (n = 1, 2, ...) and floor(count/2) from the negative branch
// (n = -1, -2, ...), ordered by increasing lambda.
std::vector<EigenMode> scan_eigenvalues(double length, int count,
                                        const ScanOptions& options = {},
                                        SpectrumFit* fit = nullptr);

// Asymptotic eigenvalue ((pi + 12 pi (k1 + n)) / (6L))^3 for n > 0 and
// -((7 pi + 12 pi (k2 - n)) / (6L))^3 for n < 0.
double asymptotic_lambda(int n, const SpectrumFit& fit, double length);

// Rescales so that the L2 norm is one, int v^2 is real positive and
// Re v'(0) >= 0.
EigenMode normalize_mode(const EigenMode& mode);

// Closed-form int_0^L |v|^2 dx.
double closed_form_norm2(const EigenMode& mode);

// Closed-form int_0^L v^2 dx in the boundary-reduced form
// -2iL sum a_j^2 e^{r_j L} + 4i sum_{i<j} a_i a_j (e^{r_j L} - e^{r_i L}) / (r_i - r_j).
cplx bilinear_identity(const EigenMode& mode);

std::pair<cplx, cplx> mode_traces(const EigenMode& mode);

cplx evaluate_mode(const EigenMode& mode, double x);
cplx evaluate_mode_derivative(const EigenMode& mode, double x);
Eigen::VectorXcd sample_mode(const EigenMode& mode, const Eigen::VectorXd& x);

} // namespace kdvstab
