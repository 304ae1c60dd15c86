#include "kdvstab/modal_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "kdvstab/errors.hpp"

namespace kdvstab {

namespace {

constexpr double pi = std::numbers::pi;
const cplx I(0.0, 1.0);

// Critical points of s^3 - s + lambda where two roots coincide.
const double degenerate_lambda = 2.0 / (3.0 * std::sqrt(3.0));

cplx polish(cplx r, double lambda)
{
    for (int it = 0; it < 3; ++it) {
        cplx f = r * r * r + r - I * lambda;
        cplx df = 3.0 * r * r + 1.0;
        if (std::abs(df) < 1e-300)
            break;
        cplx step = f / df;
        r -= step;
        if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(r)))
            break;
    }
    return r;
}

struct Scaled {
    std::array<cplx, 3> e;   // exp((r_j - scale_j) L)
    std::array<double, 3> s; // exp(-scale_j L)
    std::array<double, 3> scale;
};

Scaled scaled_exponentials(const Roots& r, double L)
{
    Scaled out;
    for (int j = 0; j < 3; ++j) {
        out.scale[j] = std::max(0.0, r[j].real());
        out.e[j] = std::exp((r[j] - out.scale[j]) * L);
        out.s[j] = std::exp(-out.scale[j] * L);
    }
    return out;
}

// int_0^L exp(p x + q (L - x) - shift) dx, assuming Re p L, Re q L <= shift.
cplx exp_integral(cplx p, cplx q, double L, double shift)
{
    cplx z = (p - q) * L;
    if (std::abs(z) < 0.1) {
        // exp(qL - shift) * L * phi1(z), phi1(z) = (e^z - 1)/z
        cplx term = 1.0, sum = 0.0;
        for (int k = 0; k < 16; ++k) {
            sum += term;
            term *= z / static_cast<double>(k + 2);
        }
        return std::exp(q * L - shift) * L * sum;
    }
    return (std::exp(p * L - shift) - std::exp(q * L - shift)) / (p - q);
}

double dispersion_real_safe(double lambda, double L)
{
    try {
        return dispersion_real(lambda, L);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate_roots)
            throw;
        return dispersion_real(lambda + 1e-9, L);
    }
}

double refine_root(double a, double b, double fa, double fb, double L)
{
    if (a > b) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    if (fa == 0.0)
        return a;
    if (fb == 0.0)
        return b;
    boost::uintmax_t max_iter = 200;
    auto f = [L](double lam) { return dispersion_real_safe(lam, L); };
    auto result = boost::math::tools::toms748_solve(
        f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), max_iter);
    if (max_iter >= 200)
        fail(ErrorKind::convergence_failure, "dispersion root refinement did not converge");
    return 0.5 * (result.first + result.second);
}

bool sign_differs(double a, double b)
{
    return (a < 0.0) != (b < 0.0);
}

double certified_root(double lam, double L, double certify_tol)
{
    if (std::abs(std::abs(lam) - degenerate_lambda) < 1e-6)
        fail(ErrorKind::degenerate_roots,
             "dispersion zero at lambda=" + std::to_string(lam) +
                 " coincides with a repeated characteristic root; use the finite-difference oracle");
    double defect = boundary_rank_defect(lam, L);
    if (!(defect < certify_tol))
        fail(ErrorKind::bracket_failure, "sign change at lambda=" + std::to_string(lam) +
                                             " is not a certified zero (defect " +
                                             std::to_string(defect) + ")");
    return lam;
}

// Locates `needed` eigenvalues on one branch (direction +1: lambda >= 0,
// direction -1: lambda < 0) in the variable u = cbrt(lambda).
std::vector<double> locate_branch(double L, int direction, int needed, const ScanOptions& opts,
                                  int& k_fit)
{
    std::vector<double> found;
    k_fit = 0;
    if (needed <= 0)
        return found;

    const double spacing = 2.0 * pi / L;
    const double du = spacing / opts.samples_per_spacing;
    const double offset = direction > 0 ? pi / 6.0 : 7.0 * pi / 6.0;
    auto lam_of = [](double u) { return u * u * u; };
    auto accept = [direction](double lam) { return direction > 0 ? lam > -1e-9 : lam < -1e-9; };

    // Dense warm-up until a few roots are known.
    const int warm = std::min(needed, std::max(1, opts.warmup_roots));
    double u = direction > 0 ? -0.5 * du : 0.0;
    double g = dispersion_real_safe(lam_of(u), L);
    const long max_steps = (warm + 8L) * opts.samples_per_spacing * 4L;
    for (long step = 0; static_cast<int>(found.size()) < warm; ++step) {
        if (step > max_steps)
            fail(ErrorKind::bracket_failure, "no dispersion zeros found during warm-up scan");
        double u_next = u + direction * du;
        double g_next = dispersion_real_safe(lam_of(u_next), L);
        if (sign_differs(g, g_next)) {
            double lam = refine_root(lam_of(u), lam_of(u_next), g, g_next, L);
            if (accept(lam))
                found.push_back(certified_root(lam, L, opts.certify_tol));
        }
        u = u_next;
        g = g_next;
    }

    auto fit_k = [&]() {
        int m = static_cast<int>(found.size());
        double ul = std::cbrt(std::abs(found.back())) * L;
        return static_cast<int>(std::lround((ul - offset) / (2.0 * pi) - m));
    };

    // Asymptotically predicted brackets for the remaining roots.
    const double du2 = spacing / std::max(8, opts.samples_per_spacing / 2);
    while (static_cast<int>(found.size()) < needed) {
        k_fit = fit_k();
        int m_next = static_cast<int>(found.size()) + 1;
        double u_pred = direction * (offset + 2.0 * pi * (k_fit + m_next)) / L;
        double u_last = std::cbrt(found.back());
        double u_end = u_pred + direction * pi / L;
        if (direction * (u_end - u_last) <= 0.0)
            fail(ErrorKind::bracket_failure, "predicted bracket lies behind the last located root");

        std::vector<double> hits;
        double ua = u_last + direction * 0.5 * du2;
        double ga = dispersion_real_safe(lam_of(ua), L);
        while (direction * (u_end - ua) > 0.0) {
            double ub = ua + direction * du2;
            if (direction * (ub - u_end) > 0.0)
                ub = u_end;
            double gb = dispersion_real_safe(lam_of(ub), L);
            if (sign_differs(ga, gb))
                hits.push_back(refine_root(lam_of(ua), lam_of(ub), ga, gb, L));
            ua = ub;
            ga = gb;
        }
        if (hits.size() != 1)
            fail(ErrorKind::bracket_failure,
                 "predicted bracket for branch index " + std::to_string(direction * m_next) +
                     " contains " + std::to_string(hits.size()) + " sign changes");
        found.push_back(certified_root(hits.front(), L, opts.certify_tol));
    }
    k_fit = fit_k();
    return found;
}

} // namespace

cplx EigenMode::coeff(int j) const
{
    return scaled_coeffs[j] * std::exp(-scales[j] * length);
}

Roots char_roots(double lambda, double tol)
{
    if (!std::isfinite(lambda))
        fail(ErrorKind::invalid_argument, "lambda must be finite");
    double disc = 4.0 - 27.0 * lambda * lambda;
    if (std::abs(disc) <= tol)
        fail(ErrorKind::degenerate_roots,
             "characteristic cubic has a repeated root near lambda=" + std::to_string(lambda));

    // r = i s with s^3 - s + lambda = 0.
    Roots r;
    if (disc > 0.0) {
        double phi = std::acos(std::clamp(-1.5 * std::sqrt(3.0) * lambda, -1.0, 1.0));
        double c = 2.0 / std::sqrt(3.0);
        std::array<double, 3> s{c * std::cos(phi / 3.0), c * std::cos(phi / 3.0 - 2.0 * pi / 3.0),
                                c * std::cos(phi / 3.0 - 4.0 * pi / 3.0)};
        std::sort(s.begin(), s.end());
        if (lambda >= 0.0)
            r = {I * s[0], I * s[2], I * s[1]};
        else
            r = {I * s[2], I * s[0], I * s[1]};
    } else {
        double sq = std::sqrt(0.25 * lambda * lambda - 1.0 / 27.0);
        double a = -std::copysign(std::cbrt(0.5 * std::abs(lambda) + sq), lambda);
        double t = a + 1.0 / (3.0 * a);
        double q = 0.5 * std::sqrt(std::max(0.0, 3.0 * t * t - 4.0));
        double sgn = lambda >= 0.0 ? 1.0 : -1.0;
        r = {I * t, cplx(sgn * q, -0.5 * t), cplx(-sgn * q, -0.5 * t)};
    }
    for (auto& root : r)
        root = polish(root, lambda);
    return r;
}

Eigen::Matrix3cd boundary_matrix(const Roots& roots, double length)
{
    Scaled sc = scaled_exponentials(roots, length);
    Eigen::Matrix3cd m;
    for (int j = 0; j < 3; ++j) {
        m(0, j) = sc.e[j] - I * sc.s[j];
        m(1, j) = sc.s[j] - I * sc.e[j];
        m(2, j) = roots[j] * (sc.e[j] + I * sc.s[j]);
    }
    return m;
}

cplx dispersion_det(double lambda, double length)
{
    Roots r = char_roots(lambda);
    cplx vandermonde = (r[0] - r[1]) * (r[0] - r[2]) * (r[1] - r[2]);
    return boundary_matrix(r, length).determinant() / vandermonde;
}

double dispersion_real(double lambda, double length)
{
    static const cplx rotate = std::polar(1.0, pi / 4.0);
    return (rotate * dispersion_det(lambda, length)).real();
}

double boundary_rank_defect(double lambda, double length)
{
    Eigen::Matrix3cd m = boundary_matrix(char_roots(lambda), length);
    for (int i = 0; i < 3; ++i)
        m.row(i) /= m.row(i).norm();
    Eigen::JacobiSVD<Eigen::Matrix3cd> svd(m);
    auto sv = svd.singularValues();
    return sv[2] / sv[0];
}

DispersionScan scan_window(double length, double lambda_lo, double lambda_hi, int n_samples)
{
    if (!(length > 0.0) || !(lambda_hi > lambda_lo) || n_samples < 2)
        fail(ErrorKind::invalid_argument, "scan_window needs L > 0, lo < hi and >= 2 samples");
    DispersionScan scan;
    scan.length = length;
    scan.lambda_window = {lambda_lo, lambda_hi};
    double u_lo = std::cbrt(lambda_lo), u_hi = std::cbrt(lambda_hi);
    std::vector<double> lam(n_samples), g(n_samples);
    for (int k = 0; k < n_samples; ++k) {
        double u = u_lo + (u_hi - u_lo) * k / (n_samples - 1);
        lam[k] = u * u * u;
        cplx d;
        try {
            d = dispersion_det(lam[k], length);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::degenerate_roots)
                throw;
            d = dispersion_det(lam[k] + 1e-9, length);
        }
        g[k] = (std::polar(1.0, pi / 4.0) * d).real();
        scan.samples.emplace_back(lam[k], std::abs(d));
    }
    for (int k = 0; k + 1 < n_samples; ++k) {
        if (!sign_differs(g[k], g[k + 1]))
            continue;
        double root = refine_root(lam[k], lam[k + 1], g[k], g[k + 1], length);
        if (boundary_rank_defect(root, length) < 1e-8)
            scan.located_roots.push_back(root);
    }
    std::sort(scan.located_roots.begin(), scan.located_roots.end());
    scan.located_roots.erase(std::unique(scan.located_roots.begin(), scan.located_roots.end()),
                             scan.located_roots.end());
    return scan;
}

EigenMode solve_mode(double lambda, double length, int n)
{
    EigenMode mode;
    mode.n = n;
    mode.lambda = lambda;
    mode.length = length;
    mode.roots = char_roots(lambda);
    Eigen::Matrix3cd m = boundary_matrix(mode.roots, length);
    Eigen::Vector3d row_norm;
    for (int i = 0; i < 3; ++i)
        row_norm[i] = m.row(i).norm();
    Eigen::Matrix3cd scaled = row_norm.cwiseInverse().asDiagonal() * m;
    Eigen::JacobiSVD<Eigen::Matrix3cd> svd(scaled, Eigen::ComputeFullV);
    Eigen::Vector3cd a = svd.matrixV().col(2);
    mode.residual = (scaled * a).cwiseAbs().maxCoeff();
    for (int j = 0; j < 3; ++j) {
        mode.scaled_coeffs[j] = a[j];
        mode.scales[j] = std::max(0.0, mode.roots[j].real());
    }
    return normalize_mode(mode);
}

std::vector<EigenMode> scan_eigenvalues(double length, int count, const ScanOptions& options,
                                        SpectrumFit* fit)
{
    if (!(length > 0.0))
        fail(ErrorKind::invalid_argument, "length must be positive");
    if (count <= 0)
        fail(ErrorKind::invalid_argument, "mode count must be positive");
    int n_pos = (count + 1) / 2;
    int n_neg = count / 2;
    SpectrumFit local;
    std::vector<double> pos = locate_branch(length, +1, n_pos, options, local.k1);
    std::vector<double> neg = locate_branch(length, -1, n_neg, options, local.k2);
    if (fit)
        *fit = local;

    std::vector<EigenMode> modes;
    modes.reserve(count);
    for (int k = static_cast<int>(neg.size()) - 1; k >= 0; --k)
        modes.push_back(solve_mode(neg[k], length, -(k + 1)));
    for (int k = 0; k < static_cast<int>(pos.size()); ++k)
        modes.push_back(solve_mode(pos[k], length, k + 1));
    return modes;
}

double asymptotic_lambda(int n, const SpectrumFit& fit, double length)
{
    if (n > 0) {
        double u = (pi + 12.0 * pi * (fit.k1 + n)) / (6.0 * length);
        return u * u * u;
    }
    double u = (7.0 * pi + 12.0 * pi * (fit.k2 - n)) / (6.0 * length);
    return -u * u * u;
}

double closed_form_norm2(const EigenMode& mode)
{
    const double L = mode.length;
    const auto& r = mode.roots;
    const auto& a = mode.scaled_coeffs;
    cplx total = 0.0;
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
            cplx rk = std::conj(r[k]);
            double shift = (mode.scales[j] + mode.scales[k]) * L;
            cplx block = exp_integral(r[j] + rk, 0.0, L, shift) + I * exp_integral(r[j], rk, L, shift) -
                         I * exp_integral(rk, r[j], L, shift) + exp_integral(0.0, r[j] + rk, L, shift);
            total += a[j] * std::conj(a[k]) * block;
        }
    }
    return total.real();
}

cplx bilinear_identity(const EigenMode& mode)
{
    const double L = mode.length;
    Scaled sc = scaled_exponentials(mode.roots, L);
    const auto& r = mode.roots;
    const auto& a = mode.scaled_coeffs;
    cplx diag = 0.0, cross = 0.0;
    for (int j = 0; j < 3; ++j)
        diag += a[j] * a[j] * sc.e[j] * sc.s[j];
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            cross += a[i] * a[j] * (sc.s[i] * sc.e[j] - sc.e[i] * sc.s[j]) / (r[i] - r[j]);
    return -2.0 * I * L * diag + 4.0 * I * cross;
}

std::pair<cplx, cplx> mode_traces(const EigenMode& mode)
{
    Scaled sc = scaled_exponentials(mode.roots, mode.length);
    cplx vp0 = 0.0, vpL = 0.0;
    for (int j = 0; j < 3; ++j) {
        cplx ar = mode.scaled_coeffs[j] * mode.roots[j];
        vp0 += ar * (sc.s[j] + I * sc.e[j]);
        vpL += ar * (sc.e[j] + I * sc.s[j]);
    }
    return {vp0, vpL};
}

EigenMode normalize_mode(const EigenMode& mode)
{
    EigenMode out = mode;
    double unit = 0.0;
    for (const auto& c : out.scaled_coeffs)
        unit += std::norm(c);
    if (!(unit > 0.0))
        fail(ErrorKind::zero_norm, "mode has zero coefficients");
    for (auto& c : out.scaled_coeffs)
        c /= std::sqrt(unit);

    double n2 = closed_form_norm2(out);
    if (!(n2 > 1e-20))
        fail(ErrorKind::zero_norm, "eigenfunction norm vanishes at lambda=" + std::to_string(mode.lambda));
    for (auto& c : out.scaled_coeffs)
        c /= std::sqrt(n2);

    // Make v real: int v^2 real positive fixes the phase up to sign.
    cplx q = bilinear_identity(out);
    cplx rot = std::polar(1.0, -0.5 * std::arg(q));
    for (auto& c : out.scaled_coeffs)
        c *= rot;

    auto [vp0, vpL] = mode_traces(out);
    if (vp0.real() < 0.0) {
        for (auto& c : out.scaled_coeffs)
            c = -c;
        vp0 = -vp0;
        vpL = -vpL;
    }
    out.trace_vp0 = vp0;
    out.trace_vpL = vpL;
    return out;
}

cplx evaluate_mode(const EigenMode& mode, double x)
{
    const double L = mode.length;
    cplx v = 0.0;
    for (int j = 0; j < 3; ++j) {
        const cplx r = mode.roots[j];
        double sL = mode.scales[j] * L;
        v += mode.scaled_coeffs[j] * (std::exp(r * x - sL) - I * std::exp(r * (L - x) - sL));
    }
    return v;
}

cplx evaluate_mode_derivative(const EigenMode& mode, double x)
{
    const double L = mode.length;
    cplx v = 0.0;
    for (int j = 0; j < 3; ++j) {
        const cplx r = mode.roots[j];
        double sL = mode.scales[j] * L;
        v += mode.scaled_coeffs[j] * r * (std::exp(r * x - sL) + I * std::exp(r * (L - x) - sL));
    }
    return v;
}

Eigen::VectorXcd sample_mode(const EigenMode& mode, const Eigen::VectorXd& x)
{
    Eigen::VectorXcd v(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k)
        v[k] = evaluate_mode(mode, x[k]);
    return v;
}

} // namespace kdvstab
