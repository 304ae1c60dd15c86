#include "kdvstab/system_basis.hpp"

#include <algorithm>
#include <random>

#include "kdvstab/errors.hpp"
#include "kdvstab/quadrature.hpp"

namespace kdvstab {

namespace {

const cplx I(0.0, 1.0);
const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

double max_root_modulus(const ModeSet& modes)
{
    double r = 0.0;
    for (const auto& m : modes)
        for (const auto& root : m.base.roots)
            r = std::max(r, std::abs(root));
    return r;
}

void require_same_basis(const ModalState& state)
{
    if (!state.modes)
        fail(ErrorKind::invalid_argument, "state has no mode list");
    if (state.coeffs.size() != static_cast<Eigen::Index>(state.modes->size()))
        fail(ErrorKind::invalid_argument, "coefficient count differs from mode count");
}

} // namespace

const char* to_string(ControlSide side)
{
    return side == ControlSide::left_eta ? "left-eta" : "right-w";
}

ControlSide parse_control_side(const std::string& text)
{
    if (text == "left-eta" || text == "left_eta")
        return ControlSide::left_eta;
    if (text == "right-w" || text == "right_w")
        return ControlSide::right_w;
    fail(ErrorKind::invalid_argument, "unknown control side '" + text + "'");
}

cplx SystemMode::theta(double x) const
{
    return -static_cast<double>(sign) * I * inv_sqrt2 * evaluate_mode(base, base.length - x);
}

cplx SystemMode::u(double x) const
{
    return inv_sqrt2 * evaluate_mode(base, x);
}

ModeSetPtr lift_modes(const std::vector<EigenMode>& scalar_modes)
{
    std::vector<EigenMode> sorted = scalar_modes;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const EigenMode& a, const EigenMode& b) { return a.n < b.n; });
    auto out = std::make_shared<ModeSet>();
    out->reserve(2 * sorted.size());
    for (const auto& m : sorted) {
        if (!sorted.empty() && m.length != sorted.front().length)
            fail(ErrorKind::invalid_argument, "scalar modes computed for different lengths");
        for (int sign : {1, -1}) {
            SystemMode s;
            s.base = m;
            s.sign = sign;
            s.mu = sign * m.lambda;
            s.beta = -(m.trace_vp0.real()) * inv_sqrt2;
            // theta'(x) = sign * (i / sqrt2) v'(L - x)
            s.output_trace_L = static_cast<double>(sign) * I * inv_sqrt2 * m.trace_vp0;
            out->push_back(s);
        }
    }
    return out;
}

cplx control_trace(const SystemMode& mode, ControlSide side)
{
    return side == ControlSide::left_eta ? cplx(mode.beta, 0.0) : mode.output_trace_L;
}

cplx observed_trace(const SystemMode& mode, ControlSide side)
{
    return side == ControlSide::left_eta ? mode.u_slope0() : mode.output_trace_L;
}

bool conjugate_paired(const ModeSet& modes, const Eigen::VectorXcd& coeffs, double tol)
{
    if (coeffs.size() != static_cast<Eigen::Index>(modes.size()) || modes.size() % 2 != 0)
        return false;
    double scale = std::max(1.0, coeffs.cwiseAbs().maxCoeff());
    for (std::size_t k = 0; k + 1 < modes.size(); k += 2) {
        if (modes[k].base.n != modes[k + 1].base.n || modes[k].sign != 1 || modes[k + 1].sign != -1)
            return false;
        if (std::abs(coeffs[k + 1] - std::conj(coeffs[k])) > tol * scale)
            return false;
    }
    return true;
}

ModalState make_state(ModeSetPtr modes, Eigen::VectorXcd coeffs)
{
    if (!modes || modes->empty())
        fail(ErrorKind::empty_input, "mode list is empty");
    ModalState s;
    s.length = modes->front().base.length;
    s.reality = conjugate_paired(*modes, coeffs);
    s.modes = std::move(modes);
    s.coeffs = std::move(coeffs);
    require_same_basis(s);
    return s;
}

double hs_weight(const SystemMode& mode, double s)
{
    return std::pow(1.0 + std::abs(mode.base.lambda), 2.0 * s / 3.0);
}

double hs_norm(const ModalState& state, double s)
{
    require_same_basis(state);
    double sum = 0.0;
    for (std::size_t k = 0; k < state.modes->size(); ++k)
        sum += hs_weight((*state.modes)[k], s) * std::norm(state.coeffs[k]);
    return std::sqrt(sum);
}

SampledPair synthesize(const ModalState& state, int intervals)
{
    require_same_basis(state);
    if (intervals < 2)
        fail(ErrorKind::invalid_argument, "synthesis needs at least 2 intervals");
    SampledPair out;
    out.length = state.length;
    out.x = Eigen::VectorXd::LinSpaced(intervals + 1, 0.0, state.length);
    out.eta = Eigen::VectorXcd::Zero(intervals + 1);
    out.w = Eigen::VectorXcd::Zero(intervals + 1);
    const ModeSet& modes = *state.modes;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (state.coeffs[k] == cplx(0.0))
            continue;
        Eigen::VectorXcd v = sample_mode(modes[k].base, out.x);
        Eigen::VectorXcd v_reflected = v.reverse();
        cplx c = state.coeffs[k];
        out.w += (c * inv_sqrt2) * v;
        out.eta += (-static_cast<double>(modes[k].sign) * I * inv_sqrt2 * c) * v_reflected;
    }
    return out;
}

double resolution_number(const ModeSet& modes, double h)
{
    return h * max_root_modulus(modes);
}

int required_intervals(const ModeSet& modes)
{
    if (modes.empty())
        return 2;
    double L = modes.front().base.length;
    int n = static_cast<int>(std::ceil(L * max_root_modulus(modes) / 0.02));
    return std::max(n + (n % 2), 16);
}

ModalState project(const SampledPair& samples, ModeSetPtr modes)
{
    if (!modes || modes->empty())
        fail(ErrorKind::empty_input, "mode list is empty");
    const Eigen::Index n = samples.x.size();
    if (n < 3 || samples.eta.size() != n || samples.w.size() != n)
        fail(ErrorKind::invalid_argument, "inconsistent sample arrays");
    const double h = samples.length / static_cast<double>(n - 1);
    if (resolution_number(*modes, h) > 0.02)
        fail(ErrorKind::grid_too_coarse,
             "grid spacing too large for the fastest mode (need at least " +
                 std::to_string(required_intervals(*modes)) + " intervals)");
    Eigen::VectorXd wts = simpson_weights(static_cast<int>(n), h);
    Eigen::VectorXcd weta = samples.eta.cwiseProduct(wts.cast<cplx>());
    Eigen::VectorXcd ww = samples.w.cwiseProduct(wts.cast<cplx>());

    Eigen::VectorXcd coeffs(modes->size());
    for (std::size_t k = 0; k < modes->size(); ++k) {
        const SystemMode& m = (*modes)[k];
        Eigen::VectorXcd v = sample_mode(m.base, samples.x);
        Eigen::VectorXcd u = inv_sqrt2 * v;
        Eigen::VectorXcd theta = (-static_cast<double>(m.sign) * I * inv_sqrt2) * Eigen::VectorXcd(v.reverse());
        // <y, phi> = int eta conj(theta) + w conj(u)
        coeffs[k] = theta.dot(weta) + u.dot(ww);
    }
    return make_state(std::move(modes), std::move(coeffs));
}

Eigen::MatrixXcd system_gram(const ModeSet& modes, int intervals)
{
    if (modes.empty())
        fail(ErrorKind::empty_input, "mode list is empty");
    const double L = modes.front().base.length;
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(intervals + 1, 0.0, L);
    Eigen::VectorXd wts = simpson_weights(intervals + 1, L / intervals);
    const Eigen::Index m = static_cast<Eigen::Index>(modes.size());
    Eigen::MatrixXcd samples(2 * x.size(), m);
    for (Eigen::Index k = 0; k < m; ++k) {
        Eigen::VectorXcd v = sample_mode(modes[k].base, x);
        samples.col(k).head(x.size()) =
            (-static_cast<double>(modes[k].sign) * I * inv_sqrt2) * Eigen::VectorXcd(v.reverse());
        samples.col(k).tail(x.size()) = inv_sqrt2 * v;
    }
    Eigen::VectorXcd w2(2 * x.size());
    w2.head(x.size()) = wts.cast<cplx>();
    w2.tail(x.size()) = wts.cast<cplx>();
    return samples.adjoint() * w2.asDiagonal() * samples;
}

Eigen::VectorXcd delta_coefficients(const ModalState& state)
{
    require_same_basis(state);
    const ModeSet& modes = *state.modes;
    std::vector<cplx> out;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        cplx term = state.coeffs[k] * modes[k].u_slope0();
        if (k > 0 && modes[k].base.n == modes[k - 1].base.n)
            out.back() += term;
        else
            out.push_back(term);
    }
    return Eigen::Map<Eigen::VectorXcd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

ModalState random_real_state(ModeSetPtr modes, std::uint64_t seed, std::uint64_t stream, double s)
{
    if (!modes || modes->empty())
        fail(ErrorKind::empty_input, "mode list is empty");
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(modes->size());
    for (std::size_t k = 0; k < modes->size(); ++k) {
        if ((*modes)[k].sign == 1) {
            double re = normal(rng);
            double im = normal(rng);
            c[k] = cplx(re, im);
        } else if (k > 0 && (*modes)[k - 1].base.n == (*modes)[k].base.n) {
            c[k] = std::conj(c[k - 1]);
        }
    }
    ModalState state = make_state(modes, c);
    double norm = hs_norm(state, s);
    if (!(norm > 0.0))
        fail(ErrorKind::zero_norm, "random state has zero norm");
    state.coeffs /= norm;
    return state;
}

} // namespace kdvstab
