#include "kdvstab/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "kdvstab/errors.hpp"
#include "kdvstab/quadrature.hpp"

namespace kdvstab {

namespace {

constexpr double pi = std::numbers::pi;

Eigen::VectorXcd observed_amplitudes(const ModeSet& modes, const Eigen::VectorXcd& coeffs,
                                     ControlSide side)
{
    Eigen::VectorXcd g(coeffs.size());
    for (Eigen::Index k = 0; k < coeffs.size(); ++k)
        g[k] = coeffs[k] * observed_trace(modes[k], side);
    return g;
}

double max_frequency(const ModeSet& modes)
{
    double m = 0.0;
    for (const auto& mode : modes)
        m = std::max(m, std::abs(mode.mu));
    return m;
}

} // namespace

double critical_length(long q)
{
    return 2.0 * pi / std::sqrt(3.0) * std::sqrt(static_cast<double>(q));
}

CriticalLengthSet enumerate_critical(double bound)
{
    if (!(bound > 0.0))
        fail(ErrorKind::invalid_argument, "bound must be positive");
    CriticalLengthSet set;
    set.bound = bound;
    const double q_max = 3.0 * bound * bound / (4.0 * pi * pi);
    std::map<long, std::vector<std::pair<int, int>>> by_q;
    for (long k = 1; k * k + k + 1 <= q_max; ++k)
        for (long l = 1; k * k + k * l + l * l <= q_max; ++l)
            by_q[k * k + k * l + l * l].emplace_back(static_cast<int>(k), static_cast<int>(l));
    for (auto& [q, gens] : by_q) {
        double value = critical_length(q);
        if (value <= bound)
            set.entries.push_back({value, q, gens});
    }
    return set;
}

CriticalCheck is_critical(double length, double tol)
{
    if (!(length > 0.0) || !(tol > 0.0))
        fail(ErrorKind::invalid_argument, "length and tolerance must be positive");
    // consecutive critical lengths are at most 2 pi apart
    CriticalLengthSet set = enumerate_critical(length + 2.0 * pi + 1.0);
    CriticalCheck check;
    check.distance = std::numeric_limits<double>::infinity();
    for (const auto& e : set.entries) {
        double d = std::abs(e.value - length);
        if (d < check.distance) {
            check.distance = d;
            check.nearest = e;
        }
    }
    check.critical = check.nearest.value <= length + 1.0 && check.distance < tol;
    return check;
}

Eigen::VectorXcd boundary_trace_series(const ModalState& state, double T, int samples, ControlSide side)
{
    if (!(T > 0.0) || samples < 2)
        fail(ErrorKind::invalid_argument, "need T > 0 and at least 2 samples");
    if (!state.modes)
        fail(ErrorKind::empty_input, "state has no modes");
    const ModeSet& modes = *state.modes;
    Eigen::VectorXcd g = observed_amplitudes(modes, state.coeffs, side);
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(samples);
    for (int k = 0; k < samples; ++k) {
        double t = T * k / (samples - 1);
        cplx sum = 0.0;
        for (Eigen::Index m = 0; m < g.size(); ++m)
            sum += g[m] * std::polar(1.0, modes[m].mu * t);
        y[k] = sum;
    }
    return y;
}

int trace_intervals(const ModeSet& modes, double T)
{
    double per_period = 20.0;
    double n = std::ceil(per_period * T * max_frequency(modes) / (2.0 * pi));
    int intervals = std::max(64, static_cast<int>(n));
    return intervals + (intervals % 2);
}

Eigen::MatrixXcd trace_gram(const ModeSet& modes, double T, int intervals)
{
    const Eigen::Index n = static_cast<Eigen::Index>(modes.size());
    Eigen::MatrixXcd w(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = j; k < n; ++k) {
            w(j, k) = simpson_exponential(modes[k].mu - modes[j].mu, T, intervals);
            w(k, j) = std::conj(w(j, k));
        }
    }
    return w;
}

double trace_energy(const ModalState& state, double T, ControlSide side)
{
    if (!state.modes)
        fail(ErrorKind::empty_input, "state has no modes");
    const ModeSet& modes = *state.modes;
    Eigen::MatrixXcd w = trace_gram(modes, T, trace_intervals(modes, T));
    Eigen::VectorXcd g = observed_amplitudes(modes, state.coeffs, side);
    return (g.adjoint() * w * g).value().real();
}

InghamReport ingham_constants(ModeSetPtr modes, double T, int trials, std::uint64_t seed,
                              ControlSide side, double critical_tol)
{
    if (!modes || modes->empty())
        fail(ErrorKind::empty_input, "mode list is empty");
    if (!(T > 0.0))
        fail(ErrorKind::invalid_argument, "T must be positive");
    if (trials < 1)
        fail(ErrorKind::invalid_argument, "need at least one trial");
    InghamReport rep;
    rep.length = modes->front().base.length;
    rep.side = side;
    rep.T = T;
    rep.trials = trials;
    rep.seed = seed;
    rep.critical_length = is_critical(rep.length, critical_tol).critical;
    int intervals = trace_intervals(*modes, T);
    rep.sample_count = intervals + 1;
    Eigen::MatrixXcd w = trace_gram(*modes, T, intervals);

    auto energy = [&](const Eigen::VectorXcd& c) {
        Eigen::VectorXcd g = observed_amplitudes(*modes, c, side);
        return (g.adjoint() * w * g).value().real();
    };
    rep.l2_lower = std::numeric_limits<double>::infinity();
    rep.l2_upper = 0.0;
    for (int t = 0; t < trials; ++t) {
        ModalState s = random_real_state(modes, seed, static_cast<std::uint64_t>(t));
        double e = energy(s.coeffs);
        double h1 = hs_norm(s, 1.0);
        double l2 = hs_norm(s, 0.0);
        rep.trial_ratios.push_back(e / (h1 * h1));
        rep.l2_lower = std::min(rep.l2_lower, e / (l2 * l2));
        rep.l2_upper = std::max(rep.l2_upper, e / (l2 * l2));
    }
    for (std::size_t k = 0; k < modes->size(); ++k) {
        Eigen::VectorXcd c = Eigen::VectorXcd::Zero(modes->size());
        c[k] = 1.0;
        rep.mode_ratios.push_back(energy(c) / hs_weight((*modes)[k], 1.0));
    }
    auto [tlo, thi] = std::minmax_element(rep.trial_ratios.begin(), rep.trial_ratios.end());
    auto [mlo, mhi] = std::minmax_element(rep.mode_ratios.begin(), rep.mode_ratios.end());
    rep.c_lower = std::min(*tlo, *mlo);
    rep.C_upper = std::max(*thi, *mhi);
    if (!rep.critical_length && rep.c_lower < 1e-10)
        fail(ErrorKind::degenerate_observability,
             "observability constant vanishes at the non-critical length L=" + std::to_string(rep.length));
    return rep;
}

TraceReport trace_nonvanishing(const std::vector<EigenMode>& modes)
{
    if (modes.empty())
        fail(ErrorKind::empty_input, "mode list is empty");
    TraceReport rep;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& m : modes) {
        double ratio = std::norm(m.trace_vp0) / std::pow(1.0 + std::abs(m.lambda), 2.0 / 3.0);
        rep.n.push_back(m.n);
        rep.ratios.push_back(ratio);
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        if (ratio < trace_flag_threshold)
            rep.flagged.push_back(m.n);
    }
    return rep;
}

bool gaps_increasing(const std::vector<EigenMode>& modes)
{
    std::vector<double> pos, neg;
    for (const auto& m : modes)
        (m.n > 0 ? pos : neg).push_back(std::abs(m.lambda));
    for (auto* branch : {&pos, &neg}) {
        std::sort(branch->begin(), branch->end());
        for (std::size_t k = 2; k < branch->size(); ++k)
            if (!((*branch)[k] - (*branch)[k - 1] > (*branch)[k - 1] - (*branch)[k - 2]))
                return false;
    }
    return true;
}

} // namespace kdvstab
