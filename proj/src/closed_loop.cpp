#include "kdvstab/closed_loop.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "kdvstab/errors.hpp"

namespace kdvstab {

namespace {

const cplx I(0.0, 1.0);
constexpr double norm_floor = 1e-30;
constexpr double blowup_factor = 1e3;

long step_count(const SimConfig& cfg)
{
    if (!(cfg.t_max > 0.0) || !(cfg.dt > 0.0) || cfg.dt > cfg.t_max)
        fail(ErrorKind::invalid_argument, "need 0 < dt <= t_max");
    if (cfg.record_stride < 1)
        fail(ErrorKind::invalid_argument, "record_stride must be positive");
    return static_cast<long>(std::ceil(cfg.t_max / cfg.dt - 1e-9));
}

Eigen::VectorXd h1_weights(const ModeSet& modes)
{
    Eigen::VectorXd w(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k)
        w[k] = hs_weight(modes[k], 1.0);
    return w;
}

Eigen::RowVectorXcd observation_row(const ModeSet& modes, ControlSide side)
{
    Eigen::RowVectorXcd row(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k)
        row[k] = observed_trace(modes[k], side);
    return row;
}

void require_state(const ModalState& state)
{
    if (!state.modes || state.modes->empty())
        fail(ErrorKind::empty_input, "state has no modes");
    if (state.coeffs.size() != static_cast<Eigen::Index>(state.modes->size()))
        fail(ErrorKind::invalid_argument, "coefficient count differs from mode count");
}

} // namespace

const char* to_string(Integrator integrator)
{
    return integrator == Integrator::exact_expm ? "exact_expm" : "trapezoidal";
}

Integrator parse_integrator(const std::string& text)
{
    if (text == "exact_expm" || text == "exact")
        return Integrator::exact_expm;
    if (text == "trapezoidal")
        return Integrator::trapezoidal;
    fail(ErrorKind::invalid_argument, "unknown integrator '" + text + "'");
}

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& norms)
{
    if (times.size() != norms.size() || times.empty())
        fail(ErrorKind::degenerate_fit, "time and norm series differ in length or are empty");
    const double t_end = times.back();
    const double t_start = 0.2 * t_end;
    std::vector<double> t, y;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t_start - 1e-12 * std::abs(t_end))
            continue;
        t.push_back(times[k]);
        y.push_back(std::log(std::max(norms[k], norm_floor)));
    }
    if (t.size() < 10)
        fail(ErrorKind::degenerate_fit, "fewer than 10 samples in the fit window");
    const double n = static_cast<double>(t.size());
    double tm = 0.0, ym = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        tm += t[k];
        ym += y[k];
    }
    tm /= n;
    ym /= n;
    double stt = 0.0, sty = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        stt += (t[k] - tm) * (t[k] - tm);
        sty += (t[k] - tm) * (y[k] - ym);
    }
    if (!(stt > 0.0))
        fail(ErrorKind::degenerate_fit, "fit window has zero time spread");
    DecayFit fit;
    fit.rate = sty / stt;
    fit.intercept = ym - fit.rate * tm;
    fit.samples = static_cast<int>(t.size());
    double ss = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        double r = y[k] - (fit.intercept + fit.rate * t[k]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

double envelope_constant(const SimResult& result, double rate)
{
    if (result.h1_norms.empty() || !(result.h1_norms.front() > 0.0))
        return 0.0;
    double c = 0.0;
    for (std::size_t k = 0; k < result.times.size(); ++k)
        c = std::max(c, result.h1_norms[k] * std::exp(-rate * result.times[k]));
    return c / result.h1_norms.front();
}

SimResult simulate_open_loop(const ModalState& state0, const SimConfig& cfg, ControlSide side)
{
    require_state(state0);
    const long steps = step_count(cfg);
    const ModeSet& modes = *state0.modes;
    Eigen::VectorXd w = h1_weights(modes);
    Eigen::RowVectorXcd obs = observation_row(modes, side);
    Eigen::VectorXd mu(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k)
        mu[k] = modes[k].mu;

    SimResult res;
    for (long s = 0; s <= steps; s += cfg.record_stride) {
        double t = s * cfg.dt;
        Eigen::VectorXcd c(modes.size());
        for (Eigen::Index k = 0; k < c.size(); ++k)
            c[k] = std::polar(1.0, mu[k] * t) * state0.coeffs[k];
        res.times.push_back(t);
        res.h1_norms.push_back(std::sqrt((w.array() * c.array().abs2()).sum()));
        res.control.push_back(0.0);
        res.observation.push_back((obs * c).value());
    }
    DecayFit fit = fit_decay(res.times, res.h1_norms);
    res.fitted_rate = fit.rate;
    res.residual = fit.residual;
    return res;
}

SimResult simulate_closed_loop(const ModalState& state0, const FeedbackLaw& law, const SimConfig& cfg)
{
    require_state(state0);
    if (!law.modes || law.modes->size() != state0.modes->size())
        fail(ErrorKind::invalid_argument, "feedback law and state use different mode lists");
    const long steps = step_count(cfg);
    const ModeSet& modes = *state0.modes;
    Eigen::VectorXd w = h1_weights(modes);
    Eigen::RowVectorXcd obs = observation_row(modes, law.side);

    Eigen::MatrixXcd k_mat = open_loop_matrix(modes) + law.input * law.gain;
    const Eigen::Index n = k_mat.rows();
    Eigen::MatrixXcd step;
    SimResult res;
    if (cfg.integrator == Integrator::exact_expm) {
        step = (k_mat * cfg.dt).exp();
    } else {
        double max_mu = 0.0;
        for (const auto& m : modes)
            max_mu = std::max(max_mu, std::abs(m.mu));
        if (cfg.dt * max_mu > 0.5)
            res.warnings.push_back("trapezoidal step dt*max|mu| = " + std::to_string(cfg.dt * max_mu) +
                                   " exceeds the recommended bound 0.5");
        Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
        step = (id - 0.5 * cfg.dt * k_mat).partialPivLu().solve(id + 0.5 * cfg.dt * k_mat);
    }

    Eigen::VectorXcd c = state0.coeffs;
    const double norm0 = std::sqrt((w.array() * c.array().abs2()).sum());
    for (long s = 0; s <= steps; ++s) {
        double norm = std::sqrt((w.array() * c.array().abs2()).sum());
        if (norm0 > 0.0 && norm > blowup_factor * norm0)
            fail(ErrorKind::unstable_integration,
                 "H1 norm grew beyond 1e3 times its initial value at t=" + std::to_string(s * cfg.dt));
        if (s % cfg.record_stride == 0) {
            cplx f = law.evaluate(c);
            res.times.push_back(s * cfg.dt);
            res.h1_norms.push_back(norm);
            res.control.push_back(f.real());
            res.control_imag_max = std::max(res.control_imag_max, std::abs(f.imag()));
            res.observation.push_back((obs * c).value());
        }
        if (s < steps)
            c = step * c;
    }
    DecayFit fit = fit_decay(res.times, res.h1_norms);
    res.fitted_rate = fit.rate;
    res.residual = fit.residual;
    return res;
}

} // namespace kdvstab
