#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kdvstab/gramian_feedback.hpp"

namespace kdvstab {

enum class Integrator { exact_expm, trapezoidal };

struct SimConfig {
    double t_max = 10.0;
    double dt = 0.01;
    int record_stride = 1;
    Integrator integrator = Integrator::exact_expm;
};

struct SimResult {
    std::vector<double> times;
    std::vector<double> h1_norms;
    std::vector<double> control;          // Re f(t)
    double control_imag_max = 0.0;        // max |Im f(t)|, zero for real data
    std::vector<cplx> observation;        // boundary trace of the state
    double fitted_rate = 0.0;
    double residual = 0.0;
    std::vector<std::string> warnings;
};

struct DecayFit {
    double rate = 0.0;
    double residual = 0.0;
    double intercept = 0.0;
    int samples = 0;
};

// Least squares slope of log(max(norm, 1e-30)) on t in [0.2 t_end, t_end].
DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& norms);

// max_k norm_k e^{-rate t_k} / norm_0: the constant C in norm(t) <= C e^{rate t} norm(0).
double envelope_constant(const SimResult& result, double rate);

SimResult simulate_open_loop(const ModalState& state0, const SimConfig& cfg,
                             ControlSide side = ControlSide::left_eta);
SimResult simulate_closed_loop(const ModalState& state0, const FeedbackLaw& law, const SimConfig& cfg);

const char* to_string(Integrator integrator);
Integrator parse_integrator(const std::string& text);

} // namespace kdvstab
