#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kdvstab/system_basis.hpp"

namespace kdvstab {

// Critical lengths 2 pi / sqrt3 * sqrt(k^2 + k l + l^2), k, l >= 1.
struct CriticalEntry {
    double value = 0.0;
    long q = 0; // k^2 + k l + l^2
    std::vector<std::pair<int, int>> generators;
};

struct CriticalLengthSet {
    double bound = 0.0;
    std::vector<CriticalEntry> entries;
};

double critical_length(long q);
CriticalLengthSet enumerate_critical(double bound);

struct CriticalCheck {
    bool critical = false;
    CriticalEntry nearest;
    double distance = 0.0;
};

CriticalCheck is_critical(double length, double tol = 1e-9);

// y(t_k) = sum_m c_m o_m exp(i mu_m t_k) on t_k = k T / (samples - 1), where o_m
// is the observed trace (w_x(0) for left_eta, eta_x(L) for right_w).
Eigen::VectorXcd boundary_trace_series(const ModalState& state, double T, int samples,
                                       ControlSide side = ControlSide::left_eta);

// Even Simpson interval count giving >= 20 points per period 2 pi / max |mu|.
int trace_intervals(const ModeSet& modes, double T);

// W[j][k] = Simpson approximation of int_0^T exp(i (mu_k - mu_j) t) dt; then
// int_0^T |y|^2 dt = g^H W g with g_m = c_m o_m.
Eigen::MatrixXcd trace_gram(const ModeSet& modes, double T, int intervals);

double trace_energy(const ModalState& state, double T, ControlSide side = ControlSide::left_eta);

struct InghamReport {
    double length = 0.0;
    ControlSide side = ControlSide::left_eta;
    double T = 0.0;
    int sample_count = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    double c_lower = 0.0;
    double C_upper = 0.0;
    std::vector<double> trial_ratios;
    std::vector<double> mode_ratios;
    // same ratios against the L2 norm; recorded only
    double l2_lower = 0.0;
    double l2_upper = 0.0;
    bool critical_length = false;
};

InghamReport ingham_constants(ModeSetPtr modes, double T, int trials, std::uint64_t seed,
                              ControlSide side = ControlSide::left_eta, double critical_tol = 1e-9);

struct TraceReport {
    std::vector<int> n;
    std::vector<double> ratios; // |v'(0)|^2 / (1 + |lambda|)^{2/3}
    double min_ratio = 0.0;
    std::vector<int> flagged;   // mode indices n with ratio below threshold
};

inline constexpr double trace_flag_threshold = 1e-8;

TraceReport trace_nonvanishing(const std::vector<EigenMode>& modes);

// Gaps between consecutive eigenvalues grow along both branches.
bool gaps_increasing(const std::vector<EigenMode>& modes);

} // namespace kdvstab
