#pragma once

#include <cstdint>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kdvstab/modal_spectrum.hpp"

namespace kdvstab {

// Where the scalar control acts: eta_x(0) = f (left_eta) or w_x(L) = f (right_w).
enum class ControlSide { left_eta, right_w };

const char* to_string(ControlSide side);
ControlSide parse_control_side(const std::string& text);

// Eigenfunction of the coupled operator with frequency mu = sign * lambda:
//   theta(x) = -sign * (i / sqrt2) v(L - x),   u(x) = v(x) / sqrt2.
struct SystemMode {
    EigenMode base;
    int sign = 1;
    double mu = 0.0;
    double beta = 0.0;        // -u'(0), the left control trace
    cplx output_trace_L{};    // theta'(L), the right control trace

    cplx theta(double x) const;
    cplx u(double x) const;
    cplx u_slope0() const { return base.trace_vp0 / std::sqrt(2.0); }
};

using ModeSet = std::vector<SystemMode>;
using ModeSetPtr = std::shared_ptr<const ModeSet>;

// Two system modes per scalar mode, ordered by n ascending, + before -.
ModeSetPtr lift_modes(const std::vector<EigenMode>& scalar_modes);

// Value of B* on the mode for the given control side.
cplx control_trace(const SystemMode& mode, ControlSide side);

// Coefficient of the mode in the observed boundary trace: w_x(0) for left_eta,
// eta_x(L) for right_w.
cplx observed_trace(const SystemMode& mode, ControlSide side);

struct ModalState {
    double length = 0.0;
    ModeSetPtr modes;
    Eigen::VectorXcd coeffs;
    bool reality = false;
};

// True when every (n,-) coefficient is the conjugate of its (n,+) partner.
bool conjugate_paired(const ModeSet& modes, const Eigen::VectorXcd& coeffs, double tol = 1e-12);

// Wraps coefficients; the reality flag is set when conjugate pairing holds.
ModalState make_state(ModeSetPtr modes, Eigen::VectorXcd coeffs);

double hs_weight(const SystemMode& mode, double s);
double hs_norm(const ModalState& state, double s);

// Functions on the uniform grid x_k = k L / intervals, k = 0..intervals.
struct SampledPair {
    double length = 0.0;
    Eigen::VectorXd x;
    Eigen::VectorXcd eta;
    Eigen::VectorXcd w;
};

SampledPair synthesize(const ModalState& state, int intervals);
ModalState project(const SampledPair& samples, ModeSetPtr modes);

// Largest h * |r_j| over the mode set; Simpson projection requires <= 0.02.
double resolution_number(const ModeSet& modes, double h);

// Minimum number of intervals for which project() accepts a grid.
int required_intervals(const ModeSet& modes);

// Gram matrix <phi_k, phi_j> by Simpson quadrature.
Eigen::MatrixXcd system_gram(const ModeSet& modes, int intervals);

// delta_n = sum over sign of c_{n,sign} u'_{n,sign}(0), one entry per scalar mode.
Eigen::VectorXcd delta_coefficients(const ModalState& state);

// Standard complex Gaussian c_{n,+}, c_{n,-} = conj(c_{n,+}), unit H_s norm.
ModalState random_real_state(ModeSetPtr modes, std::uint64_t seed, std::uint64_t stream = 0,
                             double s = 1.0);

} // namespace kdvstab
