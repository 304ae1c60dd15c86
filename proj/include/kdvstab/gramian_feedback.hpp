#pragma once

#include <string>

#include <Eigen/Dense>

#include "kdvstab/system_basis.hpp"

namespace kdvstab {

// Truncated stabilization Gramian
//   G[m][k] = conj(b_m) b_k / (2 omega - i (mu_k - mu_m)),
// the modal form of int_0^inf e^{-2 omega t} y_c(t) conj(y_d(t)) dt = d^H G c
// where y_c(t) = sum_k c_k b_k e^{i mu_k t} and b_k = B* phi_k.
struct GramianOperator {
    double omega = 0.0;
    ModeSetPtr modes;
    ControlSide side = ControlSide::left_eta;
    Eigen::VectorXcd traces;
    Eigen::MatrixXcd matrix;
    Eigen::LLT<Eigen::MatrixXcd> factor;
    double min_pivot_ratio = 0.0;
};

Eigen::VectorXcd control_traces(const ModeSet& modes, ControlSide side);
Eigen::MatrixXcd gramian_matrix(const ModeSet& modes, double omega, ControlSide side);

// Relative pivot threshold below which the factorization is rejected.
inline constexpr double min_relative_pivot = 1e-12;

GramianOperator assemble_gramian(ModeSetPtr modes, double omega, ControlSide side);

double hermitian_defect(const Eigen::MatrixXcd& m);
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m);

// p with G p = c.
ModalState solve_lax_milgram(const GramianOperator& gram, const ModalState& state);

struct FeedbackLaw {
    double omega = 0.0;
    ModeSetPtr modes;
    ControlSide side = ControlSide::left_eta;
    Eigen::RowVectorXcd gain;  // f = gain * c
    Eigen::VectorXcd input;    // modal input direction, conj(b)

    cplx evaluate(const Eigen::VectorXcd& coeffs) const { return (gain * coeffs).value(); }
};

// gain = -b^T G^{-1}, so that the closed loop is  c' = (iD + conj(b) gain) c.
FeedbackLaw feedback_gain(const GramianOperator& gram);

// A law with the given gain on the given modes (used for reloaded and zero gains).
FeedbackLaw make_law(ModeSetPtr modes, double omega, ControlSide side, Eigen::RowVectorXcd gain);

// Re-expresses a law on a larger plant mode set: modes absent from the design
// set get zero gain, the input direction comes from the plant's own traces.
FeedbackLaw embed_law(const FeedbackLaw& law, ModeSetPtr plant_modes);

Eigen::MatrixXcd open_loop_matrix(const ModeSet& modes);
Eigen::MatrixXcd closed_loop_matrix(const FeedbackLaw& law);
double spectral_abscissa(const Eigen::MatrixXcd& m);

} // namespace kdvstab
