#include "kdvstab/gramian_feedback.hpp"

#include <Eigen/Eigenvalues>

#include "kdvstab/errors.hpp"

namespace kdvstab {

namespace {

const cplx I(0.0, 1.0);

void require_modes(const ModeSetPtr& modes)
{
    if (!modes || modes->empty())
        fail(ErrorKind::empty_input, "mode list is empty");
}

} // namespace

Eigen::VectorXcd control_traces(const ModeSet& modes, ControlSide side)
{
    Eigen::VectorXcd b(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k)
        b[k] = control_trace(modes[k], side);
    return b;
}

Eigen::MatrixXcd gramian_matrix(const ModeSet& modes, double omega, ControlSide side)
{
    if (!(omega > 0.0))
        fail(ErrorKind::invalid_argument, "omega must be positive");
    Eigen::VectorXcd b = control_traces(modes, side);
    const Eigen::Index n = b.size();
    Eigen::MatrixXcd g(n, n);
    for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index k = 0; k < n; ++k)
            g(m, k) = std::conj(b[m]) * b[k] / (2.0 * omega - I * (modes[k].mu - modes[m].mu));
    return g;
}

GramianOperator assemble_gramian(ModeSetPtr modes, double omega, ControlSide side)
{
    require_modes(modes);
    GramianOperator gram;
    gram.omega = omega;
    gram.side = side;
    gram.traces = control_traces(*modes, side);
    gram.matrix = gramian_matrix(*modes, omega, side);
    gram.modes = std::move(modes);
    gram.factor.compute(gram.matrix);
    if (gram.factor.info() != Eigen::Success)
        fail(ErrorKind::not_positive_definite, "Gramian factorization failed");
    Eigen::VectorXd pivots = gram.factor.matrixLLT().diagonal().real().cwiseAbs2();
    gram.min_pivot_ratio = pivots.minCoeff() / pivots.maxCoeff();
    if (!(gram.min_pivot_ratio > min_relative_pivot))
        fail(ErrorKind::not_positive_definite,
             "Gramian is numerically singular (relative pivot " + std::to_string(gram.min_pivot_ratio) +
                 "); a mode has a vanishing boundary trace");
    return gram;
}

double hermitian_defect(const Eigen::MatrixXcd& m)
{
    return (m - m.adjoint()).cwiseAbs().maxCoeff() / m.cwiseAbs().maxCoeff();
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m)
{
    Eigen::MatrixXcd sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        fail(ErrorKind::convergence_failure, "Hermitian eigensolver failed");
    return es.eigenvalues();
}

ModalState solve_lax_milgram(const GramianOperator& gram, const ModalState& state)
{
    if (gram.factor.info() != Eigen::Success || gram.matrix.rows() == 0)
        fail(ErrorKind::singular_gramian, "Gramian has no valid factorization");
    if (state.modes != gram.modes && (!state.modes || state.modes->size() != gram.modes->size()))
        fail(ErrorKind::invalid_argument, "state and Gramian use different mode lists");
    Eigen::VectorXcd p = gram.factor.solve(state.coeffs);
    if (!p.allFinite())
        fail(ErrorKind::singular_gramian, "Lax-Milgram solve produced non-finite values");
    return make_state(gram.modes, p);
}

FeedbackLaw make_law(ModeSetPtr modes, double omega, ControlSide side, Eigen::RowVectorXcd gain)
{
    require_modes(modes);
    if (gain.size() != static_cast<Eigen::Index>(modes->size()))
        fail(ErrorKind::invalid_argument, "gain length differs from mode count");
    FeedbackLaw law;
    law.omega = omega;
    law.side = side;
    law.input = control_traces(*modes, side).conjugate();
    law.gain = std::move(gain);
    law.modes = std::move(modes);
    return law;
}

FeedbackLaw feedback_gain(const GramianOperator& gram)
{
    if (gram.factor.info() != Eigen::Success || gram.matrix.rows() == 0)
        fail(ErrorKind::singular_gramian, "Gramian has no valid factorization");
    // g = -b^T G^{-1} = -(G^{-1} conj(b))^H since G is Hermitian
    Eigen::VectorXcd z = gram.factor.solve(gram.traces.conjugate());
    if (!z.allFinite())
        fail(ErrorKind::singular_gramian, "feedback gain is not finite");
    return make_law(gram.modes, gram.omega, gram.side, -z.adjoint());
}

FeedbackLaw embed_law(const FeedbackLaw& law, ModeSetPtr plant_modes)
{
    require_modes(plant_modes);
    require_modes(law.modes);
    Eigen::RowVectorXcd gain = Eigen::RowVectorXcd::Zero(plant_modes->size());
    for (std::size_t k = 0; k < plant_modes->size(); ++k) {
        const SystemMode& pm = (*plant_modes)[k];
        for (std::size_t j = 0; j < law.modes->size(); ++j) {
            const SystemMode& dm = (*law.modes)[j];
            if (dm.base.n == pm.base.n && dm.sign == pm.sign) {
                gain[k] = law.gain[j];
                break;
            }
        }
    }
    return make_law(std::move(plant_modes), law.omega, law.side, std::move(gain));
}

Eigen::MatrixXcd open_loop_matrix(const ModeSet& modes)
{
    Eigen::VectorXcd d(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k)
        d[k] = I * modes[k].mu;
    return d.asDiagonal();
}

Eigen::MatrixXcd closed_loop_matrix(const FeedbackLaw& law)
{
    require_modes(law.modes);
    return open_loop_matrix(*law.modes) + law.input * law.gain;
}

double spectral_abscissa(const Eigen::MatrixXcd& m)
{
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    if (es.info() != Eigen::Success)
        fail(ErrorKind::convergence_failure, "eigensolver failed on closed-loop matrix");
    return es.eigenvalues().real().maxCoeff();
}

} // namespace kdvstab
