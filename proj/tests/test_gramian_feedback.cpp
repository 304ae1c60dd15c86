#include <doctest.h>

#include <cmath>

#include "kdvstab/errors.hpp"
#include "kdvstab/gramian_feedback.hpp"
#include "kdvstab/modal_spectrum.hpp"
#include "kdvstab/quadrature_oracle.hpp"
#include "kdvstab/system_basis.hpp"

using namespace kdvstab;

namespace {

const double pi = 3.14159265358979323846;
const cplx I{0.0, 1.0};

ModeSetPtr single_mode(double L, std::size_t index)
{
    auto all = lift_modes(scan_eigenvalues(L, 4));
    return std::make_shared<const ModeSet>(ModeSet{(*all)[index]});
}

} // namespace

TEST_CASE("single mode: Gramian, Lax-Milgram solution, gain and pole")
{
    for (ControlSide side : {ControlSide::left_eta, ControlSide::right_w}) {
        for (double omega : {0.25, 1.0}) {
            auto modes = single_mode(1.0, 2);
            const SystemMode& m = (*modes)[0];
            cplx b = control_trace(m, side);
            GramianOperator gram = assemble_gramian(modes, omega, side);
            CHECK(std::abs(gram.matrix(0, 0) - std::norm(b) / (2 * omega)) < 1e-12 * std::norm(b));

            ModalState state = make_state(modes, Eigen::VectorXcd::Constant(1, cplx(0.3, -0.4)));
            ModalState p = solve_lax_milgram(gram, state);
            CHECK(std::abs(p.coeffs[0] - state.coeffs[0] * 2.0 * omega / std::norm(b)) < 1e-12);

            FeedbackLaw law = feedback_gain(gram);
            CHECK(std::abs(law.gain[0]) == doctest::Approx(2 * omega / std::abs(b)));
            if (side == ControlSide::left_eta)
                CHECK(std::abs(law.gain[0] - (-2 * omega / m.beta)) < 1e-12 * std::abs(law.gain[0]));
            Eigen::MatrixXcd a = closed_loop_matrix(law);
            CHECK(std::abs(a(0, 0) - (I * m.mu - 2 * omega)) < 1e-10 * (1 + std::abs(m.mu)));
        }
    }
}

TEST_CASE("Gramian entries match adaptive quadrature of the defining integral")
{
    for (ControlSide side : {ControlSide::left_eta, ControlSide::right_w}) {
        for (double omega : {0.25, 1.0}) {
            auto modes = lift_modes(scan_eigenvalues(1.0, 4));
            GramianOperator gram = assemble_gramian(modes, omega, side);
            const double T = 40.0 / (2 * omega);
            double err = 0.0;
            for (Eigen::Index j = 0; j < gram.matrix.rows(); ++j)
                for (Eigen::Index k = 0; k < gram.matrix.cols(); ++k)
                    err = std::max(err, std::abs(gram.matrix(j, k) -
                                                 gramian_entry_quadrature(gram.traces[j], gram.traces[k], (*modes)[j].mu,
                                                                          (*modes)[k].mu, omega, T)));
            CHECK(err < 1e-6);
        }
    }
}

TEST_CASE("the oscillatory quadrature oracle reproduces elementary integrals")
{
    // int_0^T e^{-2 w t} e^{i d t} dt = (1 - e^{(i d - 2 w) T}) / (2 w - i d)
    for (double delta : {0.0, 3.0, -250.0, 1e4}) {
        double omega = 0.5, T = 7.0;
        cplx z = cplx(-2 * omega, delta);
        cplx expected = (std::exp(z * T) - 1.0) / z;
        CHECK(std::abs(damped_oscillation_integral(omega, delta, T) - expected) < 1e-10);
    }
}

TEST_CASE("Gramian is Hermitian positive definite away from critical lengths")
{
    for (double L : {1.0, 3.0}) {
        for (int count : {8, 16, 32}) {
            auto modes = lift_modes(scan_eigenvalues(L, count));
            for (double omega : {0.25, 0.5, 1.0, 2.0}) {
                for (ControlSide side : {ControlSide::left_eta, ControlSide::right_w}) {
                    Eigen::MatrixXcd g = gramian_matrix(*modes, omega, side);
                    CHECK(hermitian_defect(g) < 1e-12);
                    CHECK(hermitian_eigenvalues(g).minCoeff() > 0.0);
                    GramianOperator gram = assemble_gramian(modes, omega, side);
                    CHECK(gram.min_pivot_ratio > min_relative_pivot);
                    for (Eigen::Index k = 0; k < g.rows(); ++k)
                        CHECK(std::abs(g(k, k) - std::norm(gram.traces[k]) / (2 * omega)) < 1e-12 * std::abs(g(k, k)));
                }
            }
        }
    }
}

TEST_CASE("critical length: the degenerate mode makes the Gramian singular")
{
    auto modes = lift_modes(scan_eigenvalues(2 * pi, 8));
    Eigen::MatrixXcd g = gramian_matrix(*modes, 0.5, ControlSide::left_eta);
    Eigen::VectorXd ev = hermitian_eigenvalues(g);
    CHECK(ev.minCoeff() < 1e-8 * ev.maxCoeff());
    try {
        assemble_gramian(modes, 0.5, ControlSide::left_eta);
        FAIL("expected NotPositiveDefinite");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::not_positive_definite);
    }
}

TEST_CASE("Lax-Milgram: zero state and round trip")
{
    auto modes = lift_modes(scan_eigenvalues(1.0, 8));
    GramianOperator gram = assemble_gramian(modes, 0.5, ControlSide::left_eta);
    ModalState zero = make_state(modes, Eigen::VectorXcd::Zero(modes->size()));
    CHECK(solve_lax_milgram(gram, zero).coeffs.cwiseAbs().maxCoeff() == 0.0);

    ModalState c = random_real_state(modes, 9);
    ModalState p = solve_lax_milgram(gram, c);
    CHECK((gram.matrix * p.coeffs - c.coeffs).norm() < 1e-10 * c.coeffs.norm());

    ModalState gp = make_state(modes, gram.matrix * c.coeffs);
    CHECK((solve_lax_milgram(gram, gp).coeffs - c.coeffs).norm() < 1e-9 * c.coeffs.norm());
}

TEST_CASE("feedback of real states is real; zero state gives zero control")
{
    for (ControlSide side : {ControlSide::left_eta, ControlSide::right_w}) {
        auto modes = lift_modes(scan_eigenvalues(1.0, 8));
        FeedbackLaw law = feedback_gain(assemble_gramian(modes, 1.0, side));
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            cplx f = law.evaluate(random_real_state(modes, seed).coeffs);
            CHECK(std::abs(f.imag()) < 1e-10 * (1 + std::abs(f)));
        }
        CHECK(law.evaluate(Eigen::VectorXcd::Zero(modes->size())) == cplx(0.0));
        // g c = -sum_m b_m p_m with G p = c
        ModalState c = random_real_state(modes, 4);
        GramianOperator gram = assemble_gramian(modes, 1.0, side);
        ModalState p = solve_lax_milgram(gram, c);
        cplx expected = -(gram.traces.transpose() * p.coeffs).value();
        CHECK(std::abs(law.evaluate(c.coeffs) - expected) < 1e-10 * (1 + std::abs(expected)));
    }
}

TEST_CASE("closed-loop spectral abscissa reaches the prescribed rate")
{
    for (double L : {1.0, 3.0}) {
        for (int count : {8, 16}) {
            auto modes = lift_modes(scan_eigenvalues(L, count));
            for (double omega : {0.25, 0.5, 1.0, 2.0}) {
                for (ControlSide side : {ControlSide::left_eta, ControlSide::right_w}) {
                    FeedbackLaw law = feedback_gain(assemble_gramian(modes, omega, side));
                    CHECK(spectral_abscissa(closed_loop_matrix(law)) <= -2 * omega * (1 - 1e-3));
                    CHECK(spectral_abscissa(open_loop_matrix(*modes)) == doctest::Approx(0.0));
                }
            }
        }
    }
}

TEST_CASE("embedding a law in a larger plant keeps the design gains and zeros the rest")
{
    auto design = lift_modes(scan_eigenvalues(1.0, 8));
    auto plant = lift_modes(scan_eigenvalues(1.0, 12));
    FeedbackLaw law = feedback_gain(assemble_gramian(design, 0.5, ControlSide::left_eta));
    FeedbackLaw big = embed_law(law, plant);
    REQUIRE(big.gain.size() == static_cast<Eigen::Index>(plant->size()));
    int matched = 0;
    for (std::size_t k = 0; k < plant->size(); ++k) {
        bool found = false;
        for (std::size_t j = 0; j < design->size(); ++j) {
            if ((*design)[j].base.n == (*plant)[k].base.n && (*design)[j].sign == (*plant)[k].sign) {
                CHECK(big.gain[k] == law.gain[j]);
                found = true;
                ++matched;
            }
        }
        if (!found)
            CHECK(big.gain[k] == cplx(0.0));
    }
    CHECK(matched == 16);
}
