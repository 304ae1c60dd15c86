#include <doctest.h>

#include <cmath>
#include <random>

#include "kdvstab/errors.hpp"
#include "kdvstab/modal_spectrum.hpp"
#include "kdvstab/quadrature.hpp"
#include "kdvstab/system_basis.hpp"

using namespace kdvstab;

namespace {

const cplx I{0.0, 1.0};

ModeSetPtr modes_at(double L, int scalar_count)
{
    return lift_modes(scan_eigenvalues(L, scalar_count));
}

Eigen::VectorXcd random_coeffs(Eigen::Index n, unsigned seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXcd c(n);
    for (auto& v : c)
        v = cplx(normal(gen), normal(gen));
    return c;
}

} // namespace

TEST_CASE("lift_modes doubles the mode list in (n ascending, + before -) order")
{
    auto scalar = scan_eigenvalues(1.0, 6);
    auto modes = lift_modes(scalar);
    REQUIRE(modes->size() == 12);
    for (std::size_t k = 0; k < modes->size(); ++k) {
        const SystemMode& m = (*modes)[k];
        CHECK(m.sign == (k % 2 == 0 ? 1 : -1));
        CHECK(m.mu == m.sign * m.base.lambda);
        if (k >= 2)
            CHECK(m.base.n > (*modes)[k - 2].base.n);
    }
}

TEST_CASE("both signs of a scalar mode share the same input trace")
{
    auto modes = modes_at(1.0, 8);
    for (std::size_t k = 0; k < modes->size(); k += 2) {
        const SystemMode& plus = (*modes)[k];
        const SystemMode& minus = (*modes)[k + 1];
        CHECK(plus.beta == minus.beta);
        CHECK(plus.beta == doctest::Approx(-plus.base.trace_vp0.real() / std::sqrt(2.0)));
        CHECK(std::abs(control_trace(plus, ControlSide::left_eta) - plus.beta) == 0.0);
        // components of the - mode are conjugates of the + mode
        for (double x : {0.1, 0.5, 0.77}) {
            CHECK(std::abs(minus.theta(x) - std::conj(plus.theta(x))) < 1e-12);
            CHECK(std::abs(minus.u(x) - std::conj(plus.u(x))) < 1e-12);
        }
        CHECK(std::abs(minus.output_trace_L - std::conj(plus.output_trace_L)) < 1e-10 * std::abs(plus.output_trace_L));
    }
}

TEST_CASE("control side names round trip")
{
    CHECK(parse_control_side("left-eta") == ControlSide::left_eta);
    CHECK(parse_control_side("right_w") == ControlSide::right_w);
    CHECK(std::string(to_string(ControlSide::right_w)) == "right-w");
    CHECK_THROWS_AS(parse_control_side("middle"), Error);
}

TEST_CASE("the lifted basis is orthonormal under quadrature")
{
    for (double L : {1.0, 3.0}) {
        auto modes = modes_at(L, 16);
        Eigen::MatrixXcd g = system_gram(*modes, required_intervals(*modes));
        CHECK((g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("synthesize then project recovers the coefficients")
{
    auto modes = modes_at(1.0, 8);
    ModalState state = make_state(modes, random_coeffs(modes->size(), 3));
    SampledPair samples = synthesize(state, required_intervals(*modes));
    ModalState back = project(samples, modes);
    CHECK((back.coeffs - state.coeffs).cwiseAbs().maxCoeff() < 1e-6);
    CHECK_FALSE(back.reality);
}

TEST_CASE("projecting a single sampled mode gives a unit coefficient")
{
    auto modes = modes_at(1.0, 8);
    Eigen::Index target = -1;
    for (std::size_t k = 0; k < modes->size(); ++k)
        if ((*modes)[k].base.n == 3 && (*modes)[k].sign == 1)
            target = static_cast<Eigen::Index>(k);
    REQUIRE(target >= 0);
    int intervals = required_intervals(*modes);
    SampledPair samples;
    samples.length = 1.0;
    samples.x = Eigen::VectorXd::LinSpaced(intervals + 1, 0.0, 1.0);
    samples.eta.resize(intervals + 1);
    samples.w.resize(intervals + 1);
    for (int k = 0; k <= intervals; ++k) {
        samples.eta[k] = (*modes)[target].theta(samples.x[k]);
        samples.w[k] = (*modes)[target].u(samples.x[k]);
    }
    ModalState state = project(samples, modes);
    for (Eigen::Index k = 0; k < state.coeffs.size(); ++k)
        CHECK(std::abs(state.coeffs[k] - (k == target ? 1.0 : 0.0)) < 1e-6);
}

TEST_CASE("real data stays real through synthesis and projection")
{
    auto modes = modes_at(1.0, 8);
    ModalState state = random_real_state(modes, 11);
    CHECK(state.reality);
    CHECK(conjugate_paired(*modes, state.coeffs));
    SampledPair samples = synthesize(state, required_intervals(*modes));
    CHECK(samples.eta.imag().cwiseAbs().maxCoeff() < 1e-10);
    CHECK(samples.w.imag().cwiseAbs().maxCoeff() < 1e-10);
    ModalState back = project(samples, modes);
    CHECK(conjugate_paired(*modes, back.coeffs, 1e-10));
}

TEST_CASE("zero coefficients synthesize to zero functions")
{
    auto modes = modes_at(1.0, 4);
    ModalState state = make_state(modes, Eigen::VectorXcd::Zero(modes->size()));
    SampledPair samples = synthesize(state, 200);
    CHECK(samples.eta.cwiseAbs().maxCoeff() == 0.0);
    CHECK(samples.w.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-mode synthesis samples the closed-form eigenfunction")
{
    auto modes = modes_at(1.0, 4);
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(modes->size());
    c[2] = 1.0;
    SampledPair samples = synthesize(make_state(modes, c), 100);
    for (int k = 0; k <= 100; k += 10) {
        CHECK(std::abs(samples.eta[k] - (*modes)[2].theta(samples.x[k])) < 1e-13);
        CHECK(std::abs(samples.w[k] - (*modes)[2].u(samples.x[k])) < 1e-13);
    }
}

TEST_CASE("Parseval: quadrature norm of the synthesis equals the s = 0 norm")
{
    auto modes = modes_at(1.0, 8);
    ModalState state = make_state(modes, random_coeffs(modes->size(), 5));
    int intervals = required_intervals(*modes);
    SampledPair samples = synthesize(state, intervals);
    Eigen::VectorXd density = samples.eta.cwiseAbs2() + samples.w.cwiseAbs2();
    double l2 = std::sqrt(simpson(density, 1.0 / intervals));
    CHECK(std::abs(l2 - hs_norm(state, 0.0)) < 1e-6 * hs_norm(state, 0.0));
}

TEST_CASE("H_s norm examples")
{
    auto modes = modes_at(1.0, 4);
    for (std::size_t k = 0; k < modes->size(); ++k) {
        Eigen::VectorXcd c = Eigen::VectorXcd::Zero(modes->size());
        c[k] = 1.0;
        ModalState state = make_state(modes, c);
        CHECK(hs_norm(state, 0.0) == doctest::Approx(1.0));
        CHECK(hs_norm(state, 1.0) == doctest::Approx(std::cbrt(1.0 + std::abs((*modes)[k].base.lambda))));
    }
    ModalState state = make_state(modes, random_coeffs(modes->size(), 8));
    double previous = 0.0;
    for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) {
        double v = hs_norm(state, s);
        CHECK(v >= previous);
        previous = v;
    }
    // the norm does not vanish on c+ = -c-
    Eigen::VectorXcd anti = Eigen::VectorXcd::Zero(modes->size());
    anti[0] = 1.0;
    anti[1] = -1.0;
    CHECK(hs_norm(make_state(modes, anti), 0.0) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("trace coefficients delta_n = (c+ + c-) v'(0) / sqrt2")
{
    auto modes = modes_at(1.0, 6);
    ModalState state = make_state(modes, random_coeffs(modes->size(), 21));
    Eigen::VectorXcd delta = delta_coefficients(state);
    REQUIRE(delta.size() == 6);
    for (Eigen::Index n = 0; n < delta.size(); ++n) {
        const SystemMode& plus = (*modes)[2 * n];
        cplx expected = (state.coeffs[2 * n] + state.coeffs[2 * n + 1]) * plus.base.trace_vp0 / std::sqrt(2.0);
        CHECK(std::abs(delta[n] - expected) < 1e-12 * (1 + std::abs(expected)));
        cplx direct = state.coeffs[2 * n] * plus.u_slope0() + state.coeffs[2 * n + 1] * (*modes)[2 * n + 1].u_slope0();
        CHECK(std::abs(delta[n] - direct) < 1e-12 * (1 + std::abs(expected)));
    }
}

TEST_CASE("projection rejects under-resolved grids")
{
    auto modes = modes_at(1.0, 8);
    ModalState state = make_state(modes, random_coeffs(modes->size(), 1));
    SampledPair samples = synthesize(state, 50);
    try {
        project(samples, modes);
        FAIL("expected GridTooCoarse");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::grid_too_coarse);
    }
    CHECK(resolution_number(*modes, 1.0 / required_intervals(*modes)) <= 0.02);
}

TEST_CASE("random real states are seeded, paired and unit in H_1")
{
    auto modes = modes_at(1.0, 8);
    ModalState a = random_real_state(modes, 42);
    ModalState b = random_real_state(modes, 42);
    ModalState c = random_real_state(modes, 42, 1);
    CHECK(a.coeffs == b.coeffs);
    CHECK(a.coeffs != c.coeffs);
    CHECK(hs_norm(a, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(conjugate_paired(*modes, a.coeffs));
    CHECK(hs_weight((*modes)[0], 1.0) == doctest::Approx(std::pow(1.0 + std::abs((*modes)[0].base.lambda), 2.0 / 3.0)));
}
