#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kdvstab/errors.hpp"
#include "kdvstab/modal_spectrum.hpp"
#include "kdvstab/observability.hpp"
#include "kdvstab/quadrature.hpp"
#include "kdvstab/system_basis.hpp"

using namespace kdvstab;

namespace {

const double pi = 3.14159265358979323846;
const cplx I{0.0, 1.0};

bool has_generator(const CriticalEntry& e, int k, int l)
{
    return std::find(e.generators.begin(), e.generators.end(), std::make_pair(k, l)) != e.generators.end();
}

} // namespace

TEST_CASE("critical lengths below a bound")
{
    CriticalLengthSet seven = enumerate_critical(7.0);
    REQUIRE(seven.entries.size() == 1);
    CHECK(seven.entries[0].value == doctest::Approx(2 * pi));
    CHECK(has_generator(seven.entries[0], 1, 1));

    CriticalLengthSet ten = enumerate_critical(10.0);
    auto it = std::find_if(ten.entries.begin(), ten.entries.end(),
                           [](const CriticalEntry& e) { return std::abs(e.value - 9.5977) < 1e-4; });
    REQUIRE(it != ten.entries.end());
    CHECK(it->q == 7);
    CHECK(has_generator(*it, 1, 2));
    CHECK(has_generator(*it, 2, 1));

    CHECK(enumerate_critical(6.0).entries.empty());

    CriticalLengthSet big = enumerate_critical(40.0);
    for (std::size_t k = 0; k < big.entries.size(); ++k) {
        CHECK(big.entries[k].value <= 40.0);
        CHECK(big.entries[k].value == doctest::Approx(critical_length(big.entries[k].q)));
        if (k > 0)
            CHECK(big.entries[k].value > big.entries[k - 1].value);
    }
    // 49 = 3^2 + 3*5 + 5^2 = 0 + ... also 7^2 with k = 0 excluded: only (3,5) and (5,3)
    auto e49 = std::find_if(big.entries.begin(), big.entries.end(), [](const CriticalEntry& e) { return e.q == 49; });
    REQUIRE(e49 != big.entries.end());
    CHECK(e49->generators.size() == 2);
    CHECK_THROWS_AS(enumerate_critical(0.0), Error);
}

TEST_CASE("critical membership with tolerance")
{
    CriticalCheck one = is_critical(1.0);
    CHECK_FALSE(one.critical);
    CHECK(one.nearest.value == doctest::Approx(2 * pi));

    CHECK(is_critical(2 * pi, 1e-9).critical);

    CriticalCheck near = is_critical(2 * pi + 1e-3, 1e-6);
    CHECK_FALSE(near.critical);
    CHECK(near.distance == doctest::Approx(1e-3).epsilon(1e-6));

    CHECK(is_critical(critical_length(7)).critical);
    CHECK(is_critical(critical_length(7) + 1e-10).critical);
}

TEST_CASE("trace series of a real mode pair matches the direct formula")
{
    auto modes = lift_modes(scan_eigenvalues(1.0, 2));
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(modes->size());
    c[0] = 0.5;
    c[1] = 0.5;
    ModalState state = make_state(modes, c);
    REQUIRE(state.reality);
    const double T = 0.3;
    const int samples = 301;
    Eigen::VectorXcd y = boundary_trace_series(state, T, samples);
    const SystemMode& m = (*modes)[0];
    cplx delta = m.u_slope0(); // (c+ + c-) v'(0) / sqrt2 with c+ = c- = 1/2
    for (int k = 0; k < samples; ++k) {
        double t = T * k / (samples - 1);
        double direct = (0.5 * delta * std::exp(I * m.mu * t) + 0.5 * std::conj(delta) * std::exp(-I * m.mu * t)).real();
        CHECK(std::abs(y[k] - direct) < 1e-12 * (1 + std::abs(delta)));
        CHECK(std::abs(y[k].imag()) < 1e-10);
    }
}

TEST_CASE("trace series of real random states are real on both sides")
{
    auto modes = lift_modes(scan_eigenvalues(1.0, 8));
    for (ControlSide side : {ControlSide::left_eta, ControlSide::right_w}) {
        Eigen::VectorXcd y = boundary_trace_series(random_real_state(modes, 3), 1.0, 1001, side);
        CHECK(y.imag().cwiseAbs().maxCoeff() < 1e-10 * (1 + y.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("at L = 2 pi the degenerate mode leaves no boundary trace")
{
    auto scalar = scan_eigenvalues(2 * pi, 8);
    auto modes = lift_modes(scalar);
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(modes->size());
    for (std::size_t k = 0; k < modes->size(); ++k)
        if (std::abs((*modes)[k].base.trace_vp0) < 1e-6)
            c[k] = 1.0;
    REQUIRE(c.cwiseAbs().maxCoeff() > 0.0);
    Eigen::VectorXcd y = boundary_trace_series(make_state(modes, c), 5.0, 501);
    CHECK(y.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mean trace energy approaches the sum of squared trace coefficients")
{
    auto modes = lift_modes(scan_eigenvalues(1.0, 8));
    ModalState state = random_real_state(modes, 17);
    std::vector<double> mu;
    for (const auto& m : *modes)
        mu.push_back(m.mu);
    std::sort(mu.begin(), mu.end());
    double min_gap = 1e300;
    for (std::size_t k = 1; k < mu.size(); ++k)
        min_gap = std::min(min_gap, mu[k] - mu[k - 1]);
    const double T = 50.0 / min_gap;
    double target = 0.0;
    for (std::size_t k = 0; k < modes->size(); ++k)
        target += std::norm(state.coeffs[k] * observed_trace((*modes)[k], ControlSide::left_eta));
    double mean = trace_energy(state, T) / T;
    CHECK(std::abs(mean - target) < 0.05 * target);
}

TEST_CASE("trace energy agrees with Simpson on explicit samples")
{
    auto modes = lift_modes(scan_eigenvalues(1.0, 4));
    ModalState state = random_real_state(modes, 23);
    const double T = 0.7;
    int intervals = trace_intervals(*modes, T);
    CHECK(intervals % 2 == 0);
    CHECK(intervals >= 64);
    Eigen::VectorXcd y = boundary_trace_series(state, T, intervals + 1);
    double direct = simpson(Eigen::VectorXd(y.cwiseAbs2()), T / intervals);
    CHECK(std::abs(trace_energy(state, T) - direct) < 1e-10 * direct);
}

TEST_CASE("closed-form Simpson of exponentials matches the sampled rule")
{
    for (double delta : {0.0, 1.0, -37.5, 2 * pi * 10.0, 1234.5}) {
        for (int intervals : {2, 64, 1000}) {
            const double T = 2.0;
            Eigen::VectorXcd f(intervals + 1);
            for (int k = 0; k <= intervals; ++k)
                f[k] = std::exp(I * delta * (T * k / intervals));
            cplx sampled = simpson(f, T / intervals);
            CHECK(std::abs(simpson_exponential(delta, T, intervals) - sampled) < 1e-11 * (1 + std::abs(sampled)));
        }
    }
}

TEST_CASE("Ingham constants at L = 1 are bounded away from zero")
{
    for (ControlSide side : {ControlSide::left_eta, ControlSide::right_w}) {
        auto modes = lift_modes(scan_eigenvalues(1.0, 16));
        InghamReport rep = ingham_constants(modes, 1.0, 64, 5, side);
        CHECK_FALSE(rep.critical_length);
        CHECK(rep.trials == 64);
        CHECK(rep.trial_ratios.size() == 64);
        CHECK(rep.mode_ratios.size() == modes->size());
        CHECK(rep.c_lower > 0.0);
        CHECK(rep.c_lower <= rep.C_upper);
        CHECK(std::isfinite(rep.C_upper));
        CHECK(rep.c_lower >= 1e-6 * rep.C_upper);
        for (double r : rep.trial_ratios) {
            CHECK(r >= rep.c_lower);
            CHECK(r <= rep.C_upper);
        }
        MESSAGE("L=1 " << std::string(to_string(side)) << ": c_lower/C_upper = " << rep.c_lower / rep.C_upper);
    }
}

TEST_CASE("Ingham constants are monotone in the observation time")
{
    auto modes = lift_modes(scan_eigenvalues(1.0, 8));
    InghamReport a = ingham_constants(modes, 0.5, 32, 3);
    InghamReport b = ingham_constants(modes, 1.0, 32, 3);
    CHECK(b.c_lower >= a.c_lower * (1 - 1e-9));
    CHECK(b.C_upper >= a.C_upper * (1 - 1e-9));
}

TEST_CASE("Ingham constants collapse at the critical length 2 pi")
{
    auto modes = lift_modes(scan_eigenvalues(2 * pi, 16));
    InghamReport rep = ingham_constants(modes, 1.0, 64, 5);
    CHECK(rep.critical_length);
    CHECK(rep.c_lower < 1e-8 * rep.C_upper);
}

TEST_CASE("trace non-vanishing report")
{
    auto modes = scan_eigenvalues(1.0, 32);
    TraceReport rep = trace_nonvanishing(modes);
    CHECK(rep.min_ratio > 0.0);
    CHECK(rep.flagged.empty());
    REQUIRE(rep.ratios.size() == 32);
    // the last four modes of each branch share the same limit
    for (int sign : {1, -1}) {
        std::vector<std::pair<int, double>> tail;
        for (std::size_t k = 0; k < rep.n.size(); ++k)
            if (rep.n[k] * sign > 0)
                tail.push_back({std::abs(rep.n[k]), rep.ratios[k]});
        std::sort(tail.begin(), tail.end());
        tail.erase(tail.begin(), tail.end() - 4);
        double lo = 1e300, hi = 0.0;
        for (auto [n, r] : tail) {
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        CHECK((hi - lo) / hi < 0.10);
    }
    CHECK(gaps_increasing(modes));

    TraceReport critical = trace_nonvanishing(scan_eigenvalues(2 * pi, 8));
    CHECK(critical.flagged.size() >= 1);

    try {
        trace_nonvanishing({});
        FAIL("expected EmptyInput");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::empty_input);
    }
}
