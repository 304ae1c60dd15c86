// Command-line driver: spectrum, critical-lengths, synthesize, simulate, verify.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kdvstab/closed_loop.hpp"
#include "kdvstab/errors.hpp"
#include "kdvstab/fd_oracle.hpp"
#include "kdvstab/gramian_feedback.hpp"
#include "kdvstab/io.hpp"
#include "kdvstab/modal_spectrum.hpp"
#include "kdvstab/observability.hpp"
#include "kdvstab/quadrature.hpp"
#include "kdvstab/quadrature_oracle.hpp"
#include "kdvstab/system_basis.hpp"

using namespace kdvstab;
using nlohmann::ordered_json;

namespace {

const char* tool_version = "kdvstab 1.0.0";

enum ExitCode { exit_ok = 0, exit_usage = 1, exit_numerical = 2, exit_verification = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    double length = 1.0;
    double omega = 0.5;
    int n_modes = 16;
    double t_max = 10.0;
    double dt = 0.01;
    std::uint64_t seed = 1;
    ControlSide side = ControlSide::left_eta;
    std::string output_dir = ".";
    std::string format = "csv";
    bool allow_critical = false;
};

// Flag values as parsed; unset flags fall back to the config file, then defaults.
struct CommonFlags {
    std::string config_file;
    std::optional<double> length, omega, t_max, dt;
    std::optional<int> n_modes;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> side, output_dir, format;
    bool allow_critical = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config_file, "key=value configuration file");
    cmd->add_option("--length", f.length, "domain length L");
    cmd->add_option("--omega", f.omega, "half of the prescribed decay rate");
    cmd->add_option("--modes", f.n_modes, "number of scalar eigenpairs (even)");
    cmd->add_option("--tmax", f.t_max, "simulation horizon");
    cmd->add_option("--dt", f.dt, "time step");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--control-side", f.side, "left-eta or right-w");
    cmd->add_option("--format", f.format, "csv or json");
    cmd->add_option("--out", f.output_dir, "output directory");
    cmd->add_flag("--allow-critical", f.allow_critical, "permit lengths in the critical set");
}

template <typename T>
T parse_value(const std::string& key, const std::string& text)
{
    std::istringstream in(text);
    T value{};
    in >> value;
    if (in.fail() || !in.eof())
        throw UsageError("config value for '" + key + "' is not valid: '" + text + "'");
    return value;
}

bool parse_bool(const std::string& key, const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes")
        return true;
    if (text == "false" || text == "0" || text == "no")
        return false;
    throw UsageError("config value for '" + key + "' must be true or false");
}

RunConfig resolve_config(const CommonFlags& f)
{
    RunConfig cfg;
    if (!f.config_file.empty()) {
        std::map<std::string, std::string> kv;
        try {
            kv = parse_key_values(read_file(f.config_file));
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        for (const auto& [key, value] : kv) {
            if (key == "length")
                cfg.length = parse_value<double>(key, value);
            else if (key == "omega")
                cfg.omega = parse_value<double>(key, value);
            else if (key == "modes")
                cfg.n_modes = parse_value<int>(key, value);
            else if (key == "tmax")
                cfg.t_max = parse_value<double>(key, value);
            else if (key == "dt")
                cfg.dt = parse_value<double>(key, value);
            else if (key == "seed")
                cfg.seed = parse_value<std::uint64_t>(key, value);
            else if (key == "control-side")
                cfg.side = parse_control_side(value);
            else if (key == "out")
                cfg.output_dir = value;
            else if (key == "format")
                cfg.format = value;
            else if (key == "allow-critical")
                cfg.allow_critical = parse_bool(key, value);
            else
                throw UsageError("unknown config key '" + key + "'");
        }
    }
    if (f.length) cfg.length = *f.length;
    if (f.omega) cfg.omega = *f.omega;
    if (f.n_modes) cfg.n_modes = *f.n_modes;
    if (f.t_max) cfg.t_max = *f.t_max;
    if (f.dt) cfg.dt = *f.dt;
    if (f.seed) cfg.seed = *f.seed;
    if (f.side) cfg.side = parse_control_side(*f.side);
    if (f.output_dir) cfg.output_dir = *f.output_dir;
    if (f.format) cfg.format = *f.format;
    if (f.allow_critical) cfg.allow_critical = true;

    if (!(cfg.length > 0.0) || !std::isfinite(cfg.length))
        throw UsageError("--length must be positive");
    if (!(cfg.omega > 0.0))
        throw UsageError("--omega must be positive");
    if (cfg.n_modes <= 0 || cfg.n_modes % 2 != 0)
        throw UsageError("--modes must be a positive even integer");
    if (!(cfg.t_max > 0.0) || !(cfg.dt > 0.0) || cfg.dt > cfg.t_max)
        throw UsageError("need 0 < --dt <= --tmax");
    if (cfg.format != "csv" && cfg.format != "json")
        throw UsageError("--format must be csv or json");
    return cfg;
}

ordered_json config_json(const RunConfig& cfg)
{
    return {{"length", cfg.length},         {"omega", cfg.omega},
            {"modes", cfg.n_modes},         {"tmax", cfg.t_max},
            {"dt", cfg.dt},                 {"seed", cfg.seed},
            {"control-side", to_string(cfg.side)}, {"format", cfg.format},
            {"out", cfg.output_dir},        {"allow-critical", cfg.allow_critical}};
}

std::string out_path(const RunConfig& cfg, const std::string& name)
{
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

class Manifest {
public:
    Manifest(std::string command, ordered_json config)
        : command_(std::move(command)), config_(std::move(config)), start_(std::chrono::steady_clock::now())
    {
    }
    void add_output(const std::string& path) { outputs_.push_back(path); }
    void write(const std::string& dir, int exit_status, const std::string& message = "") const
    {
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        ordered_json j;
        j["tool"] = "kdvstab";
        j["version"] = tool_version;
        j["command"] = command_;
        j["config"] = config_;
        j["outputs"] = outputs_;
        j["exit_status"] = exit_status;
        if (!message.empty())
            j["message"] = message;
        j["wall_time_s"] = wall;
        write_file_atomic((std::filesystem::path(dir) / "run_manifest.json").string(), j.dump(2) + "\n");
    }

private:
    std::string command_;
    ordered_json config_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
};

void guard_critical(const RunConfig& cfg)
{
    CriticalCheck check = is_critical(cfg.length);
    if (check.critical && !cfg.allow_critical) {
        std::ostringstream msg;
        msg << "L=" << format_double(cfg.length) << " lies in the critical set (nearest entry "
            << format_double(check.nearest.value) << ", distance " << check.distance
            << "); rerun with --allow-critical to proceed";
        throw UsageError(msg.str());
    }
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows)
{
    std::string out;
    for (std::size_t k = 0; k < header.size(); ++k)
        out += (k ? "," : "") + header[k];
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k)
            out += (k ? "," : "") + row[k];
        out += "\n";
    }
    return out;
}

std::string json_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows)
{
    ordered_json arr = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json obj;
        for (std::size_t k = 0; k < header.size(); ++k)
            obj[header[k]] = row[k];
        arr.push_back(obj);
    }
    return arr.dump(2) + "\n";
}

std::string write_table(const RunConfig& cfg, const std::string& stem, const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows)
{
    std::string path;
    if (cfg.format == "json") {
        path = out_path(cfg, stem + ".json");
        write_file_atomic(path, json_table(header, rows));
    } else {
        std::vector<std::vector<std::string>> text;
        for (const auto& row : rows) {
            std::vector<std::string> r;
            for (double v : row)
                r.push_back(format_double(v));
            text.push_back(std::move(r));
        }
        path = out_path(cfg, stem + ".csv");
        write_file_atomic(path, csv_table(header, text));
    }
    return path;
}

// ---------------------------------------------------------------- spectrum

int cmd_spectrum(const RunConfig& cfg, Manifest& manifest)
{
    auto modes = scan_eigenvalues(cfg.length, cfg.n_modes);
    std::vector<std::string> header{"n",     "lambda", "r1_re",  "r1_im",  "r2_re",  "r2_im",  "r3_re",
                                    "r3_im", "abs_a1", "vp0_re", "vp0_im", "vpL_re", "vpL_im", "residual"};
    std::vector<std::vector<double>> rows;
    for (const auto& m : modes) {
        rows.push_back({static_cast<double>(m.n), m.lambda, m.roots[0].real(), m.roots[0].imag(),
                        m.roots[1].real(), m.roots[1].imag(), m.roots[2].real(), m.roots[2].imag(),
                        std::abs(m.coeff(0)), m.trace_vp0.real(), m.trace_vp0.imag(), m.trace_vpL.real(),
                        m.trace_vpL.imag(), m.residual});
    }
    manifest.add_output(write_table(cfg, "spectrum", header, rows));
    return exit_ok;
}

// ---------------------------------------------------------------- critical-lengths

int cmd_critical(const RunConfig& cfg, double bound, Manifest& manifest)
{
    if (!(bound > 0.0))
        throw UsageError("--bound must be positive");
    CriticalLengthSet set = enumerate_critical(bound);
    std::string path;
    if (cfg.format == "json") {
        ordered_json arr = ordered_json::array();
        for (const auto& e : set.entries) {
            ordered_json gens = ordered_json::array();
            for (auto [k, l] : e.generators)
                gens.push_back({k, l});
            arr.push_back({{"value", e.value}, {"q", e.q}, {"generators", gens}});
        }
        path = out_path(cfg, "critical_lengths.json");
        write_file_atomic(path, ordered_json{{"bound", bound}, {"entries", arr}}.dump(2) + "\n");
    } else {
        std::vector<std::vector<std::string>> rows;
        for (const auto& e : set.entries)
            for (auto [k, l] : e.generators)
                rows.push_back({format_double(e.value), std::to_string(k), std::to_string(l), std::to_string(e.q)});
        path = out_path(cfg, "critical_lengths.csv");
        write_file_atomic(path, csv_table({"value", "k", "l", "q"}, rows));
    }
    for (const auto& e : set.entries)
        for (auto [k, l] : e.generators)
            std::cout << format_double(e.value) << ", k=" << k << ", l=" << l << "\n";
    if (set.entries.empty())
        std::cout << "no critical lengths below " << format_double(bound) << "\n";
    manifest.add_output(path);
    return exit_ok;
}

// ---------------------------------------------------------------- synthesize

int cmd_synthesize(const RunConfig& cfg, Manifest& manifest)
{
    guard_critical(cfg);
    auto modes = lift_modes(scan_eigenvalues(cfg.length, cfg.n_modes));
    GramianOperator gram = assemble_gramian(modes, cfg.omega, cfg.side);
    FeedbackLaw law = feedback_gain(gram);
    FeedbackDocument doc = make_feedback_document(gram, law);
    std::string path = out_path(cfg, "feedback.json");
    write_file_atomic(path, to_json(doc).dump(2) + "\n");
    manifest.add_output(path);
    double abscissa = spectral_abscissa(closed_loop_matrix(law));
    std::cout << "feedback written to " << path << " (checksum " << doc.checksum << ", closed-loop abscissa "
              << format_double(abscissa) << ")\n";
    return exit_ok;
}

// ---------------------------------------------------------------- simulate

FeedbackLaw law_from_document(const FeedbackDocument& doc)
{
    auto modes = lift_modes(scan_eigenvalues(doc.length, doc.scalar_modes));
    if (modes->size() != doc.n.size())
        fail(ErrorKind::io_failure, "feedback document mode count does not match the recomputed spectrum");
    for (std::size_t k = 0; k < modes->size(); ++k) {
        const SystemMode& m = (*modes)[k];
        if (m.base.n != doc.n[k] || m.sign != doc.sign[k] ||
            std::abs(m.base.lambda - doc.lambda[k]) > 1e-9 * std::max(1.0, std::abs(doc.lambda[k])))
            fail(ErrorKind::io_failure, "feedback document spectrum does not match the recomputed spectrum");
    }
    return make_law(modes, doc.omega, doc.side, doc.gain);
}

int cmd_simulate(RunConfig cfg, const std::string& feedback_file, bool open_loop, bool svg,
                 const std::string& integrator, Manifest& manifest)
{
    SimConfig sim;
    sim.t_max = cfg.t_max;
    sim.dt = cfg.dt;
    sim.integrator = parse_integrator(integrator);

    SimResult res;
    ordered_json summary;
    if (open_loop) {
        guard_critical(cfg);
        auto modes = lift_modes(scan_eigenvalues(cfg.length, cfg.n_modes));
        ModalState x0 = random_real_state(modes, cfg.seed);
        res = simulate_open_loop(x0, sim, cfg.side);
        summary["mode"] = "open-loop";
    } else {
        if (feedback_file.empty())
            throw UsageError("simulate needs --feedback FILE (or --open-loop)");
        if (!std::filesystem::exists(feedback_file))
            throw UsageError("feedback file '" + feedback_file + "' does not exist");
        FeedbackDocument doc = feedback_document_from_json(ordered_json::parse(read_file(feedback_file)));
        cfg.length = doc.length;
        cfg.omega = doc.omega;
        cfg.side = doc.side;
        cfg.n_modes = doc.scalar_modes;
        FeedbackLaw law = law_from_document(doc);
        ModalState x0 = random_real_state(law.modes, cfg.seed);
        res = simulate_closed_loop(x0, law, sim);
        summary["mode"] = "closed-loop";
        summary["feedback_checksum"] = doc.checksum;
        summary["closed_loop_abscissa"] = spectral_abscissa(closed_loop_matrix(law));
        summary["target_rate"] = -2.0 * doc.omega;
        summary["envelope_constant"] = envelope_constant(res, -2.0 * doc.omega * (1.0 - 1e-2));
        summary["control_imag_max"] = res.control_imag_max;
    }
    for (const auto& w : res.warnings)
        std::cerr << "warning: " << w << "\n";

    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < res.times.size(); ++k)
        rows.push_back({res.times[k], res.h1_norms[k], res.control[k]});
    manifest.add_output(write_table(cfg, "trajectory", {"t", "h1_norm", "control_f"}, rows));

    double n0 = res.h1_norms.front();
    if (open_loop) {
        double drift = 0.0;
        for (double v : res.h1_norms)
            drift = std::max(drift, std::abs(v - n0) / n0);
        summary["max_relative_norm_drift"] = drift;
    }
    summary["length"] = cfg.length;
    summary["omega"] = cfg.omega;
    summary["control_side"] = to_string(cfg.side);
    summary["modes"] = cfg.n_modes;
    summary["seed"] = cfg.seed;
    summary["integrator"] = to_string(sim.integrator);
    summary["fitted_rate"] = res.fitted_rate;
    summary["fit_residual"] = res.residual;
    summary["initial_h1_norm"] = n0;
    summary["final_h1_norm"] = res.h1_norms.back();
    summary["warnings"] = res.warnings;
    std::string spath = out_path(cfg, "summary.json");
    write_file_atomic(spath, summary.dump(2) + "\n");
    manifest.add_output(spath);

    if (svg) {
        PlotSeries lognorm{"log10 H1 norm", res.times, {}};
        for (double v : res.h1_norms)
            lognorm.y.push_back(std::log10(std::max(v, 1e-30)));
        PlotSeries control{"control f(t)", res.times, res.control};
        std::string path = out_path(cfg, "trajectory.svg");
        write_file_atomic(path, svg_line_plots(std::string(open_loop ? "open" : "closed") + "-loop trajectory, L=" +
                                                   format_double(cfg.length),
                                               "t", {lognorm, control}));
        manifest.add_output(path);
    }
    std::cout << "fitted rate " << format_double(res.fitted_rate) << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------- verify

struct Check {
    std::string name;
    bool passed = false;
    bool expected_failure = false;
    ordered_json metrics = ordered_json::object();
    std::string error;
};

ordered_json check_json(const Check& c)
{
    std::string status = c.passed ? "pass" : (c.expected_failure ? "expected-fail" : "fail");
    ordered_json j{{"name", c.name}, {"status", status}, {"metrics", c.metrics}};
    if (!c.error.empty())
        j["error"] = c.error;
    return j;
}

template <typename F>
Check run_check(const std::string& name, bool degenerate_expected, F&& body)
{
    Check c;
    c.name = name;
    c.expected_failure = degenerate_expected;
    try {
        c.passed = body(c.metrics);
    } catch (const Error& e) {
        c.passed = false;
        c.error = e.what();
    }
    return c;
}

int cmd_verify(const RunConfig& cfg, int oracle_points, int trials, double horizon, Manifest& manifest)
{
    guard_critical(cfg);
    const bool critical = is_critical(cfg.length).critical;
    std::vector<Check> checks;

    std::vector<EigenMode> scalar = scan_eigenvalues(cfg.length, cfg.n_modes);
    auto modes = lift_modes(scalar);

    checks.push_back(run_check("spectrum_vs_fd_oracle", false, [&](ordered_json& m) {
        int count = std::min(8, cfg.n_modes);
        std::vector<EigenMode> exact = scan_eigenvalues(cfg.length, count);
        DiscreteOperator op = build_discrete_B_op(make_grid(cfg.length, oracle_points));
        // Branch-balanced mode sets are not the smallest |lambda| overall, so match by proximity.
        auto eigs = discrete_eigs(op, 2 * count);
        double err = 0.0, slope_err = 0.0;
        for (const auto& mode : exact) {
            const DiscreteEigenpair* best = &eigs.front();
            for (const auto& p : eigs)
                if (std::abs(p.value.real() - mode.lambda) < std::abs(best->value.real() - mode.lambda))
                    best = &p;
            err = std::max(err, std::abs(best->value.real() - mode.lambda) / std::max(1.0, std::abs(mode.lambda)));
            double fd_slope = std::abs(left_slope(best->vector, op.grid.h()));
            double ex_slope = std::abs(mode.trace_vp0);
            slope_err = std::max(slope_err, std::abs(fd_slope - ex_slope) / std::max(1.0, ex_slope));
        }
        m["n_points"] = oracle_points;
        m["count"] = count;
        m["max_relative_eigenvalue_error"] = err;
        m["max_relative_slope_error"] = slope_err;
        return err < 1e-4 && slope_err < 1e-2;
    }));

    checks.push_back(run_check("normalization_identities", false, [&](ordered_json& m) {
        double ident = 0.0, quad = 0.0;
        for (const auto& mode : scalar) {
            ident = std::max(ident, std::abs(bilinear_identity(mode) - 1.0));
            const int n = 10000;
            Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n + 1, 0.0, cfg.length);
            double q = simpson(Eigen::VectorXd(sample_mode(mode, x).cwiseAbs2()), cfg.length / n);
            quad = std::max(quad, std::abs(closed_form_norm2(mode) - q));
        }
        m["max_identity_error"] = ident;
        m["max_norm_quadrature_error"] = quad;
        return ident < 1e-8 && quad < 1e-6;
    }));

    checks.push_back(run_check("fd_structure", false, [&](ordered_json& m) {
        Grid g = make_grid(cfg.length, 512);
        DiscreteOperator a = build_discrete_A(g);
        DiscreteOperator b = build_discrete_B_op(g);
        m["A_skew_defect"] = structure_defect(a);
        m["B_symmetry_defect"] = structure_defect(b);
        m["A_spectrum_real_part"] = spectrum_defect(a);
        m["B_spectrum_imag_part"] = spectrum_defect(b);
        return m["A_skew_defect"].get<double>() < 1e-6 && m["B_symmetry_defect"].get<double>() < 1e-6 &&
               m["A_spectrum_real_part"].get<double>() < 1e-6 && m["B_spectrum_imag_part"].get<double>() < 1e-6;
    }));

    checks.push_back(run_check("system_basis_orthonormality", false, [&](ordered_json& m) {
        Eigen::MatrixXcd g = system_gram(*modes, required_intervals(*modes));
        double defect = (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
        m["gram_defect"] = defect;
        return defect < 1e-6;
    }));

    checks.push_back(run_check("trace_nonvanishing", critical, [&](ordered_json& m) {
        TraceReport rep = trace_nonvanishing(scalar);
        m["min_ratio"] = rep.min_ratio;
        m["flagged_modes"] = rep.flagged;
        m["gaps_increasing"] = gaps_increasing(scalar);
        return rep.flagged.empty() && gaps_increasing(scalar);
    }));

    std::optional<FeedbackLaw> law;
    checks.push_back(run_check("gramian", critical, [&](ordered_json& m) {
        Eigen::MatrixXcd raw = gramian_matrix(*modes, cfg.omega, cfg.side);
        Eigen::VectorXd ev = hermitian_eigenvalues(raw);
        m["hermitian_defect"] = hermitian_defect(raw);
        m["min_eigenvalue"] = ev.minCoeff();
        m["max_eigenvalue"] = ev.maxCoeff();
        GramianOperator gram = assemble_gramian(modes, cfg.omega, cfg.side);
        law = feedback_gain(gram);
        double T = 40.0 / (2.0 * cfg.omega);
        double entry_err = 0.0;
        for (Eigen::Index j = 0; j < raw.rows(); ++j)
            for (Eigen::Index k = 0; k < raw.cols(); ++k)
                entry_err = std::max(entry_err, std::abs(gram.matrix(j, k) -
                                                         gramian_entry_quadrature(gram.traces[j], gram.traces[k],
                                                                                  (*modes)[j].mu, (*modes)[k].mu,
                                                                                  cfg.omega, T)));
        m["min_pivot_ratio"] = gram.min_pivot_ratio;
        m["max_entry_quadrature_error"] = entry_err;
        return m["hermitian_defect"].get<double>() < 1e-12 && entry_err < 1e-6;
    }));

    checks.push_back(run_check("closed_loop", critical, [&](ordered_json& m) {
        if (!law)
            fail(ErrorKind::singular_gramian, "no feedback law (Gramian check failed)");
        double abscissa = spectral_abscissa(closed_loop_matrix(*law));
        SimConfig sim;
        sim.t_max = cfg.t_max;
        sim.dt = cfg.dt;
        ModalState x0 = random_real_state(modes, cfg.seed);
        SimResult res = simulate_closed_loop(x0, *law, sim);
        SimResult open = simulate_open_loop(x0, sim, cfg.side);
        double drift = 0.0;
        for (double v : open.h1_norms)
            drift = std::max(drift, std::abs(v - open.h1_norms.front()) / open.h1_norms.front());
        m["spectral_abscissa"] = abscissa;
        m["target_abscissa"] = -2.0 * cfg.omega * (1.0 - 1e-3);
        m["fitted_rate"] = res.fitted_rate;
        m["control_imag_max"] = res.control_imag_max;
        m["open_loop_drift"] = drift;
        return abscissa <= -2.0 * cfg.omega * (1.0 - 1e-3) && res.fitted_rate <= -1.8 * cfg.omega &&
               drift < 1e-12;
    }));

    checks.push_back(run_check("observability", critical, [&](ordered_json& m) {
        InghamReport rep = ingham_constants(modes, horizon, trials, cfg.seed, cfg.side);
        m["T"] = rep.T;
        m["trials"] = rep.trials;
        m["time_samples"] = rep.sample_count;
        m["c_lower"] = rep.c_lower;
        m["C_upper"] = rep.C_upper;
        m["ratio"] = rep.c_lower / rep.C_upper;
        m["l2_lower"] = rep.l2_lower;
        m["l2_upper"] = rep.l2_upper;
        return rep.c_lower >= 1e-6 * rep.C_upper;
    }));

    bool unexpected = false;
    ordered_json arr = ordered_json::array();
    for (const auto& c : checks) {
        arr.push_back(check_json(c));
        if (!c.passed && !c.expected_failure)
            unexpected = true;
    }
    ordered_json report;
    report["tool"] = tool_version;
    report["config"] = {{"length", cfg.length},   {"omega", cfg.omega},
                        {"modes", cfg.n_modes},   {"tmax", cfg.t_max},
                        {"dt", cfg.dt},           {"seed", cfg.seed},
                        {"control-side", to_string(cfg.side)}, {"oracle-points", oracle_points},
                        {"trials", trials},       {"horizon", horizon}};
    report["critical_length"] = critical;
    report["checks"] = arr;
    report["unexpected_failures"] = unexpected;
    std::string path = out_path(cfg, "verify_report.json");
    write_file_atomic(path, report.dump(2) + "\n");
    manifest.add_output(path);
    for (const auto& c : checks)
        std::cout << check_json(c)["status"].get<std::string>() << "  " << c.name << "\n";
    return unexpected ? exit_verification : exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Boundary feedback synthesis and verification for the linear KdV-KdV system"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    CommonFlags flags;
    double bound = 20.0;
    std::string feedback_file, integrator = "exact_expm";
    bool open_loop = false, svg = false;
    int oracle_points = 2048, trials = 64;
    double horizon = 1.0;

    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and eigenfunction data of the scalar operator");
    auto* critical = app.add_subcommand("critical-lengths", "list the critical length set up to a bound");
    auto* synthesize = app.add_subcommand("synthesize", "assemble the Gramian and write the feedback law");
    auto* simulate = app.add_subcommand("simulate", "simulate the modal open or closed loop");
    auto* verify = app.add_subcommand("verify", "run the consolidated verification suite");
    for (auto* cmd : {spectrum, critical, synthesize, simulate, verify})
        add_common_flags(cmd, flags);
    critical->add_option("--bound", bound, "largest length to enumerate");
    simulate->add_option("--feedback", feedback_file, "feedback JSON from synthesize");
    simulate->add_flag("--open-loop", open_loop, "simulate without feedback");
    simulate->add_flag("--svg", svg, "also write trajectory.svg");
    simulate->add_option("--integrator", integrator, "exact_expm or trapezoidal");
    verify->add_option("--oracle-points", oracle_points, "interior points of the finite-difference oracle");
    verify->add_option("--trials", trials, "random states for the observability constants");
    verify->add_option("--horizon", horizon, "observation time T");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    CLI::App* cmd = app.get_subcommands().front();
    std::string name = cmd->get_name();
    RunConfig cfg;
    try {
        cfg = resolve_config(flags);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }

    Manifest manifest(name, config_json(cfg));
    int status = exit_ok;
    std::string message;
    try {
        std::filesystem::create_directories(cfg.output_dir);
        if (name == "spectrum")
            status = cmd_spectrum(cfg, manifest);
        else if (name == "critical-lengths")
            status = cmd_critical(cfg, bound, manifest);
        else if (name == "synthesize")
            status = cmd_synthesize(cfg, manifest);
        else if (name == "simulate")
            status = cmd_simulate(cfg, feedback_file, open_loop, svg, integrator, manifest);
        else if (name == "verify")
            status = cmd_verify(cfg, oracle_points, trials, horizon, manifest);
    } catch (const UsageError& e) {
        status = exit_usage;
        message = e.what();
    } catch (const Error& e) {
        bool usage = e.kind() == ErrorKind::invalid_argument || e.kind() == ErrorKind::io_failure;
        status = usage ? exit_usage : exit_numerical;
        message = e.what();
    } catch (const std::exception& e) {
        status = exit_numerical;
        message = e.what();
    }
    if (!message.empty())
        std::cerr << "error: " << message << "\n";
    try {
        manifest.write(cfg.output_dir, status, message);
    } catch (const std::exception& e) {
        std::cerr << "error: cannot write run manifest: " << e.what() << "\n";
        if (status == exit_ok)
            status = exit_numerical;
    }
    return status;
}
