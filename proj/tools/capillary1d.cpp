// Command-line driver: simulate, sweep, compare, thresholds, verify.
//
// Exit codes: 0 success, 1 verify found failing criteria or an I/O error,
// 2 validation failure, 3 integrator abort. Errors are also written to
// stderr as one JSON object.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "capillary1d/acceptance.hpp"
#include "capillary1d/config.hpp"
#include "capillary1d/experiments.hpp"
#include "capillary1d/io.hpp"
#include "capillary1d/runner.hpp"

namespace c1 = capillary1d;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIntegrator = 3;

int report_error(const std::string& kind, const std::string& message, int code, const c1::json& extra = {}) {
    c1::json j = {{"error", kind}, {"message", message}, {"exit_code", code}};
    if (extra.is_object())
        for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    std::cerr << j.dump() << "\n";
    return code;
}

struct Common {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    int jobs = 1;
    bool deep = false;
};

c1::SimulationConfig load_config(const Common& opt) {
    c1::json j = c1::json::object();
    if (!opt.config_path.empty()) j = c1::load_json_file(opt.config_path);
    for (const auto& s : opt.overrides) c1::apply_override(j, s);
    return c1::config_from_json(j);
}

fs::path output_dir(const Common& opt, const c1::SimulationConfig& cfg) {
    return opt.out_dir.empty() ? fs::path(cfg.output.directory) : fs::path(opt.out_dir);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw c1::ValidationError(std::string(what) + ": '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw c1::ValidationError(std::string(what) + ": empty list");
    return out;
}

int cmd_simulate(const Common& opt) {
    const c1::SimulationConfig cfg = load_config(opt);
    const auto t0 = std::chrono::steady_clock::now();
    const c1::RunOutput run = c1::run_simulation(cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const fs::path dir = output_dir(opt, cfg);
    c1::write_simulation(dir, run, seconds);
    for (const auto& f : run.flags) std::cerr << "note: " << f << "\n";
    std::cout << "wrote " << (dir / "series.csv").string() << ", " << run.result.snapshots.size()
              << " snapshots, summary.json\n";
    return kExitOk;
}

int cmd_sweep(const Common& opt, const std::string& param, const std::string& values) {
    c1::SweepSpec spec;
    spec.base = load_config(opt);
    spec.parameter = c1::sweep_parameter_from_string(param);
    spec.values = parse_list(values, "--values");
    if (spec.parameter == c1::SweepParameter::epsilon && !opt.deep)
        for (double v : spec.values)
            if (v < 1e-3)
                throw c1::ValidationError("epsilon below 1e-3 needs --deep (and the adaptive integrator)");
    if (opt.deep && spec.base.integrator.method != c1::IntegratorMethod::rkf45_adaptive)
        throw c1::ValidationError("--deep requires integrator.method = rkf45-adaptive");
    const c1::SweepReport rep = c1::run_sweep(spec, opt.jobs);
    const fs::path dir = output_dir(opt, spec.base);
    c1::write_sweep(dir, rep);
    std::cout << "wrote " << (dir / "sweep_report.json").string() << "\n";
    if (!rep.complete) return report_error("sweep_aborted", rep.error, kExitFailed);
    return kExitOk;
}

int cmd_compare(const Common& opt) {
    const c1::SimulationConfig cfg = load_config(opt);
    const c1::ProfileReport rep = c1::curvature_profile_study(cfg, opt.jobs);
    const fs::path dir = output_dir(opt, cfg);
    c1::write_profile(dir, rep);
    std::cout << "wrote " << (dir / "profile_report.json").string() << "\n";
    return kExitOk;
}

int cmd_thresholds(const Common& opt, const std::string& n_values) {
    const c1::SimulationConfig cfg = load_config(opt);
    const c1::ThresholdReport rep = c1::threshold_study(parse_list(n_values, "--n-values"), cfg, opt.jobs);
    const fs::path dir = output_dir(opt, cfg);
    c1::write_thresholds(dir, rep);
    for (const auto& row : rep.rows)
        if (row.skipped) std::cerr << "note: n = " << c1::format_double(row.n) << " skipped: " << row.reason << "\n";
    std::cout << "wrote " << (dir / "thresholds_report.json").string() << "\n";
    return kExitOk;
}

int cmd_verify(const Common& opt) {
    const c1::AcceptanceReport rep = c1::run_acceptance(opt.jobs);
    std::cout << c1::format_table(rep);
    if (!opt.out_dir.empty()) c1::write_json(fs::path(opt.out_dir) / "acceptance_report.json", c1::to_json(rep));
    return rep.all_passed() ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral Galerkin solver for the thin-film equation with exact curvature pressure"};
    app.require_subcommand(1);

    Common opt;
    std::string param, values, n_values = "1.5,2,2.5,3";

    auto add_common = [&](CLI::App* sub, bool with_config) {
        if (with_config) {
            sub->add_option("--config", opt.config_path, "JSON config file (defaults apply when omitted)");
            sub->add_option("--set", opt.overrides, "Override a config entry, e.g. --set model.delta=0.03")
                ->take_all();
        }
        sub->add_option("--out", opt.out_dir, "Output directory (default: output.directory)");
        sub->add_option("--jobs", opt.jobs, "Worker threads for multi-run studies")->check(CLI::PositiveNumber);
    };

    auto* simulate = app.add_subcommand("simulate", "Run one simulation and write series, snapshots, summary");
    add_common(simulate, true);
    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
    add_common(sweep, true);
    sweep->add_option("--param", param, "eta, epsilon, delta or N")->required();
    sweep->add_option("--values", values, "Comma-separated, strictly monotone, at least 3")->required();
    sweep->add_flag("--deep", opt.deep, "Allow epsilon below 1e-3");
    auto* compare = app.add_subcommand("compare", "Curvature profile study, nonlinear against linear pressure");
    add_common(compare, true);
    auto* thresholds = app.add_subcommand("thresholds", "Positivity trends across mobility exponents");
    add_common(thresholds, true);
    thresholds->add_option("--n-values", n_values, "Comma-separated mobility exponents");
    auto* verify = app.add_subcommand("verify", "Run the acceptance criteria on built-in reference configs");
    add_common(verify, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), kExitValidation);
    }

    try {
        if (*simulate) return cmd_simulate(opt);
        if (*sweep) return cmd_sweep(opt, param, values);
        if (*compare) return cmd_compare(opt);
        if (*thresholds) return cmd_thresholds(opt, n_values);
        if (*verify) return cmd_verify(opt);
    } catch (const c1::ValidationError& e) {
        return report_error("validation", e.what(), kExitValidation);
    } catch (const c1::IntegratorError& e) {
        return report_error("integrator", e.what(), kExitIntegrator, {{"stage", e.stage()}});
    } catch (const c1::AnchorViolation& e) {
        return report_error("anchor", e.what(), kExitIntegrator, {{"sup_u", e.sup_u()}, {"anchor", e.anchor()}});
    } catch (const std::exception& e) {
        return report_error("error", e.what(), kExitFailed);
    }
    return kExitFailed;
}
