// Command-line front door for the drive simulator: parse a scenario config,
// dispatch an experiment, write CSVs and a reproducibility manifest.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pscc/csv.hpp"
#include "pscc/harness.hpp"
#include "pscc/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfigError = 1;
constexpr int kExitSimFault = 2;

json load_config_json(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream f(path);
    if (!f) throw pscc::ConfigError("config: cannot open '" + path + "'");
    try {
        return json::parse(f, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw pscc::ConfigError("config: parse error in '" + path + "': " + e.what());
    }
}

pscc::Scenario resolve_scenario(const std::string& config_path,
                                const std::vector<std::string>& overrides) {
    json j = load_config_json(config_path);
    for (const auto& kv : overrides) pscc::apply_override(j, kv);
    return pscc::scenario_from_json(j);
}

void write_manifest(const fs::path& out_dir, const pscc::Scenario& sc,
                    const std::string& name = "manifest.json") {
    std::ofstream f(out_dir / name);
    f << pscc::scenario_to_json(sc).dump(2) << '\n';
}

void write_run_outputs(const fs::path& out_dir, const pscc::RunLog& log,
                       const pscc::Scenario& sc, const std::string& prefix = "") {
    fs::create_directories(out_dir);
    if (sc.log_samples) pscc::write_samples_csv((out_dir / (prefix + "samples.csv")).string(), log);
    pscc::write_blocks_csv((out_dir / (prefix + "blocks.csv")).string(), log);
}

int check_fault(const pscc::RunLog& log) {
    if (log.fault) {
        std::fprintf(stderr, "simulation fault: non-finite state, last good t = %.9f s\n",
                     log.fault_time);
        return kExitSimFault;
    }
    return 0;
}

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> g;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t comma = s.find(',', pos);
        std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!tok.empty()) g.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return g;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Five-phase induction-motor drive simulator with closed-loop "
                 "cost-function weight tuning"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    int jobs = 1;
    app.add_option("--config", config_path, "Scenario config file (JSON, comments allowed)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--set", overrides, "Dotted-key override, e.g. tuner.gamma2_ref=0.03")
        ->take_all();

    auto* cmd_run = app.add_subcommand("run", "Run one scenario as configured");
    auto* cmd_step_wf = app.add_subcommand("step-wf", "Fixed-WF run with a mid-time Lambda step");
    auto* cmd_step_ref = app.add_subcommand("step-ref", "Adaptive run with the configured Gamma-reference schedule");
    auto* cmd_reversal = app.add_subcommand("reversal", "Speed reversal, adaptive vs fixed WF");
    auto* cmd_pareto = app.add_subcommand("pareto-sweep", "Fixed-WF grid sweep of the weighting factors");
    auto* cmd_validate = app.add_subcommand("validate-config", "Parse the config and print resolved parameters");

    double pre_xy = 0.15, pre_sc = 0.0020, post_xy = 0.75, post_sc = 0.0020;
    cmd_step_wf->add_option("--pre-xy", pre_xy, "lambda_xy before the step");
    cmd_step_wf->add_option("--pre-sc", pre_sc, "lambda_sc before the step");
    cmd_step_wf->add_option("--post-xy", post_xy, "lambda_xy after the step");
    cmd_step_wf->add_option("--post-sc", post_sc, "lambda_sc after the step");

    double omega_target = 50.0;
    cmd_reversal->add_option("--omega", omega_target, "Reversal speed magnitude, rad/s");

    std::string xy_grid_s = "0.15,0.3,0.45,0.6,0.75";
    std::string sc_grid_s = "0.0010,0.0014,0.0018,0.0022,0.0026";
    cmd_pareto->add_option("--xy-grid", xy_grid_s, "Comma-separated lambda_xy grid");
    cmd_pareto->add_option("--sc-grid", sc_grid_s, "Comma-separated lambda_sc grid");
    cmd_pareto->add_option("--jobs", jobs, "Concurrent grid-point runs");

    CLI11_PARSE(app, argc, argv);

    try {
        pscc::Scenario sc = resolve_scenario(config_path, overrides);
        fs::path out(out_dir);

        if (cmd_validate->parsed()) {
            std::cout << pscc::scenario_to_json(sc).dump(2) << '\n';
            return 0;
        }

        fs::create_directories(out);

        if (cmd_run->parsed() || cmd_step_ref->parsed()) {
            if (cmd_step_ref->parsed()) sc.adaptive = true;
            write_manifest(out, sc);
            pscc::RunLog log = pscc::run(sc);
            write_run_outputs(out, log, sc);
            if (int rc = check_fault(log)) return rc;
            std::printf("run: %zu samples, %zu blocks -> %s\n", log.samples.size(),
                        log.blocks.size(), out.string().c_str());
            return 0;
        }

        if (cmd_step_wf->parsed()) {
            auto summary = pscc::step_wf_test(sc, {pre_xy, pre_sc}, {post_xy, post_sc});
            pscc::Scenario resolved = sc;
            resolved.adaptive = false;
            resolved.weights = {pre_xy, pre_sc};
            resolved.wf_steps = {{sc.duration / 2.0, {post_xy, post_sc}}};
            write_manifest(out, resolved);
            write_run_outputs(out, summary.log, sc);
            if (int rc = check_fault(summary.log)) return rc;
            std::printf("step-wf: pre  Gamma = (%.6g, %.6g, %.6g)\n", summary.pre.gamma1,
                        summary.pre.gamma2, summary.pre.gamma3);
            std::printf("step-wf: post Gamma = (%.6g, %.6g, %.6g)\n", summary.post.gamma1,
                        summary.post.gamma2, summary.post.gamma3);
            return 0;
        }

        if (cmd_reversal->parsed()) {
            auto r = pscc::reversal_test(sc, omega_target);
            pscc::Scenario resolved = sc;
            resolved.speed_ref = omega_target;
            resolved.omega0 = omega_target;
            resolved.speed_steps = {{sc.duration / 2.0, -omega_target}};
            resolved.adaptive = true;
            write_manifest(out, resolved, "adaptive_manifest.json");
            resolved.adaptive = false;
            write_manifest(out, resolved, "fixed_manifest.json");
            write_run_outputs(out, r.adaptive, sc, "adaptive_");
            write_run_outputs(out, r.fixed, sc, "fixed_");
            if (int rc = check_fault(r.adaptive)) return rc;
            if (int rc = check_fault(r.fixed)) return rc;
            std::printf("reversal: speed-tracking RMS adaptive = %.6g, fixed = %.6g rad/s\n",
                        r.rms_adaptive, r.rms_fixed);
            return 0;
        }

        if (cmd_pareto->parsed()) {
            auto xy = parse_grid(xy_grid_s);
            auto scg = parse_grid(sc_grid_s);
            auto rows = pscc::pareto_sweep(sc, xy, scg, jobs);
            write_manifest(out, sc);
            pscc::write_pareto_csv((out / "pareto.csv").string(), rows);
            std::printf("pareto-sweep: %zu grid points -> %s\n", rows.size(),
                        (out / "pareto.csv").string().c_str());
            return 0;
        }
    } catch (const pscc::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "simulation fault: %s\n", e.what());
        return kExitSimFault;
    }
    return 0;
}
