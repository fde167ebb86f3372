// beamlab: spectral Galerkin simulation, instability detection, threshold
// sweeps, and truncation-error certification for the hinged nonlinear beam.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "beamlab/errors.hpp"
#include "beamlab/experiment.hpp"

namespace {

using beamlab::ExperimentConfig;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    double tol = 0.0;
    double sample_dt = 0.0;
    bool has_tol = false;
    bool has_sample_dt = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config) {
    auto* config = cmd->add_option("--config", args.config_path, "experiment config JSON");
    if (needs_config) config->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--tol", args.tol, "override solver atol and rtol")
        ->check(CLI::PositiveNumber)
        ->each([&args](const std::string&) { args.has_tol = true; });
    cmd->add_option("--sample-dt", args.sample_dt, "override the dense output spacing")
        ->check(CLI::PositiveNumber)
        ->each([&args](const std::string&) { args.has_sample_dt = true; });
}

ExperimentConfig load(const CommonArgs& args) {
    ExperimentConfig cfg = beamlab::load_config(args.config_path);
    if (args.has_tol) {
        cfg.solver.atol = args.tol;
        cfg.solver.rtol = args.tol;
    }
    if (args.has_sample_dt) cfg.solver.dt_sample = args.sample_dt;
    return cfg;
}

void report_error(const char* category, const std::string& what) {
    const nlohmann::json doc{{"error", category}, {"message", what}};
    std::fprintf(stderr, "%s\n", doc.dump().c_str());
}

std::vector<int> parse_mode_list(const std::string& text) {
    std::vector<int> modes;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        try {
            std::size_t used = 0;
            const int j = std::stoi(item, &used);
            if (used != item.size() || j < 1) throw std::invalid_argument(item);
            modes.push_back(j);
        } catch (const std::exception&) {
            throw beamlab::ConfigError("bad --modes entry \"" + item + "\"");
        }
        pos = comma + 1;
    }
    return modes;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral Galerkin dynamics of the hinged nonlinear beam"};
    app.require_subcommand(1);

    CommonArgs sim_args, detect_args, threshold_args, certify_args, repro_args;
    std::string target;
    std::string modes_list;

    add_common(app.add_subcommand("simulate", "integrate and write trajectory/energy CSVs"),
               sim_args, true);
    add_common(app.add_subcommand("detect", "classify the prevailing mode and run the detector"),
               detect_args, true);
    add_common(app.add_subcommand("threshold", "bisect the instability threshold amplitude"),
               threshold_args, true);
    add_common(app.add_subcommand("certify", "emit the truncation-error certificate"),
               certify_args, true);
    auto* repro = app.add_subcommand("reproduce", "run a canned study end to end");
    repro->add_option("target", target, "table1 | table2 | sec53 | fucik_forced")->required();
    repro->add_option("--modes", modes_list, "comma-separated prevailing modes (table2)");
    add_common(repro, repro_args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("simulate")) {
            beamlab::run_simulate(load(sim_args), sim_args.out_dir);
            std::printf("wrote %s/trajectory.csv and energy.csv\n", sim_args.out_dir.c_str());
        } else if (app.got_subcommand("detect")) {
            beamlab::run_detect(load(detect_args), detect_args.out_dir);
            std::printf("wrote %s/verdict.json\n", detect_args.out_dir.c_str());
        } else if (app.got_subcommand("threshold")) {
            beamlab::run_threshold(load(threshold_args), threshold_args.out_dir);
            std::printf("wrote %s/threshold.json\n", threshold_args.out_dir.c_str());
        } else if (app.got_subcommand("certify")) {
            beamlab::run_certify(load(certify_args), certify_args.out_dir);
            std::printf("wrote %s/certificate.json and verdict.json\n",
                        certify_args.out_dir.c_str());
        } else if (app.got_subcommand("reproduce")) {
            beamlab::run_reproduce(target, parse_mode_list(modes_list), repro_args.out_dir);
            std::printf("wrote %s/report.json\n", repro_args.out_dir.c_str());
        }
    } catch (const beamlab::ConfigError& e) {
        report_error("config", e.what());
        return 2;
    } catch (const beamlab::SolverError& e) {
        report_error("solver", e.what());
        return 3;
    } catch (const beamlab::ResourceError& e) {
        report_error("resource", e.what());
        return 3;
    } catch (const beamlab::NoPrevailingModeError& e) {
        report_error("no_prevailing_mode", e.what());
        return 4;
    } catch (const beamlab::BracketError& e) {
        report_error("bracket", e.what());
        return 2;
    } catch (const std::exception& e) {
        report_error("internal", e.what());
        return 1;
    }
    return 0;
}
