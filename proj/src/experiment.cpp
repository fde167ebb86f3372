#include "beamlab/experiment.hpp"

#include "beamlab/errors.hpp"
#include "beamlab/expression.hpp"

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

namespace beamlab {
namespace {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

int int_field(const json& value, const std::string& name) {
    if (!value.is_number_integer())
        throw ConfigError("field \"" + name + "\" must be an integer");
    return value.get<int>();
}

json opt_json(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }
json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

NonlinearitySpec parse_nonlinearity(const json& block) {
    if (!block.is_object()) throw ConfigError("\"nonlinearity\" must be an object");
    require_keys(block, {"kind", "mu"}, "nonlinearity");
    if (!block.contains("kind")) throw ConfigError("nonlinearity needs a \"kind\"");
    const std::string kind = block.at("kind").get<std::string>();
    if (kind == "positive_part") {
        if (!block.contains("mu")) throw ConfigError("positive_part needs \"mu\"");
        const double mu = real_field(block.at("mu"), "mu");
        if (!(mu > 0.0)) throw ConfigError("\"mu\" must be positive");
        return NonlinearitySpec::positive_part(mu);
    }
    if (block.contains("mu"))
        throw ConfigError("\"mu\" only applies to kind positive_part");
    if (kind == "cubic") return NonlinearitySpec::cubic();
    if (kind == "positive_cubic") return NonlinearitySpec::positive_cubic();
    throw ConfigError("unknown nonlinearity kind \"" + kind + "\"");
}

ModeVector parse_coefficients(const json& value, int N, const std::string& name) {
    if (!value.is_array())
        throw ConfigError("field \"" + name + "\" must be an array");
    if (value.size() > static_cast<std::size_t>(N))
        throw ConfigError("field \"" + name + "\" has more than N entries");
    ModeVector out(static_cast<std::size_t>(N), 0.0);
    for (std::size_t i = 0; i < value.size(); ++i)
        out[i] = real_field(value[i], name);
    return out;
}

const char* kind_name(NonlinearityKind k) {
    switch (k) {
    case NonlinearityKind::PositivePart: return "positive_part";
    case NonlinearityKind::Cubic: return "cubic";
    case NonlinearityKind::PositiveCubic: return "positive_cubic";
    }
    return "cubic";
}

std::string dump_document(const json& doc) { return doc.dump(2) + "\n"; }

json verdict_json(const StabilityVerdict& v, const ExperimentConfig& cfg) {
    return json{{"status", to_string(v.status)},
                {"witness_mode", opt_json(v.witness_mode)},
                {"witness_tau", opt_json(v.witness_tau)},
                {"ratio_amplitude", v.ratio_amplitude},
                {"ratio_growth", v.ratio_growth},
                {"eta", cfg.eta},
                {"T_W", cfg.T_W},
                {"T", cfg.T},
                {"config_digest", config_digest(resolved_config_json(cfg))}};
}

json certificate_json(const ErrorCertificate& cert, const CertificationResult& res,
                      const ExperimentConfig& cfg) {
    return json{{"N", cert.N},
                {"T", cert.T},
                {"E0", cert.E0},
                {"M", cert.M},
                {"L", cert.L},
                {"C", cert.C},
                {"per_mode_bounds", cert.per_mode_bounds},
                {"remainder", cert.remainder},
                {"remainder_forced_substitution", cert.remainder_forced_substitution},
                {"status", to_string(res.status)},
                {"limiting_margin", res.limiting_margin},
                {"limiting_mode", opt_json(res.limiting_mode)},
                {"limiting_tau", opt_json(res.limiting_tau)},
                {"detail", res.detail},
                {"config_digest", config_digest(resolved_config_json(cfg))}};
}

int prevailing_or_throw(const ExperimentConfig& cfg) {
    auto j = classify_prevailing(cfg.u0, cfg.v0, cfg.forcing, cfg.eta);
    if (!j) {
        std::ostringstream msg;
        msg << "no prevailing mode in the initial data (eta = " << cfg.eta << ")";
        throw NoPrevailingModeError(msg.str());
    }
    return *j;
}

double detector_alpha(const ExperimentConfig& cfg) {
    return cfg.forcing.present ? cfg.forcing.alpha : 0.0;
}

void write_csv_pair(const Trajectory& traj, const std::filesystem::path& out_dir) {
    std::ostringstream tcsv;
    write_trajectory_csv(traj, tcsv);
    write_file_atomic(out_dir / "trajectory.csv", tcsv.str());
    std::ostringstream ecsv;
    write_energy_csv(traj, ecsv);
    write_file_atomic(out_dir / "energy.csv", ecsv.str());
}

// ---- canned study configs ----------------------------------------------

ExperimentConfig amplitude_row_config(double M) {
    return parse_config(json{
        {"N", 12},
        {"T", 16.0},
        {"nonlinearity", {{"kind", "cubic"}}},
        {"initial", {{"pattern", {{"j", 2}, {"amplitude", M}, {"residual", 0.01}}}}},
    });
}

struct ThresholdRow {
    int j;
    double lo, hi;
};

// Default bisection brackets around the known instability thresholds of the
// cubic sweep, one per prevailing mode.
constexpr ThresholdRow kThresholdRows[] = {
    {1, 10.0, 16.0}, {2, 5.0, 8.0},   {3, 10.0, 17.0},
    {4, 19.0, 28.0}, {5, 27.0, 38.0}, {6, 44.0, 56.0},
};

ExperimentConfig threshold_row_config(const ThresholdRow& row) {
    return parse_config(json{
        {"N", 12},
        {"T", 16.0},
        {"nonlinearity", {{"kind", "cubic"}}},
        {"initial",
         {{"pattern", {{"j", row.j}, {"amplitude", row.lo}, {"residual", 0.01}}}}},
        {"threshold", {{"bracket", {row.lo, row.hi}}, {"step", 0.05}}},
    });
}

ExperimentConfig certified_example_config() {
    return parse_config(json{
        {"N", 5},
        {"T", 5.0},
        {"nonlinearity", {{"kind", "positive_part"}, {"mu", 0.1}}},
        {"forcing", {{"j", 2}, {"alpha", 5e-3}, {"gamma", 1.0}}},
        {"initial",
         {{"u0", {0.996e-3, 1.0e-3, 0.996e-3, 0.996e-3, 0.996e-3}},
          {"u1", {0.0, 0.0, 0.0, 0.0, 0.0}}}},
    });
}

ExperimentConfig asymmetric_forced_config(int j) {
    if (j == 1)
        return parse_config(json{
            {"N", 5},
            {"T", 150.0},
            {"nonlinearity", {{"kind", "positive_part"}, {"mu", 3.0}}},
            {"forcing", {{"j", 1}, {"alpha", 50.0}, {"gamma", "4/3"}}},
            {"initial", {{"u0", {0.01, 0.00996, 0.00996, 0.00996, 0.00996}}}},
            {"solver", {{"dt_sample", 0.01}}},
        });
    return parse_config(json{
        {"N", 5},
        {"T", 160.0},
        {"nonlinearity", {{"kind", "positive_part"}, {"mu", 3.0}}},
        {"forcing", {{"j", 2}, {"alpha", 1.0}, {"gamma", "8*sqrt(19)/(4+sqrt(19))"}}},
        {"initial", {{"u0", {0.00996, 0.01, 0.00996, 0.00996, 0.00996}}}},
        {"solver", {{"dt_sample", 0.01}}},
    });
}

// ---- reproduce targets ---------------------------------------------------

json reproduce_table1(const std::filesystem::path& out_dir) {
    const double amplitudes[] = {3.1, 6.2};
    std::vector<std::future<json>> rows;
    for (double M : amplitudes) {
        rows.push_back(std::async(std::launch::async, [M, &out_dir]() -> json {
            const ExperimentConfig cfg = amplitude_row_config(M);
            char label[32];
            std::snprintf(label, sizeof label, "M%.3g", M);
            const auto row_dir = out_dir / label;
            std::filesystem::create_directories(row_dir);
            const Trajectory traj =
                integrate(initial_state(cfg), cfg.f, cfg.forcing, cfg.T, cfg.solver);
            write_csv_pair(traj, row_dir);

            json sups = json::array();
            json near_initial = json::array();
            for (int n = 1; n <= 9; ++n) {
                const double s = running_sup(traj, n, cfg.T);
                sups.push_back(s);
                near_initial.push_back(n != 2 &&
                                       std::abs(s - cfg.pattern_residual) <=
                                           0.05 * cfg.pattern_residual);
            }
            return json{{"amplitude", M},
                        {"sup_norms", sups},
                        {"at_initial_residual", near_initial},
                        {"trajectory", std::string(label) + "/trajectory.csv"},
                        {"config", resolved_config_json(cfg)},
                        {"config_digest", config_digest(resolved_config_json(cfg))}};
        }));
    }
    json out = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        try {
            out.push_back(rows[i].get());
        } catch (const std::exception& e) {
            out.push_back(json{{"amplitude", amplitudes[i]}, {"error", e.what()}});
        }
    }
    return json{{"target", "table1"}, {"rows", out}};
}

json reproduce_table2(const std::vector<int>& modes, const std::filesystem::path& out_dir) {
    std::vector<ThresholdRow> selected;
    for (const ThresholdRow& row : kThresholdRows)
        if (modes.empty() || std::find(modes.begin(), modes.end(), row.j) != modes.end())
            selected.push_back(row);
    if (selected.empty()) throw ConfigError("mode filter selects no threshold rows");

    std::vector<std::future<json>> rows;
    for (const ThresholdRow& row : selected) {
        rows.push_back(std::async(std::launch::async, [row, &out_dir]() -> json {
            const ExperimentConfig cfg = threshold_row_config(row);
            ThresholdProblem problem;
            problem.f = cfg.f;
            problem.N = cfg.N;
            problem.T = cfg.T;
            problem.j = cfg.pattern_j;
            problem.residual_delta = cfg.pattern_residual;
            problem.solver = cfg.solver;
            problem.eta = cfg.eta;
            problem.T_W = cfg.T_W;
            const ThresholdResult res = threshold_search(problem, cfg.bracket, cfg.bracket_step);

            // Resistant residual modes: rerun the lowest amplitude seen
            // Unstable and list modes whose sup norm stayed within twice the
            // initial residual amplitude.
            json resistant = json::array();
            double lowest_unstable = 0.0;
            bool have_unstable = false;
            for (const ThresholdEvaluation& ev : res.evaluations)
                if (ev.verdict.status == StabilityStatus::Unstable &&
                    (!have_unstable || ev.amplitude < lowest_unstable)) {
                    lowest_unstable = ev.amplitude;
                    have_unstable = true;
                }
            if (have_unstable) {
                ModalState init;
                init.phi.assign(static_cast<std::size_t>(cfg.N), problem.residual_delta);
                init.phi[problem.j - 1] = lowest_unstable;
                init.phidot.assign(static_cast<std::size_t>(cfg.N), 0.0);
                const Trajectory traj = integrate(init, cfg.f, cfg.forcing, cfg.T, cfg.solver);
                for (int k = 1; k <= cfg.N; ++k)
                    if (k != problem.j &&
                        running_sup(traj, k, cfg.T) <= 2.0 * problem.residual_delta)
                        resistant.push_back(k);
            }

            json evals = json::array();
            for (const ThresholdEvaluation& ev : res.evaluations)
                evals.push_back(json{{"amplitude", ev.amplitude},
                                     {"status", to_string(ev.verdict.status)}});

            const json doc{{"j", row.j},
                           {"threshold", res.threshold},
                           {"bracket", {res.bracket.first, res.bracket.second}},
                           {"witness_mode", opt_json(res.witness_mode)},
                           {"witness_tau", opt_json(res.witness_tau)},
                           {"indeterminate_band",
                            res.indeterminate_band
                                ? json{res.indeterminate_band->first, res.indeterminate_band->second}
                                : json(nullptr)},
                           {"resistant_modes", resistant},
                           {"evaluations", evals},
                           {"config", resolved_config_json(cfg)},
                           {"config_digest", config_digest(resolved_config_json(cfg))}};
            char label[32];
            std::snprintf(label, sizeof label, "j%d", row.j);
            std::filesystem::create_directories(out_dir / label);
            write_file_atomic(out_dir / label / "threshold.json", dump_document(doc));
            return doc;
        }));
    }
    json out = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        try {
            out.push_back(rows[i].get());
        } catch (const std::exception& e) {
            out.push_back(json{{"j", selected[i].j}, {"error", e.what()}});
        }
    }
    return json{{"target", "table2"}, {"thresholds", out}};
}

json reproduce_certified_example(const std::filesystem::path& out_dir) {
    const ExperimentConfig cfg = certified_example_config();
    const int j = prevailing_or_throw(cfg);
    const Trajectory traj = integrate(initial_state(cfg), cfg.f, cfg.forcing, cfg.T, cfg.solver);
    write_csv_pair(traj, out_dir);

    const PrevailingConfig pc{cfg.eta, cfg.T_W, cfg.T};
    const DetectorScan scan = scan_running_sups(traj, j, pc);
    const double alpha = detector_alpha(cfg);
    const StabilityVerdict verdict = evaluate_detector(scan, alpha);
    const ErrorCertificate cert = ErrorCertificate::build(initial_state(cfg), cfg.f, cfg.forcing, cfg.T);
    const CertificationResult res = certify(verdict, cert, scan, alpha);

    const json vdoc = verdict_json(verdict, cfg);
    const json cdoc = certificate_json(cert, res, cfg);
    write_file_atomic(out_dir / "verdict.json", dump_document(vdoc));
    write_file_atomic(out_dir / "certificate.json", dump_document(cdoc));
    return json{{"target", "sec53"},
                {"prevailing_mode", j},
                {"verdict", vdoc},
                {"certificate", cdoc},
                {"config", resolved_config_json(cfg)},
                {"config_digest", config_digest(resolved_config_json(cfg))}};
}

json reproduce_asymmetric_forced(const std::filesystem::path& out_dir) {
    const int scenarios[] = {1, 2};
    std::vector<std::future<json>> rows;
    for (int j : scenarios) {
        rows.push_back(std::async(std::launch::async, [j, &out_dir]() -> json {
            const ExperimentConfig cfg = asymmetric_forced_config(j);
            char label[32];
            std::snprintf(label, sizeof label, "j%d", j);
            const auto row_dir = out_dir / label;
            std::filesystem::create_directories(row_dir);
            const Trajectory traj =
                integrate(initial_state(cfg), cfg.f, cfg.forcing, cfg.T, cfg.solver);
            write_csv_pair(traj, row_dir);
            const int prevailing = prevailing_or_throw(cfg);
            const StabilityVerdict verdict =
                detect_instability(traj, prevailing, detector_alpha(cfg),
                                   PrevailingConfig{cfg.eta, cfg.T_W, cfg.T});
            const json vdoc = verdict_json(verdict, cfg);
            write_file_atomic(row_dir / "verdict.json", dump_document(vdoc));
            return json{{"scenario", label},
                        {"forced_mode", j},
                        {"sup_forced_mode", running_sup(traj, j, cfg.T)},
                        {"verdict", vdoc},
                        {"trajectory", std::string(label) + "/trajectory.csv"},
                        {"config", resolved_config_json(cfg)},
                        {"config_digest", config_digest(resolved_config_json(cfg))}};
        }));
    }
    json out = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        try {
            out.push_back(rows[i].get());
        } catch (const std::exception& e) {
            out.push_back(json{{"forced_mode", scenarios[i]}, {"error", e.what()}});
        }
    }
    return json{{"target", "fucik_forced"}, {"scenarios", out}};
}

} // namespace

double real_field(const json& value, const std::string& name) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) return evaluate_expression(value.get<std::string>());
    throw ConfigError("field \"" + name + "\" must be a number or expression string");
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    require_keys(doc, {"N", "T", "nonlinearity", "forcing", "initial", "solver", "detector",
                       "threshold"},
                 "config");
    for (const char* k : {"N", "T", "nonlinearity", "initial"})
        if (!doc.contains(k)) throw ConfigError(std::string("config needs \"") + k + "\"");

    ExperimentConfig cfg;
    cfg.N = int_field(doc.at("N"), "N");
    if (cfg.N < 1) throw ConfigError("\"N\" must be >= 1");
    if (cfg.N > max_mode_count())
        throw ConfigError("\"N\" exceeds the configured mode cap");
    cfg.T = real_field(doc.at("T"), "T");
    if (!(cfg.T > 0.0)) throw ConfigError("\"T\" must be positive");
    cfg.f = parse_nonlinearity(doc.at("nonlinearity"));

    if (doc.contains("forcing")) {
        const json& fo = doc.at("forcing");
        if (!fo.is_object()) throw ConfigError("\"forcing\" must be an object");
        require_keys(fo, {"j", "alpha", "gamma"}, "forcing");
        for (const char* k : {"j", "alpha", "gamma"})
            if (!fo.contains(k)) throw ConfigError(std::string("forcing needs \"") + k + "\"");
        const int j = int_field(fo.at("j"), "forcing.j");
        if (j < 1 || j > cfg.N) throw ConfigError("forcing mode out of range");
        const double alpha = real_field(fo.at("alpha"), "forcing.alpha");
        const double gamma = real_field(fo.at("gamma"), "forcing.gamma");
        if (!(alpha > 0.0)) throw ConfigError("forcing amplitude must be positive");
        if (gamma == 0.0) throw ConfigError("forcing frequency must be nonzero");
        cfg.forcing = ModalForcing::single_mode(j, alpha, gamma);
    }

    const json& init = doc.at("initial");
    if (!init.is_object()) throw ConfigError("\"initial\" must be an object");
    if (init.contains("pattern")) {
        require_keys(init, {"pattern"}, "initial");
        const json& pat = init.at("pattern");
        require_keys(pat, {"j", "amplitude", "residual"}, "initial.pattern");
        for (const char* k : {"j", "amplitude"})
            if (!pat.contains(k)) throw ConfigError(std::string("pattern needs \"") + k + "\"");
        cfg.has_pattern = true;
        cfg.pattern_j = int_field(pat.at("j"), "pattern.j");
        if (cfg.pattern_j < 1 || cfg.pattern_j > cfg.N)
            throw ConfigError("pattern mode out of range");
        cfg.pattern_amplitude = real_field(pat.at("amplitude"), "pattern.amplitude");
        cfg.pattern_residual =
            pat.contains("residual") ? real_field(pat.at("residual"), "pattern.residual") : 0.01;
        cfg.u0.assign(static_cast<std::size_t>(cfg.N), cfg.pattern_residual);
        cfg.u0[cfg.pattern_j - 1] = cfg.pattern_amplitude;
        cfg.v0.assign(static_cast<std::size_t>(cfg.N), 0.0);
    } else {
        require_keys(init, {"u0", "u1"}, "initial");
        if (!init.contains("u0")) throw ConfigError("initial needs \"u0\" or \"pattern\"");
        cfg.u0 = parse_coefficients(init.at("u0"), cfg.N, "initial.u0");
        cfg.v0 = init.contains("u1") ? parse_coefficients(init.at("u1"), cfg.N, "initial.u1")
                                     : ModeVector(static_cast<std::size_t>(cfg.N), 0.0);
    }

    if (doc.contains("solver")) {
        const json& so = doc.at("solver");
        require_keys(so, {"atol", "rtol", "dt_sample"}, "solver");
        if (so.contains("atol")) cfg.solver.atol = real_field(so.at("atol"), "solver.atol");
        if (so.contains("rtol")) cfg.solver.rtol = real_field(so.at("rtol"), "solver.rtol");
        if (so.contains("dt_sample"))
            cfg.solver.dt_sample = real_field(so.at("dt_sample"), "solver.dt_sample");
        if (!(cfg.solver.atol > 0.0) || !(cfg.solver.rtol > 0.0))
            throw ConfigError("solver tolerances must be positive");
        if (!(cfg.solver.dt_sample > 0.0)) throw ConfigError("\"dt_sample\" must be positive");
    }

    cfg.eta = cfg.forcing.present ? 0.999 : 0.1;
    if (doc.contains("detector")) {
        const json& de = doc.at("detector");
        require_keys(de, {"eta", "T_W"}, "detector");
        if (de.contains("eta")) cfg.eta = real_field(de.at("eta"), "detector.eta");
        if (de.contains("T_W")) cfg.T_W = real_field(de.at("T_W"), "detector.T_W");
        if (!(cfg.eta > 0.0) || !(cfg.eta < 1.0))
            throw ConfigError("\"eta\" must lie in (0, 1)");
        if (!(cfg.T_W > 0.0)) throw ConfigError("\"T_W\" must be positive");
    }

    if (doc.contains("threshold")) {
        const json& th = doc.at("threshold");
        require_keys(th, {"bracket", "step"}, "threshold");
        if (!th.contains("bracket") || !th.at("bracket").is_array() ||
            th.at("bracket").size() != 2)
            throw ConfigError("threshold needs \"bracket\": [lo, hi]");
        cfg.has_bracket = true;
        cfg.bracket.first = real_field(th.at("bracket")[0], "threshold.bracket");
        cfg.bracket.second = real_field(th.at("bracket")[1], "threshold.bracket");
        if (!(cfg.bracket.first < cfg.bracket.second))
            throw ConfigError("threshold bracket must satisfy lo < hi");
        if (th.contains("step")) cfg.bracket_step = real_field(th.at("step"), "threshold.step");
        if (!(cfg.bracket_step > 0.0)) throw ConfigError("threshold step must be positive");
    }

    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse failure: " + std::string(e.what()));
    }
    return parse_config(doc);
}

nlohmann::json resolved_config_json(const ExperimentConfig& cfg) {
    json doc{{"N", cfg.N}, {"T", cfg.T}};
    json nl{{"kind", kind_name(cfg.f.kind)}};
    if (cfg.f.kind == NonlinearityKind::PositivePart) nl["mu"] = cfg.f.mu;
    doc["nonlinearity"] = nl;
    if (cfg.forcing.present)
        doc["forcing"] = json{
            {"j", cfg.forcing.j}, {"alpha", cfg.forcing.alpha}, {"gamma", cfg.forcing.gamma}};
    doc["initial"] = json{{"u0", cfg.u0}, {"u1", cfg.v0}};
    doc["solver"] = json{{"atol", cfg.solver.atol},
                         {"rtol", cfg.solver.rtol},
                         {"dt_sample", cfg.solver.dt_sample}};
    doc["detector"] = json{{"eta", cfg.eta}, {"T_W", cfg.T_W}};
    if (cfg.has_bracket)
        doc["threshold"] = json{{"bracket", {cfg.bracket.first, cfg.bracket.second}},
                                {"step", cfg.bracket_step}};
    return doc;
}

std::string config_digest(const nlohmann::json& doc) {
    const std::string text = doc.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ResourceError("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw ResourceError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

ModalState initial_state(const ExperimentConfig& cfg) {
    ModalState s;
    s.t = 0.0;
    s.phi = cfg.u0;
    s.phidot = cfg.v0;
    return s;
}

void run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const Trajectory traj = integrate(initial_state(cfg), cfg.f, cfg.forcing, cfg.T, cfg.solver);
    write_csv_pair(traj, out_dir);
}

void run_detect(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const int j = prevailing_or_throw(cfg);
    const Trajectory traj = integrate(initial_state(cfg), cfg.f, cfg.forcing, cfg.T, cfg.solver);
    const StabilityVerdict v = detect_instability(traj, j, detector_alpha(cfg),
                                                  PrevailingConfig{cfg.eta, cfg.T_W, cfg.T});
    write_file_atomic(out_dir / "verdict.json", dump_document(verdict_json(v, cfg)));
}

void run_threshold(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    if (!cfg.has_pattern)
        throw ConfigError("threshold search needs pattern-form initial data");
    if (!cfg.has_bracket) throw ConfigError("threshold search needs a \"threshold\" block");
    std::filesystem::create_directories(out_dir);

    ThresholdProblem problem;
    problem.f = cfg.f;
    problem.N = cfg.N;
    problem.T = cfg.T;
    problem.j = cfg.pattern_j;
    problem.residual_delta = cfg.pattern_residual;
    problem.forcing = cfg.forcing;
    problem.solver = cfg.solver;
    problem.eta = cfg.eta;
    problem.T_W = cfg.T_W;
    const ThresholdResult res = threshold_search(problem, cfg.bracket, cfg.bracket_step);

    json evals = json::array();
    for (const ThresholdEvaluation& ev : res.evaluations)
        evals.push_back(
            json{{"amplitude", ev.amplitude}, {"status", to_string(ev.verdict.status)}});
    const json doc{{"threshold", res.threshold},
                   {"bracket", {res.bracket.first, res.bracket.second}},
                   {"step", cfg.bracket_step},
                   {"witness_mode", opt_json(res.witness_mode)},
                   {"witness_tau", opt_json(res.witness_tau)},
                   {"indeterminate_band",
                    res.indeterminate_band
                        ? json{res.indeterminate_band->first, res.indeterminate_band->second}
                        : json(nullptr)},
                   {"evaluations", evals},
                   {"config_digest", config_digest(resolved_config_json(cfg))}};
    write_file_atomic(out_dir / "threshold.json", dump_document(doc));
}

void run_certify(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const int j = prevailing_or_throw(cfg);
    const Trajectory traj = integrate(initial_state(cfg), cfg.f, cfg.forcing, cfg.T, cfg.solver);
    const DetectorScan scan = scan_running_sups(traj, j, PrevailingConfig{cfg.eta, cfg.T_W, cfg.T});
    const double alpha = detector_alpha(cfg);
    const StabilityVerdict verdict = evaluate_detector(scan, alpha);
    const ErrorCertificate cert =
        ErrorCertificate::build(initial_state(cfg), cfg.f, cfg.forcing, cfg.T);
    const CertificationResult res = certify(verdict, cert, scan, alpha);
    write_file_atomic(out_dir / "verdict.json", dump_document(verdict_json(verdict, cfg)));
    write_file_atomic(out_dir / "certificate.json",
                      dump_document(certificate_json(cert, res, cfg)));
}

void run_reproduce(const std::string& target, const std::vector<int>& modes,
                   const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    json report;
    if (target == "table1") report = reproduce_table1(out_dir);
    else if (target == "table2") report = reproduce_table2(modes, out_dir);
    else if (target == "sec53") report = reproduce_certified_example(out_dir);
    else if (target == "fucik_forced") report = reproduce_asymmetric_forced(out_dir);
    else
        throw ConfigError("unknown reproduce target \"" + target +
                          "\" (expected table1, table2, sec53, fucik_forced)");
    write_file_atomic(out_dir / "report.json", dump_document(report));
}

} // namespace beamlab
