#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "beamlab/errors.hpp"
#include "beamlab/experiment.hpp"
#include "beamlab/expression.hpp"

using namespace beamlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_doc() {
    return json{
        {"N", 4},
        {"T", 2.0},
        {"nonlinearity", {{"kind", "cubic"}}},
        {"initial", {{"u0", {0.1, 0.05}}, {"u1", {0.0, 0.0}}}},
    };
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("beamlab_test_" + std::to_string(std::rand()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("expression evaluation") {
    CHECK(evaluate_expression("4/3") == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(evaluate_expression("8*sqrt(19)/(4+sqrt(19))") ==
          doctest::Approx(8.0 * std::sqrt(19.0) / (4.0 + std::sqrt(19.0))).epsilon(1e-15));
    CHECK(evaluate_expression("pi") == pi);
    CHECK(evaluate_expression("2*pi/3") == doctest::Approx(2.0 * pi / 3.0).epsilon(1e-15));
    CHECK(evaluate_expression("sqrt(2)/2") == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(evaluate_expression("-3.5e-2") == -0.035);
    CHECK(evaluate_expression(" ( 1 + 2 ) * 3 ") == 9.0);
    CHECK(evaluate_expression("1-2-3") == -4.0); // left associative
    CHECK(evaluate_expression("-sqrt(4)") == -2.0);

    CHECK_THROWS_AS(evaluate_expression("1/0"), ConfigError);
    CHECK_THROWS_AS(evaluate_expression("sqrt(-1)"), ConfigError);
    CHECK_THROWS_AS(evaluate_expression("foo"), ConfigError);
    CHECK_THROWS_AS(evaluate_expression("1+"), ConfigError);
    CHECK_THROWS_AS(evaluate_expression(""), ConfigError);
    CHECK_THROWS_AS(evaluate_expression("(1"), ConfigError);
    CHECK_THROWS_AS(evaluate_expression("1 2"), ConfigError);
    CHECK_THROWS_AS(evaluate_expression("sqrt 2"), ConfigError);
}

TEST_CASE("real-valued fields accept numbers and expression strings") {
    CHECK(real_field(json(1.5), "x") == 1.5);
    CHECK(real_field(json(3), "x") == 3.0);
    CHECK(real_field(json("4/3"), "x") == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(real_field(json(true), "x"), ConfigError);
    CHECK_THROWS_AS(real_field(json::array(), "x"), ConfigError);
    CHECK_THROWS_AS(real_field(json(nullptr), "x"), ConfigError);
}

TEST_CASE("minimal config parses with documented defaults") {
    const ExperimentConfig cfg = parse_config(base_doc());
    CHECK(cfg.N == 4);
    CHECK(cfg.T == 2.0);
    CHECK(cfg.f.kind == NonlinearityKind::Cubic);
    CHECK(!cfg.forcing.present);
    REQUIRE(cfg.u0.size() == 4); // padded to N
    CHECK(cfg.u0[0] == 0.1);
    CHECK(cfg.u0[1] == 0.05);
    CHECK(cfg.u0[2] == 0.0);
    CHECK(cfg.u0[3] == 0.0);
    REQUIRE(cfg.v0.size() == 4);
    CHECK(cfg.solver.atol == 1e-9);
    CHECK(cfg.solver.rtol == 1e-9);
    CHECK(cfg.solver.dt_sample == 1e-3);
    CHECK(cfg.eta == 0.1);
    CHECK(cfg.T_W == 1.0);
    CHECK(!cfg.has_pattern);
    CHECK(!cfg.has_bracket);

    // u1 may be omitted entirely.
    json doc = base_doc();
    doc["initial"].erase("u1");
    const ExperimentConfig quiet = parse_config(doc);
    REQUIRE(quiet.v0.size() == 4);
    for (double v : quiet.v0) CHECK(v == 0.0);

    const ModalState s = initial_state(cfg);
    CHECK(s.t == 0.0);
    CHECK(s.phi == cfg.u0);
    CHECK(s.phidot == cfg.v0);
}

TEST_CASE("pattern initial data expands against the prevailing mode") {
    json doc = base_doc();
    doc["initial"] = {{"pattern", {{"j", 2}, {"amplitude", 6.0}, {"residual", 0.01}}}};
    const ExperimentConfig cfg = parse_config(doc);
    CHECK(cfg.has_pattern);
    CHECK(cfg.pattern_j == 2);
    CHECK(cfg.pattern_amplitude == 6.0);
    CHECK(cfg.pattern_residual == 0.01);
    REQUIRE(cfg.u0.size() == 4);
    CHECK(cfg.u0 == ModeVector{0.01, 6.0, 0.01, 0.01});
    for (double v : cfg.v0) CHECK(v == 0.0);

    // Residual defaults to 0.01.
    doc["initial"] = {{"pattern", {{"j", 1}, {"amplitude", 2.0}}}};
    CHECK(parse_config(doc).u0 == ModeVector{2.0, 0.01, 0.01, 0.01});

    doc["initial"] = {{"pattern", {{"j", 5}, {"amplitude", 2.0}}}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("forcing block and the forced detector default") {
    json doc = base_doc();
    doc["forcing"] = {{"j", 1}, {"alpha", 50.0}, {"gamma", "4/3"}};
    const ExperimentConfig cfg = parse_config(doc);
    REQUIRE(cfg.forcing.present);
    CHECK(cfg.forcing.j == 1);
    CHECK(cfg.forcing.alpha == 50.0);
    CHECK(cfg.forcing.gamma == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(cfg.eta == 0.999);

    // An explicit detector block overrides the forced default.
    doc["detector"] = {{"eta", 0.5}};
    CHECK(parse_config(doc).eta == 0.5);
    doc["detector"] = {{"eta", 0.5}, {"T_W", 2.0}};
    CHECK(parse_config(doc).T_W == 2.0);
}

TEST_CASE("threshold block") {
    json doc = base_doc();
    doc["initial"] = {{"pattern", {{"j", 2}, {"amplitude", 6.0}}}};
    doc["threshold"] = {{"bracket", {5.0, 8.0}}, {"step", 0.25}};
    const ExperimentConfig cfg = parse_config(doc);
    CHECK(cfg.has_bracket);
    CHECK(cfg.bracket.first == 5.0);
    CHECK(cfg.bracket.second == 8.0);
    CHECK(cfg.bracket_step == 0.25);

    doc["threshold"] = {{"bracket", {8.0, 5.0}}, {"step", 0.25}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc["threshold"] = {{"bracket", {5.0, 8.0}}, {"step", 0.0}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("config validation rejects malformed documents") {
    for (const char* missing : {"N", "T", "nonlinearity", "initial"}) {
        json doc = base_doc();
        doc.erase(missing);
        CAPTURE(missing);
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
    }

    json doc = base_doc();
    doc["surprise"] = 1;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_doc();
    doc["nonlinearity"]["typo"] = 1;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_doc();
    doc["nonlinearity"]["kind"] = "quintic";
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    // mu is demanded by the asymmetric kind and rejected elsewhere.
    doc = base_doc();
    doc["nonlinearity"] = {{"kind", "positive_part"}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc["nonlinearity"] = {{"kind", "positive_part"}, {"mu", 3.0}};
    CHECK(parse_config(doc).f.mu == 3.0);
    doc["nonlinearity"] = {{"kind", "cubic"}, {"mu", 3.0}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc["nonlinearity"] = {{"kind", "positive_part"}, {"mu", -1.0}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_doc();
    doc["N"] = 0;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc["N"] = max_mode_count() + 1;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_doc();
    doc["T"] = 0.0;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    // Forcing constraints: 1 ≤ j ≤ N, α > 0, γ ≠ 0.
    doc = base_doc();
    doc["forcing"] = {{"j", 5}, {"alpha", 1.0}, {"gamma", 1.0}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc["forcing"] = {{"j", 1}, {"alpha", 0.0}, {"gamma", 1.0}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc["forcing"] = {{"j", 1}, {"alpha", -2.0}, {"gamma", 1.0}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc["forcing"] = {{"j", 1}, {"alpha", 1.0}, {"gamma", 0.0}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_doc();
    doc["initial"] = {{"u0", {0.1, 0.1, 0.1, 0.1, 0.1}}}; // longer than N
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_doc();
    doc["solver"] = {{"atol", 0.0}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc["solver"] = {{"dt_sample", -1.0}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_doc();
    doc["detector"] = {{"eta", 1.0}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc["detector"] = {{"eta", 0.0}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
    doc["detector"] = {{"T_W", 0.0}};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
}

TEST_CASE("expression strings reach every real field") {
    json doc = base_doc();
    doc["T"] = "3*pi/2";
    doc["initial"] = {{"u0", {"1/10", "sqrt(4)/40"}}};
    const ExperimentConfig cfg = parse_config(doc);
    CHECK(cfg.T == doctest::Approx(1.5 * pi).epsilon(1e-15));
    CHECK(cfg.u0[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(cfg.u0[1] == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("resolved serialization is an idempotent fixed point") {
    json pattern_doc = base_doc();
    pattern_doc["initial"] = {{"pattern", {{"j", 2}, {"amplitude", 6.0}}}};
    pattern_doc["forcing"] = {{"j", 1}, {"alpha", 1.0}, {"gamma", "4/3"}};
    pattern_doc["threshold"] = {{"bracket", {5.0, 8.0}}, {"step", 0.25}};

    for (const json& doc : {base_doc(), pattern_doc}) {
        const ExperimentConfig cfg = parse_config(doc);
        const json resolved = resolved_config_json(cfg);
        // Arrays are explicit and expressions are gone.
        REQUIRE(resolved.contains("initial"));
        REQUIRE(resolved["initial"].contains("u0"));
        CHECK(resolved["initial"]["u0"].size() == 4);
        const json again = resolved_config_json(parse_config(resolved));
        CHECK(resolved == again);
        CHECK(config_digest(resolved) == config_digest(again));
    }
}

TEST_CASE("config digest is stable, 16 hex digits, and input-sensitive") {
    const json resolved = resolved_config_json(parse_config(base_doc()));
    const std::string d1 = config_digest(resolved);
    const std::string d2 = config_digest(resolved);
    CHECK(d1 == d2);
    CHECK(std::regex_match(d1, std::regex("[0-9a-f]{16}")));

    json other = base_doc();
    other["T"] = 3.0;
    CHECK(config_digest(resolved_config_json(parse_config(other))) != d1);
}

TEST_CASE("config files load with parse errors mapped to ConfigError") {
    TempDir dir;
    const fs::path good = dir.path / "good.json";
    write_file_atomic(good, base_doc().dump(2) + "\n");
    const ExperimentConfig cfg = load_config(good);
    CHECK(cfg.N == 4);

    const fs::path bad = dir.path / "bad.json";
    write_file_atomic(bad, "{\"N\": 4,");
    CHECK_THROWS_AS(load_config(bad), ConfigError);
    CHECK_THROWS_AS(load_config(dir.path / "missing.json"), ConfigError);
}

TEST_CASE("atomic writes replace the target in one step") {
    TempDir dir;
    const fs::path p = dir.path / "out.txt";
    write_file_atomic(p, "first\n");
    CHECK(slurp(p) == "first\n");
    write_file_atomic(p, "second\n");
    CHECK(slurp(p) == "second\n");
    // No stray temporaries left behind.
    std::size_t entries = 0;
    for (auto it = fs::directory_iterator(dir.path); it != fs::directory_iterator(); ++it)
        ++entries;
    CHECK(entries == 1);
    CHECK_THROWS_AS(write_file_atomic(dir.path / "nope" / "out.txt", "x"), ResourceError);
}

TEST_CASE("simulate runner writes the CSV pair") {
    TempDir dir;
    json doc = base_doc();
    doc["N"] = 2;
    doc["T"] = 1.0;
    run_simulate(parse_config(doc), dir.path);

    const std::string tcsv = slurp(dir.path / "trajectory.csv");
    REQUIRE(!tcsv.empty());
    CHECK(tcsv.substr(0, tcsv.find('\n')) == "t,phi_1,phi_2,dphi_1,dphi_2,E");
    const std::string ecsv = slurp(dir.path / "energy.csv");
    CHECK(ecsv.substr(0, ecsv.find('\n')) == "t,E");
}

TEST_CASE("detect runner records the verdict document") {
    TempDir dir;
    json doc = base_doc();
    doc["T"] = 3.0;
    doc["initial"] = {{"pattern", {{"j", 1}, {"amplitude", 1.0}, {"residual", 1e-3}}}};
    const ExperimentConfig cfg = parse_config(doc);
    run_detect(cfg, dir.path);

    const json verdict = json::parse(slurp(dir.path / "verdict.json"));
    CHECK(verdict["status"] == "stable");
    CHECK(verdict["eta"] == 0.1);
    CHECK(verdict["T_W"] == 1.0);
    CHECK(verdict["T"] == 3.0);
    CHECK(verdict["config_digest"] == config_digest(resolved_config_json(cfg)));

    // Initial data without a prevailing mode cannot be classified.
    doc["initial"] = {{"u0", {1.0, 1.0}}};
    CHECK_THROWS_AS(run_detect(parse_config(doc), dir.path), NoPrevailingModeError);
}

TEST_CASE("threshold runner demands pattern data and a bracket") {
    TempDir dir;
    json doc = base_doc();
    doc["threshold"] = {{"bracket", {5.0, 8.0}}, {"step", 0.5}};
    CHECK_THROWS_AS(run_threshold(parse_config(doc), dir.path), ConfigError);

    json doc2 = base_doc();
    doc2["initial"] = {{"pattern", {{"j", 2}, {"amplitude", 6.0}}}};
    CHECK_THROWS_AS(run_threshold(parse_config(doc2), dir.path), ConfigError);
}

TEST_CASE("certify runner emits verdict and certificate documents") {
    TempDir dir;
    const json doc{
        {"N", 5},
        {"T", 5.0},
        {"nonlinearity", {{"kind", "positive_part"}, {"mu", 0.1}}},
        {"forcing", {{"j", 2}, {"alpha", 5e-3}, {"gamma", 1.0}}},
        {"initial", {{"u0", {0.996e-3, 1e-3, 0.996e-3, 0.996e-3, 0.996e-3}}}},
    };
    const ExperimentConfig cfg = parse_config(doc);
    run_certify(cfg, dir.path);

    const json verdict = json::parse(slurp(dir.path / "verdict.json"));
    CHECK(verdict["status"] == "stable");
    const json cert = json::parse(slurp(dir.path / "certificate.json"));
    CHECK(cert["status"] == "certified_stable");
    CHECK(cert["N"] == 5);
    CHECK(cert["limiting_margin"].get<double>() > 0.0);
    CHECK(cert["per_mode_bounds"].size() == 5);
    CHECK(cert["remainder_forced_substitution"] == true);
    CHECK(cert["config_digest"] == verdict["config_digest"]);
}

TEST_CASE("unknown reproduce targets are rejected") {
    TempDir dir;
    CHECK_THROWS_AS(run_reproduce("table9", {}, dir.path), ConfigError);
}

TEST_CASE("identical configs produce byte-identical outputs") {
    TempDir a, b;
    json doc = base_doc();
    doc["T"] = 3.0;
    doc["initial"] = {{"pattern", {{"j", 1}, {"amplitude", 1.0}, {"residual", 1e-3}}}};
    const ExperimentConfig cfg = parse_config(doc);

    run_simulate(cfg, a.path);
    run_simulate(cfg, b.path);
    CHECK(slurp(a.path / "trajectory.csv") == slurp(b.path / "trajectory.csv"));
    CHECK(slurp(a.path / "energy.csv") == slurp(b.path / "energy.csv"));

    run_detect(cfg, a.path);
    run_detect(cfg, b.path);
    const std::string verdict = slurp(a.path / "verdict.json");
    CHECK(!verdict.empty());
    CHECK(verdict == slurp(b.path / "verdict.json"));
}

TEST_CASE("certified-example reproduction emits the full document chain") {
    TempDir dir;
    run_reproduce("sec53", {}, dir.path);

    const json report = json::parse(slurp(dir.path / "report.json"));
    CHECK(report["target"] == "sec53");
    CHECK(report["prevailing_mode"] == 2);
    CHECK(report["verdict"]["status"] == "stable");
    CHECK(report["certificate"]["status"] == "certified_stable");
    for (const auto& bound : report["certificate"]["per_mode_bounds"])
        CHECK(bound.get<double>() <= 7e-4);
    // The report embeds the resolved config it ran, digest and all.
    REQUIRE(report.contains("config"));
    CHECK(report["config"]["N"] == 5);
    CHECK(report["config_digest"] == config_digest(report["config"]));
    CHECK(report["config_digest"] == report["certificate"]["config_digest"]);

    // The standalone documents land next to the report.
    CHECK(json::parse(slurp(dir.path / "certificate.json"))["status"] ==
          "certified_stable");
    CHECK(json::parse(slurp(dir.path / "verdict.json"))["status"] == "stable");
    CHECK(!slurp(dir.path / "trajectory.csv").empty());
}

TEST_CASE("detect runner on reference cubic configurations") {
    TempDir dir;
    json doc{
        {"N", 12},
        {"T", 16.0},
        {"nonlinearity", {{"kind", "cubic"}}},
        {"initial", {{"pattern", {{"j", 6}, {"amplitude", 50.097}, {"residual", 0.01}}}}},
    };
    // A sixth-mode run just under its instability threshold stays stable
    // with residual amplitudes well clear of the detector constants.
    run_detect(parse_config(doc), dir.path);
    const json verdict = json::parse(slurp(dir.path / "verdict.json"));
    CHECK(verdict["status"] == "stable");
    CHECK(verdict["ratio_amplitude"].get<double>() < 0.09);
}

TEST_CASE("simulate runner reproduces the subcritical second-mode amplitude") {
    TempDir dir;
    json doc{
        {"N", 12},
        {"T", 16.0},
        {"solver", {{"dt_sample", 0.01}}},
        {"nonlinearity", {{"kind", "cubic"}}},
        {"initial", {{"pattern", {{"j", 2}, {"amplitude", 3.1}, {"residual", 0.01}}}}},
    };
    run_simulate(parse_config(doc), dir.path);

    // Below the instability threshold the prevailing mode keeps its
    // amplitude: the phi_2 column peaks at the initial 3.1.
    std::ifstream in(dir.path / "trajectory.csv");
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line.substr(0, 14) == "t,phi_1,phi_2,");
    double sup2 = 0.0;
    while (std::getline(in, line)) {
        std::size_t pos = 0;
        for (int field = 0; field < 2; ++field) pos = line.find(',', pos) + 1;
        sup2 = std::max(sup2, std::abs(std::strtod(line.c_str() + pos, nullptr)));
    }
    CHECK(sup2 == doctest::Approx(3.1).epsilon(0.15));
}

TEST_CASE("command line exit codes") {
    if (!fs::exists("beamlab")) {
        MESSAGE("beamlab binary not in the working directory; skipping");
        return;
    }
    TempDir dir;
    auto run = [&](const std::string& args) {
        const std::string cmd = "./beamlab " + args + " >/dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc);
    };

    CHECK(run("simulate --config " + (dir.path / "missing.json").string()) == 2);

    write_file_atomic(dir.path / "bad.json", "{\"N\":");
    CHECK(run("simulate --config " + (dir.path / "bad.json").string()) == 2);

    json doc = base_doc();
    doc["initial"] = {{"u0", {1.0, 1.0}}};
    doc["T"] = 3.0;
    write_file_atomic(dir.path / "flat.json", doc.dump() + "\n");
    CHECK(run("detect --config " + (dir.path / "flat.json").string() + " --out " +
              (dir.path / "out").string()) == 4);

    json ok = base_doc();
    ok["N"] = 2;
    ok["T"] = 1.0;
    write_file_atomic(dir.path / "ok.json", ok.dump() + "\n");
    CHECK(run("simulate --config " + (dir.path / "ok.json").string() + " --out " +
              (dir.path / "out").string()) == 0);
    CHECK(fs::exists(dir.path / "out" / "trajectory.csv"));
}
