#include "fermiwalk/io/runner.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace fermiwalk;
using namespace fermiwalk::io;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = FERMIWALK_CONFIG_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fermiwalk_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// runs the real binary; returns its exit status, stderr goes to log
int cli(const std::string& args, const fs::path& log, const std::string& env = "") {
    const std::string cmd = env + " \"" + std::string(FERMIWALK_BINARY) + "\" " + args + " 2>\"" + log.string() + "\"";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string cfg(const std::string& name) { return "\"" + kConfigs + "/" + name + "\""; }

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    write_text(p, text);
    return p;
}

const char* kMinimal = R"({
  "walk": {"kind": "cycle", "n": 2, "coins": ["hadamard", "hadamard"]},
  "environment": {"U": [[1]], "F": [[0.5, 0, 0.125]]},
  "coupling": {"alpha": 0.7853981633974483, "v": [1]}
})";

} // namespace

TEST(Config, CanonicalRoundTrip) {
    for (const auto& e : fs::directory_iterator(kConfigs)) {
        const ExperimentConfig a = load_config(e.path().string());
        const ExperimentConfig b = parse_config(to_json(a));
        EXPECT_EQ(to_json(a).dump(), to_json(b).dump()) << e.path();
        EXPECT_EQ(inputs_hash(a), inputs_hash(b));
    }
}

TEST(Config, DefaultsAreFilledIn) {
    const ExperimentConfig c = parse_config_text(kMinimal);
    EXPECT_FALSE(c.command.has_value());
    EXPECT_EQ(c.options.steps, 200);
    EXPECT_EQ(c.options.samples, 64);
    EXPECT_EQ(c.options.seed, 0u);
    const json j = to_json(c);
    EXPECT_EQ(j.at("options").at("bins"), 512);
    EXPECT_EQ(j.at("walk").at("star_index"), 0);
}

TEST(Config, UnknownFieldNamesItsPath) {
    json j = json::parse(kMinimal);
    j["walk"]["coins_typo"] = 1;
    try {
        parse_config(j);
        FAIL() << "accepted an unknown field";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("walk.coins_typo"), std::string::npos) << e.what();
    }
    j = json::parse(kMinimal);
    j["environment"]["F"][0][1] = "x";
    try {
        parse_config(j);
        FAIL() << "accepted a string coefficient";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("environment.F[0][1]"), std::string::npos) << e.what();
    }
}

TEST(Config, RejectsMalformedInput) {
    EXPECT_THROW(parse_config_text("{not json"), ValidationError);
    EXPECT_THROW(load_config("/nonexistent/fermiwalk.json"), ValidationError);
    json j = json::parse(kMinimal);
    j["command"] = "dance";
    EXPECT_THROW(parse_config(j), ValidationError);
    j = json::parse(kMinimal);
    j["coupling"]["alphas"] = {0.1, 0.2};
    EXPECT_THROW(parse_config(j), ValidationError); // both alpha and alphas
    j = json::parse(kMinimal);
    j["options"] = {{"plots", {"histogram"}}};
    EXPECT_THROW(parse_config(j), ValidationError);
    j = json::parse(kMinimal);
    j["options"] = {{"seed", -1}};
    EXPECT_THROW(parse_config(j), ValidationError);
}

TEST(Config, HashIgnoresOutputDirOnly) {
    ExperimentConfig a = parse_config_text(kMinimal);
    ExperimentConfig b = a;
    b.output_dir = "/somewhere/else";
    EXPECT_EQ(inputs_hash(a), inputs_hash(b));
    b.options.seed = 1;
    EXPECT_NE(inputs_hash(a), inputs_hash(b));
    EXPECT_EQ(inputs_hash(a).size(), 16u);
}

TEST(Output, SeventeenDigitsRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(fmt17(x)), x);
    EXPECT_EQ(fmt17(-0.0), "0");
    EXPECT_EQ(dump_json(json{{"a", std::nan("")}}), "{\n  \"a\": null\n}\n");
}

TEST(Threads, FlagThenEnvironmentThenOne) {
    ::unsetenv("FERMIWALK_THREADS");
    EXPECT_EQ(resolve_threads(std::nullopt), 1);
    ::setenv("FERMIWALK_THREADS", "3", 1);
    EXPECT_EQ(resolve_threads(std::nullopt), 3);
    EXPECT_EQ(resolve_threads(5), 5);
    ::setenv("FERMIWALK_THREADS", "three", 1);
    EXPECT_THROW(resolve_threads(std::nullopt), ValidationError);
    ::unsetenv("FERMIWALK_THREADS");
    EXPECT_THROW(resolve_threads(0), ValidationError);
}

TEST(Execute, CommandMismatchIsValidationError) {
    const ExperimentConfig c = load_config(kConfigs + "/hadamard_asymptotic.json");
    EXPECT_THROW(execute("flux", c, 1), ValidationError);
    EXPECT_THROW(execute("no_such_command", c, 1), ValidationError);
}

TEST(Execute, PlotKindMustMatchCommand) {
    ExperimentConfig c = parse_config_text(kMinimal);
    c.options.plots = {"dos"};
    EXPECT_THROW(execute("asymptotic", c, 1), ValidationError);
    c.options.plots = {"convergence"};
    EXPECT_THROW(execute("flux", c, 1), ValidationError);
}

TEST(Execute, AsymptoticRecord) {
    const ExperimentConfig c = load_config(kConfigs + "/hadamard_asymptotic.json");
    const CommandOutput out = execute("asymptotic", c, 1);
    const json& run = out.result.at("runs").at(0);
    for (const char* key : {"Delta", "eigenvalues", "profile", "correlations", "fluxes", "particle_number"})
        EXPECT_TRUE(run.contains(key)) << key;
    EXPECT_EQ(run.at("eigenvalues").size(), 4u);
    // Δ is a density: spectrum in [0, 1]
    for (double x : run.at("eigenvalues")) {
        EXPECT_GE(x, -1e-12);
        EXPECT_LE(x, 1 + 1e-12);
    }
    EXPECT_LT(run.at("moller_deviation").get<double>(), 1e-10);
    EXPECT_EQ(out.result.at("inputs_hash"), inputs_hash(c));
}

TEST(Binary, AsymptoticWritesArtifacts) {
    const fs::path dir = scratch("asym");
    EXPECT_EQ(cli("asymptotic --config " + cfg("hadamard_asymptotic.json") + " --out \"" + dir.string() + "\"", dir / "log"), 0)
        << slurp(dir / "log");
    const json r = json::parse(slurp(dir / "result.json"));
    EXPECT_EQ(r.at("command"), "asymptotic");
    EXPECT_EQ(r.at("provenance").at("tool"), "fermiwalk");
    EXPECT_EQ(slurp(dir / "profile.csv").substr(0, 13), "node,density\n");
    EXPECT_EQ(slurp(dir / "correlations.csv").substr(0, 26), "node_a,node_b,correlation\n");
}

TEST(Binary, RerunsAreByteIdentical) {
    const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
    for (const fs::path& d : {a, b})
        ASSERT_EQ(cli("flux --config " + cfg("flux_sweep.json") + " --out \"" + d.string() + "\"", d / "log"), 0);
    EXPECT_EQ(slurp(a / "result.json"), slurp(b / "result.json"));
    EXPECT_EQ(slurp(a / "flux_vs_alpha.csv"), slurp(b / "flux_vs_alpha.csv"));
    EXPECT_EQ(slurp(a / "flux_vs_alpha.csv").substr(0, 19), "alpha,phi_1,phi_2\n0");
}

TEST(Binary, DisorderIsThreadInvariant) {
    const fs::path a = scratch("dos_1"), b = scratch("dos_4"), c = scratch("dos_env");
    ASSERT_EQ(cli("disorder_dos --config " + cfg("disorder_dos.json") + " --threads 1 --out \"" + a.string() + "\"", a / "log"), 0);
    ASSERT_EQ(cli("disorder_dos --config " + cfg("disorder_dos.json") + " --threads 4 --out \"" + b.string() + "\"", b / "log"), 0);
    ASSERT_EQ(cli("disorder_dos --config " + cfg("disorder_dos.json") + " --out \"" + c.string() + "\"", c / "log",
                  "FERMIWALK_THREADS=3"),
              0);
    EXPECT_EQ(slurp(a / "result.json"), slurp(b / "result.json"));
    EXPECT_EQ(slurp(a / "dos.csv"), slurp(b / "dos.csv"));
    EXPECT_EQ(slurp(a / "dos.csv"), slurp(c / "dos.csv"));
    EXPECT_EQ(slurp(a / "dos.csv").substr(0, 18), "theta,mass,stderr\n");
    const json r = json::parse(slurp(a / "result.json"));
    EXPECT_TRUE(r.at("band_support").at("inside").get<bool>());
}

TEST(Binary, SeedFlagOverridesConfig) {
    const fs::path a = scratch("seed_a"), b = scratch("seed_b");
    ASSERT_EQ(cli("averaged_density --config " + cfg("averaged_density.json") + " --seed 11 --out \"" + a.string() + "\"", a / "log"), 0);
    ASSERT_EQ(cli("averaged_density --config " + cfg("averaged_density.json") + " --seed 12 --out \"" + b.string() + "\"", b / "log"), 0);
    const json ra = json::parse(slurp(a / "result.json")), rb = json::parse(slurp(b / "result.json"));
    EXPECT_EQ(ra.at("provenance").at("seed"), 11);
    EXPECT_NE(ra.at("value"), rb.at("value"));
}

TEST(Binary, SimulateConvergenceCsv) {
    const fs::path d = scratch("sim");
    ASSERT_EQ(cli("simulate --config " + cfg("two_reservoirs_simulate.json") + " --out \"" + d.string() + "\"", d / "log"), 0)
        << slurp(d / "log");
    EXPECT_EQ(slurp(d / "convergence.csv").substr(0, 12), "t,log_error\n");
    const json r = json::parse(slurp(d / "result.json"));
    EXPECT_LT(r.at("error").get<double>(), 1e-10);
}

TEST(Binary, BadSymbolExitsTwoAndNamesTheBound) {
    const fs::path d = scratch("badf");
    EXPECT_EQ(cli("validate --config " + cfg("validate_bad_symbol.json") + " --out \"" + d.string() + "\"", d / "log"), 2);
    const json r = json::parse(slurp(d / "result.json"));
    EXPECT_FALSE(r.at("valid").get<bool>());
    EXPECT_NE(r.at("symbol").at("message").get<std::string>().find("lower bound 0"), std::string::npos);
    // same symbol through a physics command: no result, exit 2
    const fs::path e = scratch("badf_asym");
    json j = json::parse(slurp(kConfigs + "/validate_bad_symbol.json"));
    j.erase("command");
    const fs::path p = write_config(e, j.dump());
    EXPECT_EQ(cli("asymptotic --config \"" + p.string() + "\" --out \"" + e.string() + "\"", e / "log"), 2);
    EXPECT_NE(slurp(e / "log").find("environment.F"), std::string::npos) << slurp(e / "log");
}

TEST(Binary, NonCyclicWalkExitsThree) {
    const fs::path d = scratch("noncyc");
    EXPECT_EQ(cli("validate --config " + cfg("hadamard_n4_not_cyclic.json") + " --out \"" + d.string() + "\"", d / "log"), 3);
    const json r = json::parse(slurp(d / "result.json"));
    EXPECT_FALSE(r.at("walk").at("cyclic").get<bool>());
    EXPECT_EQ(r.at("walk").at("krylov_rank"), 6);
    json j = json::parse(slurp(kConfigs + "/hadamard_n4_not_cyclic.json"));
    j.erase("command");
    const fs::path p = write_config(d, j.dump());
    EXPECT_EQ(cli("asymptotic --config \"" + p.string() + "\" --out \"" + d.string() + "\"", d / "log2"), 3);
}

TEST(Binary, UsageErrorsExitTwo) {
    const fs::path d = scratch("usage");
    EXPECT_EQ(cli("asymptotic --out \"" + d.string() + "\"", d / "log"), 2);                    // no --config
    EXPECT_EQ(cli("asymptotic --config /nonexistent.json --out \"" + d.string() + "\"", d / "log"), 2);
    EXPECT_EQ(cli("explode --config " + cfg("hadamard_asymptotic.json"), d / "log"), 2);
    EXPECT_EQ(cli("flux --config " + cfg("hadamard_asymptotic.json") + " --out \"" + d.string() + "\"", d / "log"), 2);
    EXPECT_EQ(cli("asymptotic --config " + cfg("hadamard_asymptotic.json") + " --threads 0 --out \"" + d.string() + "\"", d / "log"), 2);
    EXPECT_EQ(cli("asymptotic --config " + cfg("hadamard_asymptotic.json") + " --out \"" + d.string() + "\"", d / "log",
                  "FERMIWALK_THREADS=zero"),
              2);
    json j = json::parse(slurp(kConfigs + "/hadamard_asymptotic.json"));
    j["options"]["plots"] = {"dos"};
    const fs::path p = write_config(d, j.dump());
    EXPECT_EQ(cli("asymptotic --config \"" + p.string() + "\" --out \"" + d.string() + "\"", d / "log"), 2);
    EXPECT_NE(slurp(d / "log").find("options.plots"), std::string::npos);
}

TEST(Binary, OracleCheckPasses) {
    const fs::path d = scratch("oracle");
    ASSERT_EQ(cli("oracle_check --config " + cfg("oracle_check.json") + " --out \"" + d.string() + "\"", d / "log"), 0)
        << slurp(d / "log");
    const json r = json::parse(slurp(d / "result.json"));
    EXPECT_TRUE(r.at("pass").get<bool>());
    EXPECT_LE(r.at("total_variation").get<double>(), 1e-10);
}

TEST(Binary, OutputDirFromConfig) {
    const fs::path d = scratch("outdir");
    json j = json::parse(kMinimal);
    j["output_dir"] = (d / "from_config").string();
    const fs::path p = write_config(d, j.dump());
    ASSERT_EQ(cli("validate --config \"" + p.string() + "\"", d / "log"), 0) << slurp(d / "log");
    EXPECT_TRUE(fs::exists(d / "from_config" / "result.json"));
    EXPECT_TRUE(fs::exists(d / "from_config" / "W.csv"));
    EXPECT_TRUE(fs::exists(d / "from_config" / "M.csv"));
}
