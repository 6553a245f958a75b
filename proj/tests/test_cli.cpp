#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "levikal/cli/config.hpp"
#include "levikal/cli/scenarios.hpp"
#include "levikal/error.hpp"

using namespace levikal;
using namespace levikal::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("levikal_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p.string();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string binary() {
    const char* b = std::getenv("LEVIKAL_BIN");
    return b ? b : "";
}

int run_tool(const std::string& args) {
    const std::string cmd = "\"" + binary() + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string field_of(const std::string& text, bool strict = false) {
    try {
        validate_config_text(text, strict);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<none>";
}

const char* kBudget = R"({"scenario": "budget", "seed": 3, "model": {"noise_model": "identified"}})";

}  // namespace

TEST(Config, UnknownKeyWarnsOrFails) {
    const std::string text = R"({"scenario": "budget", "params": {"pressur": 1e-8}})";
    const ValidationResult r = validate_config_text(text);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("params.pressur"), std::string::npos);
    EXPECT_EQ(field_of(text, true), "params.pressur");
}

TEST(Config, ErrorsNameTheField) {
    EXPECT_EQ(field_of(R"({"scenario": "budget", "params": {"pressure": -1}})"), "params.pressure");
    EXPECT_EQ(field_of(R"({"scenario": "budget", "params": {"pressure": "low"}})"), "params.pressure");
    EXPECT_EQ(field_of(R"({"scenario": "budget", "model": {"noise_model": "guess"}})"), "model.noise_model");
    EXPECT_EQ(field_of(R"({"scenario": "sweep"})"), "gain_grid");
    EXPECT_EQ(field_of(R"({"scenario": "sweep", "gain_grid": [1e3, -2]})"), "gain_grid[1]");
    EXPECT_EQ(field_of(R"({"scenario": "simulate"})"), "sim");
    EXPECT_EQ(field_of(R"({"scenario": "teleport"})"), "scenario");
    EXPECT_EQ(field_of(R"({"seed": 1})"), "scenario");
}

TEST(Config, ParseErrorReportsLineAndColumn) {
    try {
        validate_config_text("{\n  \"scenario\": \"budget\",\n  \"seed\": ,\n}");
        FAIL() << "expected a parse error";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("column"), std::string::npos);
    }
}

TEST(Config, ScenarioMustMatchRequest) {
    EXPECT_THROW(validate_config_text(kBudget, false, Scenario::Sql), ConfigError);
    const ValidationResult r = validate_config_text(R"({"seed": 9})", false, Scenario::Optics);
    EXPECT_EQ(r.config.scenario, Scenario::Optics);
    EXPECT_EQ(r.config.seed, 9u);
}

TEST(Config, EchoKeepsTheDocument) {
    const ValidationResult r = validate_config_text(kBudget);
    EXPECT_EQ(r.config.echo.at("seed").get<int>(), 3);
    EXPECT_EQ(r.config.model.noise_model, "identified");
}

TEST(Scenarios, RunIsByteIdentical) {
    const fs::path dir = scratch("repeat");
    ValidationResult a = validate_config_text(kBudget);
    a.config.output_dir = (dir / "a").string();
    ValidationResult b = a;
    b.config.output_dir = (dir / "b").string();
    const RunResult ra = run_scenario(a.config);
    const RunResult rb = run_scenario(b.config);
    ASSERT_EQ(ra.artifacts.size(), rb.artifacts.size());
    ASSERT_FALSE(ra.artifacts.empty());
    for (std::size_t i = 0; i < ra.artifacts.size(); ++i) {
        EXPECT_EQ(ra.artifacts[i].name, rb.artifacts[i].name);
        EXPECT_EQ(ra.artifacts[i].sha256, rb.artifacts[i].sha256);
        EXPECT_EQ(sha256_file((dir / "a" / ra.artifacts[i].name).string()), ra.artifacts[i].sha256);
    }
    EXPECT_EQ(read_file(ra.manifest_path), read_file(rb.manifest_path));
    fs::remove_all(dir);
}

TEST(Scenarios, FailureRemovesPartialOutputs) {
    const fs::path dir = scratch("partial");
    // Position stage succeeds; driving on resonance is rejected afterwards.
    ValidationResult r = validate_config_text(
        R"({"scenario": "calibrate", "calibrate": {"position_steps": 4000,
            "drive_frequencies": [653451.3], "drive_steps": 4096, "psd_segment": 1024}})");
    r.config.output_dir = dir.string();
    EXPECT_THROW(run_scenario(r.config), Error);
    EXPECT_TRUE(fs::is_empty(dir));
    fs::remove_all(dir);
}

TEST(Scenarios, VerifyListsEverySuite) {
    EXPECT_THROW(run_verify_suites({"no_such_suite"}, 1), ConfigError);
    const auto results = run_verify_suites({"philox_kat", "optics_full_sphere", "sql_bound"}, 1);
    ASSERT_EQ(results.size(), 3u);
    for (const auto& s : results) EXPECT_TRUE(s.pass) << s.name << ": " << s.detail;
}

TEST(Tool, ExitCodes) {
    ASSERT_FALSE(binary().empty()) << "LEVIKAL_BIN not set";
    const fs::path dir = scratch("exit");
    const std::string good = write_file(dir / "budget.json", kBudget);
    EXPECT_EQ(run_tool("budget --config " + good + " --out " + (dir / "ok").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "ok" / "manifest.json"));

    const std::string bad = write_file(dir / "bad.json", R"({"scenario": "budget", "params": {"pressure": -1}})");
    EXPECT_EQ(run_tool("budget --config " + bad + " --out " + (dir / "bad").string()), 2);
    EXPECT_EQ(run_tool("sql --config " + good + " --out " + (dir / "x").string()), 2);
    EXPECT_EQ(run_tool("warp --config " + good), 2);
    EXPECT_EQ(run_tool("budget"), 2);

    const std::string unknown = write_file(dir / "unknown.json", R"({"scenario": "budget", "extra": 1})");
    EXPECT_EQ(run_tool("budget --config " + unknown + " --out " + (dir / "w").string()), 0);
    EXPECT_EQ(run_tool("budget --config " + unknown + " --strict --out " + (dir / "s").string()), 2);

    // A regular file where the output directory should go.
    const std::string blocker = write_file(dir / "blocker", "x");
    EXPECT_EQ(run_tool("budget --config " + good + " --out " + blocker + "/sub"), 4);
    EXPECT_EQ(run_tool("budget --config " + (dir / "missing.json").string()), 4);
    fs::remove_all(dir);
}

TEST(Tool, SeedOverrideAndRepeatability) {
    ASSERT_FALSE(binary().empty()) << "LEVIKAL_BIN not set";
    const fs::path dir = scratch("seed");
    const std::string cfg = write_file(
        dir / "reheat.json",
        R"({"scenario": "reheat", "reheat": {"ensemble": 4, "duration": 2e-4, "steps_per_period": 16}})");
    ASSERT_EQ(run_tool("reheat --config " + cfg + " --seed 5 --out " + (dir / "a").string()), 0);
    ASSERT_EQ(run_tool("reheat --config " + cfg + " --seed 5 --out " + (dir / "b").string()), 0);
    ASSERT_EQ(run_tool("reheat --config " + cfg + " --seed 6 --out " + (dir / "c").string()), 0);
    const std::string ma = read_file(dir / "a" / "manifest.json");
    EXPECT_EQ(ma, read_file(dir / "b" / "manifest.json"));
    EXPECT_NE(ma, read_file(dir / "c" / "manifest.json"));
    EXPECT_NE(ma.find("\"seed\": 5"), std::string::npos);
    fs::remove_all(dir);
}
