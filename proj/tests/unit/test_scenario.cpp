#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "afcmem/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScenarios = AFCMEM_SCENARIO_DIR;
const fs::path kCli = AFCMEM_CLI;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh scratch directory per test.
fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("afcmem-test-" + name);
  fs::remove_all(dir);
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = "\"" + kCli.string() + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json run_bundled(const std::string& name, const fs::path& root) {
  afcmem::RunOptions opt;
  opt.output_root = root;
  const auto r = afcmem::run_scenario_file(kScenarios / (name + ".yaml"), opt);
  return json::parse(slurp(r.output_dir / "results.json"));
}

std::string message_of(const std::string& yaml) {
  try {
    afcmem::validate_scenario(yaml, "inline.yaml");
  } catch (const afcmem::ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kSmall = R"(name: small
experiment: eq1-efficiency
comb:
  peak_od: 1.1
numeric:
  enabled: false
echo_timing:
  enabled: false
)";

}  // namespace

TEST(Catalog, ExactlyTheTwelveBundledNamesSorted) {
  std::vector<std::string> names;
  for (const auto& p : afcmem::bundled_scenarios(kScenarios)) {
    const auto info = afcmem::validate_scenario_file(p);
    EXPECT_EQ(info.name, p.stem().string());
    EXPECT_FALSE(info.description.empty()) << info.name;
    names.push_back(info.name);
  }
  const std::vector<std::string> expected = {"absorption",     "comb-synthesis",  "eq1-efficiency", "g2-cw",
                                             "g2-pulsed",      "hahn-echo",       "hole-decay",     "multimode-59",
                                             "qd-lifetime",    "qd-storage",      "random-timebins", "sequence-timing"};
  EXPECT_EQ(names, expected);
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
}

TEST(Catalog, CliListPrintsSortedNames) {
  const auto out = scratch("list");
  fs::create_directories(out);
  const std::string cmd = "\"" + kCli.string() + "\" list > \"" + (out / "list.txt").string() + "\"";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  std::ifstream in(out / "list.txt");
  std::vector<std::string> names;
  for (std::string line; std::getline(in, line);) names.push_back(line.substr(0, line.find('\t')));
  EXPECT_EQ(names.size(), 12u);
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
  fs::remove_all(out);
}

TEST(Run, EveryBundledScenarioSucceeds) {
  const auto root = scratch("all");
  for (const auto& p : afcmem::bundled_scenarios(kScenarios)) {
    afcmem::RunOptions opt;
    opt.output_root = root;
    const auto r = afcmem::run_scenario_file(p, opt);
    EXPECT_TRUE(fs::exists(r.output_dir / "results.json")) << p;
    for (const auto& a : r.artifacts) EXPECT_TRUE(fs::exists(r.output_dir / a)) << a;
    EXPECT_FALSE(fs::exists(root / ("." + r.info.output + ".partial")));
  }
  fs::remove_all(root);
}

TEST(Run, AnalyticEfficiencyScenario) {
  const auto root = scratch("efficiency");
  const auto j = run_bundled("eq1-efficiency", root);
  EXPECT_NEAR(j["results"]["analytic_efficiency"].get<double>(), 0.0673, 5e-5);
  EXPECT_NEAR(j["results"]["total_efficiency"].get<double>(), 0.0114, 5e-5);
  for (const auto& row : j["results"]["echo_timing"])
    EXPECT_LE(std::abs(row["error_steps"].get<double>()), 1.0) << row.dump();
  fs::remove_all(root);
}

TEST(Run, Multimode59RecalledInOrder) {
  const auto root = scratch("mm");
  const auto j = run_bundled("multimode-59", root);
  EXPECT_EQ(j["results"]["modes_recalled"].get<int>(), 59);
  EXPECT_TRUE(j["results"]["order_preserved"].get<bool>());
  EXPECT_LE(j["results"]["max_cross_talk_db"].get<double>(), -20.0);
  EXPECT_EQ(j["results"]["capacity"].get<int>(), 144);
  fs::remove_all(root);
}

TEST(Run, SeededScenariosAreByteIdentical) {
  const auto a = scratch("det-a"), b = scratch("det-b");
  for (const auto& p : afcmem::bundled_scenarios(kScenarios)) {
    const auto info = afcmem::validate_scenario_file(p);
    if (!info.seed) continue;
    afcmem::RunOptions oa, ob;
    oa.output_root = a;
    ob.output_root = b;
    const auto ra = afcmem::run_scenario_file(p, oa);
    const auto rb = afcmem::run_scenario_file(p, ob);
    EXPECT_EQ(slurp(ra.output_dir / "results.json"), slurp(rb.output_dir / "results.json")) << info.name;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Run, RerunReplacesPreviousOutput) {
  const auto root = scratch("rerun");
  afcmem::RunOptions opt;
  opt.output_root = root;
  const auto first = afcmem::run_scenario(kSmall, opt);
  std::ofstream(first.output_dir / "stale.txt") << "x";
  const auto second = afcmem::run_scenario(kSmall, opt);
  EXPECT_FALSE(fs::exists(second.output_dir / "stale.txt"));
  EXPECT_EQ(first.results_json, second.results_json);
  fs::remove_all(root);
}

TEST(Config, ParseErrorHasLineAndColumn) {
  const auto msg = message_of("name: x\nexperiment: [unclosed\n");
  EXPECT_NE(msg.find("line"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Config, UnknownFieldReportsItsPath) {
  const auto msg = message_of(std::string(kSmall) + "scan:\n  finess_max: 4\n");
  EXPECT_NE(msg.find("scan.finess_max"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 10"), std::string::npos) << msg;
}

TEST(Config, DuplicateFieldRejected) {
  const auto msg = message_of("name: x\nexperiment: g2-cw\nseed: 1\nseed: 2\n");
  EXPECT_NE(msg.find("seed (line 4"), std::string::npos) << msg;
  EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
}

TEST(Config, TypeErrorReportsItsPath) {
  const auto msg = message_of("name: small\nexperiment: eq1-efficiency\ncomb:\n  finesse: two\n");
  EXPECT_NE(msg.find("comb.finesse"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
}

TEST(Config, UnknownExperimentListsChoices) {
  const auto msg = message_of("name: x\nexperiment: nope\n");
  EXPECT_NE(msg.find("hahn-echo"), std::string::npos) << msg;
}

TEST(Config, StochasticExperimentNeedsSeed) {
  auto text = slurp(kScenarios / "g2-cw.yaml");
  text.replace(text.find("seed:"), text.find('\n', text.find("seed:")) - text.find("seed:") + 1, "");
  EXPECT_NE(message_of(text).find("seed"), std::string::npos);
}

TEST(Config, CombNeedsExactlyOneSpacing) {
  auto text = slurp(kScenarios / "comb-synthesis.yaml");
  text.replace(text.find("  storage_time"), 0, "  tooth_spacing: 33.0e6\n");
  EXPECT_FALSE(message_of(text).empty());
}

TEST(Config, OutputMustBeRelative) {
  EXPECT_FALSE(message_of(std::string(kSmall) + "output: /etc/x\n").empty());
  EXPECT_FALSE(message_of(std::string(kSmall) + "output: ../x\n").empty());
}

TEST(Cli, MalformedConfigExitsTwoAndWritesNothing) {
  const auto root = scratch("bad");
  const auto file = fs::temp_directory_path() / "afcmem-bad.yaml";
  std::ofstream(file) << kSmall << "comb:\n  duplicate: 1\n";
  EXPECT_EQ(cli("run \"" + file.string() + "\" -o \"" + root.string() + "\""), 2);
  EXPECT_FALSE(fs::exists(root));
  std::ofstream(file) << "name: x\nexperiment: eq1-efficiency\nscan: {points: 2\n";
  EXPECT_EQ(cli("validate \"" + file.string() + "\""), 2);
  fs::remove(file);
}

TEST(Cli, RuntimeFailureLeavesNoPartialOutput) {
  const auto root = scratch("late");
  auto text = slurp(kScenarios / "eq1-efficiency.yaml");
  text.replace(text.find("storage_time: 90.0e-9"), 21, "storage_time: 1.0e-9");
  const auto file = fs::temp_directory_path() / "afcmem-late.yaml";
  std::ofstream(file) << text;
  EXPECT_EQ(cli("run \"" + file.string() + "\" -o \"" + root.string() + "\""), 2);
  EXPECT_FALSE(fs::exists(root));
  fs::remove(file);
}

TEST(Cli, UnwritableOutputRootExitsThree) {
  const auto blocker = fs::temp_directory_path() / "afcmem-blocker";
  fs::remove_all(blocker);
  std::ofstream(blocker) << "file";
  EXPECT_EQ(cli("run g2-pulsed -o \"" + blocker.string() + "\""), 3);
  fs::remove(blocker);
}

TEST(Cli, OutputRootFromEnvironment) {
  const auto root = scratch("env");
  const std::string cmd = "AFCMEM_OUTPUT_ROOT=\"" + root.string() + "\" \"" + kCli.string() +
                          "\" run sequence-timing -q >/dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(root / "sequence-timing" / "results.json"));
  EXPECT_TRUE(fs::exists(root / "sequence-timing" / "timeline.csv"));
  fs::remove_all(root);
}

TEST(Cli, SvgFlagAddsPlots) {
  const auto root = scratch("svg");
  ASSERT_EQ(cli("run hole-decay --svg -q -o \"" + root.string() + "\""), 0);
  bool any = false;
  for (const auto& e : fs::directory_iterator(root / "hole-decay")) {
    if (e.path().extension() == ".svg") {
      any = true;
      EXPECT_NE(slurp(e.path()).find("<svg"), std::string::npos);
    }
  }
  EXPECT_TRUE(any);
  fs::remove_all(root);
}

TEST(Cli, VersionAndUsage) {
  EXPECT_EQ(cli("version"), 0);
  EXPECT_NE(cli(""), 0);
  EXPECT_EQ(cli("validate no-such-scenario"), 2);
}
