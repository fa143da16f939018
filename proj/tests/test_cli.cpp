#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "crlab/cli.hpp"
#include "crlab/instance_json.hpp"
#include "test_support.hpp"

namespace {

const std::string kConfigs = std::string(CRLAB_SOURCE_DIR) + "/configs/";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = crlab::cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

bool has_line(const std::string& text, const std::string& line) {
  return ("\n" + text).find("\n" + line + "\n") != std::string::npos;
}

}  // namespace

TEST(Cli, OracleOnTwoSingletons) {
  auto r = cli({"--porcelain", "oracle", "--config", kConfigs + "two_singletons.json", "--t", "4"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has_line(r.out, "super_arm=2")) << r.out;
  EXPECT_TRUE(has_line(r.out, "value=2.8")) << r.out;
  auto early = cli({"oracle", "--config", kConfigs + "two_singletons.json", "--t", "1"});
  EXPECT_TRUE(has_line(early.out, "super_arm: 1")) << early.out;
}

TEST(Cli, BoundsLowerBound) {
  auto r = cli({"--porcelain", "bounds", "--c", "1.5", "--T", "3200", "--L", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(has_line(r.out, "lower_unconstrained=100")) << r.out;
  EXPECT_TRUE(has_line(r.out, "lower_exponent=0.5")) << r.out;
}

TEST(Cli, BoundsFiles) {
  const auto dir = scratch_dir();
  auto r = cli({"bounds", "--c", "1.1", "--T", "1000", "--K", "3", "--L", "2", "--json", (dir / "b.json").string(),
                "--csv", (dir / "b.csv").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(crlab::Json::parse(slurp(dir / "b.json"))["params"]["K"], 3);
  EXPECT_EQ(slurp(dir / "b.csv").rfind("parameter,value\n", 0), 0u);
  EXPECT_EQ(cli({"bounds", "--K", "1", "--L", "2"}).code, 1);
}

TEST(Cli, ValidateReportsViolation) {
  auto bad = cli({"--porcelain", "validate", "--config", kConfigs + "not_rising.json"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_TRUE(has_line(bad.out, "valid=false"));
  EXPECT_NE(bad.out.find("violation=rising arm=1 n=2"), std::string::npos) << bad.out;
  auto good = cli({"validate", "--config", kConfigs + "two_singletons.json"});
  EXPECT_EQ(good.code, 0);
  auto exp = cli({"validate", "--config", kConfigs + "two_path_t20000.json"});
  EXPECT_EQ(exp.code, 0) << exp.err;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({"oracle", "--config", "x", "--bogus"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"heatmap", "--trace-dir", "x"}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, DomainErrorsExitOne) {
  auto r = cli({"oracle", "--config", "/nonexistent.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
  auto late = cli({"oracle", "--config", kConfigs + "two_singletons.json", "--t", "11"});
  EXPECT_EQ(late.code, 1);
}

TEST(Cli, ListInstances) {
  auto r = cli({"--porcelain", "list-instances"});
  EXPECT_EQ(r.code, 0);
  for (const char* g : {"synthetic", "lower_bound_pair", "constrained_pair", "kmax_counterexample"}) {
    EXPECT_TRUE(has_line(r.out, std::string("generator=") + g)) << r.out;
  }
}

TEST(Cli, RunTwiceIdenticalAndHeatmap) {
  const auto dir = scratch_dir();
  crlab::Json cfg = {{"name", "cli"},
                     {"instance", {{"generator", "synthetic"}, {"params", {{"horizon", 200}}}}},
                     {"seeds", {5, 6}},
                     {"policies", {{{"name", "crucb"}}, {{"name", "sw-cucb"}}}}};
  std::ofstream(dir / "cfg.json") << cfg.dump();
  for (const char* sub : {"a", "b"}) {
    auto r = cli({"--porcelain", "run", "--config", (dir / "cfg.json").string(), "--out", (dir / sub).string(),
                  "--threads", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(has_line(r.out, "failed=0"));
  }
  for (const auto& e : std::filesystem::directory_iterator(dir / "a")) {
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << e.path();
  }
  auto h = cli({"--porcelain", "heatmap", "--trace-dir", (dir / "a").string(), "--buckets", "50", "--out",
                (dir / "h").string()});
  EXPECT_EQ(h.code, 0) << h.err;
  EXPECT_EQ(slurp(dir / "h" / "heatmap__synthetic__crucb.csv").substr(0, 26), "arm,1-50,51-100,101-150,15");
}

TEST(Cli, OutputDirFromEnvironment) {
  const auto dir = scratch_dir();
  crlab::Json cfg = {{"instance", {{"generator", "synthetic"}, {"params", {{"horizon", 50}}}}},
                     {"seeds", {1}},
                     {"policies", {{{"name", "oracle-constant"}}}}};
  std::ofstream(dir / "cfg.json") << cfg.dump();
  ::setenv("CRLAB_OUT_DIR", (dir / "env").c_str(), 1);
  auto r = cli({"run", "--config", (dir / "cfg.json").string()});
  ::unsetenv("CRLAB_OUT_DIR");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "env" / "manifest.json"));
}

TEST(Cli, RunWithFailedPolicyExitsOne) {
  const auto dir = scratch_dir();
  crlab::Json cfg = {{"instance", {{"generator", "synthetic"}, {"params", {{"horizon", 50}}}}},
                     {"seeds", {1}},
                     {"policies", {{{"name", "constant"}, {"params", {{"super_arm", {1, 3}}}}}, {{"name", "crucb"}}}}};
  std::ofstream(dir / "cfg.json") << cfg.dump();
  auto r = cli({"--porcelain", "run", "--config", (dir / "cfg.json").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(has_line(r.out, "failed=1")) << r.out;
}
