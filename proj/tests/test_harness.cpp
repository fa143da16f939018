#include <cmath>

#include <gtest/gtest.h>

#include "crlab/errors.hpp"
#include "crlab/harness.hpp"
#include "test_support.hpp"

using namespace crlab;
namespace fs = std::filesystem;

namespace {

Json small_config(const fs::path& out) {
  return Json{{"name", "small"},
              {"instance",
               {{"generator", "synthetic"},
                {"params", {{"c", 1.1}, {"horizon", 400}, {"sigma", 0.05}}}}},
              {"seeds", {1, 2, 3}},
              {"policies",
               {{{"name", "crucb"}},
                {{"name", "sw-ts"}, {"params", {{"window", 50}}}},
                {{"name", "oracle-constant"}}}},
              {"output_dir", out.string()},
              {"heatmap", {{"enabled", true}, {"bucket", 100}}}};
}

std::string config_error_path(const Json& doc) {
  try {
    auto cfg = parse_config(doc);
    build_instance(cfg.instance);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "no error";
}

}  // namespace

TEST(Aggregate, MeanAndSampleStd) {
  auto a = aggregate({{0, 2}, {2, 4}});
  EXPECT_DOUBLE_EQ(a.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(a.stddev[0], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(a.mean[1], 3.0);
  auto one = aggregate({{1, 5, 7}});
  EXPECT_EQ(one.mean, (std::vector<double>{1, 5, 7}));
  EXPECT_EQ(one.stddev, (std::vector<double>{0, 0, 0}));
  auto same = aggregate({{1, 2}, {1, 2}});
  EXPECT_EQ(same.stddev, (std::vector<double>{0, 0}));
  EXPECT_THROW(aggregate({{1, 2}, {1}}), ParameterError);
  EXPECT_THROW(aggregate({}), ParameterError);
}

TEST(Config, ErrorsCarryFieldPaths) {
  Json base = small_config("unused");
  auto with = [&](auto edit) {
    Json d = base;
    edit(d);
    return config_error_path(d);
  };
  EXPECT_EQ(with([](Json& d) { d["colour"] = 1; }), "$.colour");
  EXPECT_EQ(with([](Json& d) { d["seeds"] = Json::array(); }), "seeds");
  EXPECT_EQ(with([](Json& d) { d["seeds"][1] = -4; }), "seeds[1]");
  EXPECT_EQ(with([](Json& d) { d["policies"][1]["name"] = "nope"; }), "policies[1].name");
  EXPECT_EQ(with([](Json& d) { d["policies"][2]["label"] = "crucb"; }), "policies[2].label");
  EXPECT_EQ(with([](Json& d) { d["policies"][0]["extra"] = true; }), "policies[0].extra");
  EXPECT_EQ(with([](Json& d) { d["instance"]["params"]["sigmaa"] = 0.1; }), "instance.params.sigmaa");
  EXPECT_EQ(with([](Json& d) { d["instance"]["generator"] = "nope"; }), "instance.generator");
  EXPECT_EQ(with([](Json& d) { d["heatmap"]["size"] = 3; }), "heatmap.size");
  EXPECT_EQ(with([](Json& d) { d["threads"] = 0; }), "threads");
}

TEST(Config, InlineInstance) {
  Json doc = {{"instance",
               {{"inline",
                 {{"name", "pair"},
                  {"horizon", 20},
                  {"arms", {{{"type", "constant"}, {"value", 0.5}}, {{"type", "ramp"}, {"slope", 0.3}, {"plateau", 1.0}}}},
                  {"family", {{"kind", "explicit"}, {"subsets", {{1}, {2}}}}}}}}},
              {"seeds", {0}},
              {"policies", {{{"name", "crucb"}}}}};
  auto cfg = parse_config(doc);
  auto inst = build_instance(cfg.instance);
  EXPECT_EQ(inst.name, "pair");
  EXPECT_EQ(inst.num_arms(), 2u);
  doc["instance"]["inline"]["arms"][1]["slop"] = 1;
  EXPECT_EQ(config_error_path(doc), "instance.inline.arms[1].slop");
}

TEST(Harness, RunSingleConservesPulls) {
  auto inst = build_instance({"synthetic", {{"horizon", 300}}, std::nullopt});
  auto trace = run_single(inst, {"sw-cucb", {"sw-cucb", Json::object()}}, 4, 300);
  ASSERT_EQ(trace.actions.size(), 300u);
  std::vector<PullCount> counted(inst.num_arms(), 0);
  for (const auto& s : trace.actions) {
    for (int a : s) ++counted[a];
  }
  EXPECT_EQ(counted, trace.final_pulls);
  EXPECT_THROW(run_single(inst, {"crucb", {"crucb", Json::object()}}, 1, 301), ParameterError);
}

TEST(Harness, ExperimentOutputs) {
  const auto dir = scratch_dir();
  auto result = run_experiment(parse_config(small_config(dir)));
  EXPECT_EQ(result.runs.size(), 9u);
  for (const auto& r : result.runs) {
    EXPECT_EQ(r.status, "ok");
    if (r.policy == "oracle-constant") EXPECT_EQ(r.final_regret, 0.0);
  }
  const auto csv = slurp(dir / "synthetic__crucb__seed2.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,policy,seed,expected_reward,cum_reward,oracle_cum,regret");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 401);
  const auto agg = slurp(dir / "aggregate__synthetic__sw-ts.csv");
  EXPECT_EQ(agg.substr(0, agg.find('\n')), "t,policy,runs,mean_regret,std_regret");
  EXPECT_NE(agg.find("\n1,sw-ts,3,"), std::string::npos);
  const auto manifest = Json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["runs"].size(), 9u);
  EXPECT_EQ(manifest["horizon"], 400);
  EXPECT_EQ(manifest["regret"], "pseudo");
  const auto best = oracle_super_arm(build_instance(parse_config(small_config(dir)).instance), 400).arm;
  std::string expected = "arm,1-100,101-200,201-300,301-400\n";
  for (int a = 0; a < 4; ++a) {
    const bool on = std::find(best.begin(), best.end(), a) != best.end();
    expected += std::to_string(a + 1) + (on ? ",300,300,300,300\n" : ",0,0,0,0\n");
  }
  EXPECT_EQ(slurp(dir / "heatmap__synthetic__oracle-constant.csv"), expected);
}

TEST(Harness, ByteIdenticalReruns) {
  const auto dir = scratch_dir();
  auto cfg = parse_config(small_config(dir / "a"));
  cfg.threads = 3;
  run_experiment(cfg);
  cfg.output_dir = (dir / "b").string();
  cfg.threads = 1;
  run_experiment(cfg);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    const auto name = e.path().filename();
    if (name == "manifest.json") continue;
    ASSERT_EQ(slurp(e.path()), slurp(dir / "b" / name)) << name;
    ++compared;
  }
  EXPECT_EQ(compared, 9u * 2 + 3 * 2);
}

TEST(Harness, FailedRunRecordedOthersProceed) {
  const auto dir = scratch_dir();
  Json doc = small_config(dir);
  doc["policies"].push_back({{"name", "constant"}, {"params", {{"super_arm", {1, 4}}}}});
  auto result = run_experiment(parse_config(doc));
  int failed = 0, ok = 0;
  for (const auto& r : result.runs) (r.status == "failed" ? failed : ok)++;
  EXPECT_EQ(failed, 3);
  EXPECT_EQ(ok, 9);
  const auto manifest = Json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["runs"].size(), 12u);
  EXPECT_EQ(manifest["runs"][9]["status"], "failed");
  EXPECT_NE(manifest["runs"][9]["error"].get<std::string>().find("super_arm"), std::string::npos);
}

TEST(Harness, InvalidInstanceRejected) {
  Json doc = small_config(scratch_dir());
  doc["instance"] = {{"inline",
                      {{"horizon", 3},
                       {"arms", {{{"type", "tabulated"}, {"values", {0.1, 0.3, 0.2}}}}},
                       {"family", {{"kind", "explicit"}, {"subsets", {{1}}}}}}}};
  doc["policies"] = {{{"name", "crucb"}}};
  EXPECT_THROW(run_experiment(parse_config(doc)), ConfigError);
  doc = small_config(scratch_dir());
  doc["horizon"] = 401;
  EXPECT_THROW(run_experiment(parse_config(doc)), ConfigError);
}

TEST(Heatmap, ConstantPolicyRowsAndTotals) {
  std::vector<std::vector<SuperArm>> traces{std::vector<SuperArm>(10, SuperArm{1, 2}),
                                            std::vector<SuperArm>(10, SuperArm{1, 2})};
  auto m = exploration_heatmap(traces, 4, 3);
  EXPECT_EQ(m.buckets(), 4u);
  for (std::size_t b = 0; b < 4; ++b) {
    EXPECT_EQ(m.counts[0][b], 0);
    EXPECT_EQ(m.counts[3][b], 0);
    EXPECT_EQ(m.counts[1][b], b < 3 ? 6 : 2);
  }
  EXPECT_DOUBLE_EQ(final_bucket_mass(m, {1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(final_bucket_mass(m, {1}), 0.5);

  std::vector<std::vector<SuperArm>> mixed{{{0}, {1, 2}, {0, 2}, {2}}};
  auto whole = exploration_heatmap(mixed, 3, 4);
  ASSERT_EQ(whole.buckets(), 1u);
  EXPECT_EQ(whole.counts[0][0], 2);
  EXPECT_EQ(whole.counts[1][0], 1);
  EXPECT_EQ(whole.counts[2][0], 3);
  EXPECT_THROW(exploration_heatmap(mixed, 3, 0), ParameterError);
}

TEST(Heatmap, ExportFromTraceFiles) {
  const auto dir = scratch_dir();
  run_experiment(parse_config(small_config(dir)));
  auto tf = read_trace_csv(dir / "synthetic__sw-ts__seed3.trace.csv");
  EXPECT_EQ(tf.instance, "synthetic");
  EXPECT_EQ(tf.policy, "sw-ts");
  EXPECT_EQ(tf.seed, 3u);
  EXPECT_EQ(tf.actions.size(), 400u);
  auto written = export_heatmaps(dir, dir / "heat", 100);
  EXPECT_EQ(written.size(), 3u);
  EXPECT_EQ(slurp(dir / "heat" / "heatmap__synthetic__crucb.csv"), slurp(dir / "heatmap__synthetic__crucb.csv"));
  EXPECT_THROW(read_trace_csv(dir / "manifest.json"), ParameterError);
}
