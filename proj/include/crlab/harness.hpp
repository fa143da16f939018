#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crlab/instance.hpp"
#include "crlab/instance_json.hpp"
#include "crlab/oracle.hpp"
#include "crlab/policies.hpp"

namespace crlab {

/// Either a named generator with parameters or an inline instance document.
struct InstanceSpec {
  std::string generator;
  Json params = Json::object();
  std::optional<Json> inline_doc;
};

struct PolicyEntry {
  std::string label;  // unique within a config; defaults to the policy name
  PolicySpec spec;
};

struct ExperimentConfig {
  std::string name = "experiment";
  InstanceSpec instance;
  std::optional<PullCount> horizon;  // defaults to the instance horizon
  std::vector<std::uint64_t> seeds;
  std::vector<PolicyEntry> policies;
  std::string output_dir;  // empty: caller's default (run_experiment uses "out")
  int threads = 1;
  bool heatmap = false;
  PullCount heatmap_bucket = 0;  // episodes per bucket; 0 means horizon / 50
  bool sampled_regret = false;
  std::uint64_t config_hash = 0;  // FNV-1a of the canonical config text
};

/// Parses and validates a config document:
///
///   { "name", "instance": {"generator", "params"} | {"inline": {...}},
///     "horizon", "seeds": [..], "policies": [{"name", "label", "params"}],
///     "output_dir", "threads", "heatmap": {"enabled", "bucket"},
///     "sampled_regret" }
///
/// Unknown keys are rejected; errors are ConfigError with the field path.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::filesystem::path& file);

BanditInstance build_instance(const InstanceSpec& spec);

struct RunTrace {
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<SuperArm> actions;
  std::vector<double> expected_reward;
  std::vector<double> sampled_reward;
  std::vector<PullCount> final_pulls;
};

/// One run: fresh environment generator make_rng(seed, "env"), fresh policy,
/// `horizon` steps of select / step / update.
RunTrace run_single(const BanditInstance& inst, const PolicyEntry& policy, std::uint64_t seed, PullCount horizon);

struct RunSummary {
  std::string policy;
  std::uint64_t seed = 0;
  std::string status;  // "ok" or "failed"
  std::string error;
  double final_regret = 0.0;
  std::string regret_csv;
  std::string trace_csv;
};

struct AggregateCurve {
  std::vector<double> mean;
  std::vector<double> stddev;  // sample standard deviation, 0 for one curve
};

/// Pointwise mean and sample standard deviation. Throws ParameterError when the
/// curves have different lengths or none are given.
AggregateCurve aggregate(const std::vector<std::vector<double>>& curves);

struct HeatmapMatrix {
  PullCount bucket = 1;
  PullCount horizon = 0;
  std::vector<std::vector<PullCount>> counts;  // [arm][bucket]

  std::size_t buckets() const { return counts.empty() ? 0 : counts.front().size(); }
};

/// Pulls per base arm per bucket of `bucket` consecutive steps, summed over the
/// given traces. Throws ParameterError when bucket < 1.
HeatmapMatrix exploration_heatmap(const std::vector<std::vector<SuperArm>>& traces, std::size_t num_arms,
                                  PullCount bucket);

/// Share of the last bucket's pulls that landed on `arms`.
double final_bucket_mass(const HeatmapMatrix& m, const SuperArm& arms);

std::string heatmap_csv(const HeatmapMatrix& m);

struct ExperimentResult {
  std::string instance;
  PullCount horizon = 0;
  std::vector<RunSummary> runs;
  std::vector<std::string> files;
};

/// Runs every (policy, seed) pair on up to `threads` workers and writes, under
/// output_dir: per-run regret CSVs `<instance>__<policy>__seed<k>.csv`, trace
/// CSVs `<instance>__<policy>__seed<k>.trace.csv`, per-policy aggregates,
/// optional heatmaps and `manifest.json`. A failing run is recorded in the
/// manifest and does not stop the others.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct TraceFile {
  std::string instance;
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<SuperArm> actions;
};

/// Reads a `.trace.csv` written by run_experiment.
TraceFile read_trace_csv(const std::filesystem::path& file);

/// Builds one heatmap per policy from every trace file in `dir` and writes
/// `heatmap__<instance>__<policy>.csv` into `out_dir`. Returns written paths.
std::vector<std::string> export_heatmaps(const std::filesystem::path& dir, const std::filesystem::path& out_dir,
                                         PullCount bucket);

}  // namespace crlab
