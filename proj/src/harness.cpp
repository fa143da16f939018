#include "crlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "crlab/environment.hpp"
#include "crlab/errors.hpp"
#include "crlab/generators.hpp"

namespace fs = std::filesystem;

namespace crlab {
namespace {

template <class T>
T field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path + "." + key, "missing required field");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path + "." + key, "has the wrong type");
  }
}

template <class T>
T field_or(const Json& obj, const char* key, T fallback, const std::string& path) {
  return obj.contains(key) ? field<T>(obj, key, path) : fallback;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw Error(fmt::format("failed writing {}", path.string()));
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string join_arms(const SuperArm& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k) out += ';';
    out += std::to_string(s[k] + 1);
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

BanditInstance pick_pair(std::pair<BanditInstance, BanditInstance> pair, const std::string& variant,
                         const std::string& path) {
  if (variant == "a") return std::move(pair.first);
  if (variant == "b") return std::move(pair.second);
  throw ConfigError(path + ".variant", "expected \"a\" or \"b\"");
}

}  // namespace

BanditInstance build_instance(const InstanceSpec& spec) {
  if (spec.inline_doc) return instance_from_json(*spec.inline_doc, "instance.inline");
  const std::string path = "instance.params";
  const Json& p = spec.params;
  if (!p.is_object()) throw ConfigError(path, "expected an object");
  try {
    if (spec.generator == "synthetic") {
      reject_unknown_keys(p, {"c", "horizon", "lb_start", "lb_end", "ep_level", "sigma", "graph"}, path);
      SyntheticParams s;
      s.c = field_or<double>(p, "c", s.c, path);
      s.horizon = field_or<PullCount>(p, "horizon", s.horizon, path);
      s.lb_start = field_or<double>(p, "lb_start", s.lb_start, path);
      s.lb_end = field_or<double>(p, "lb_end", s.lb_end, path);
      s.ep_level = field_or<double>(p, "ep_level", s.ep_level, path);
      s.sigma = field_or<double>(p, "sigma", s.sigma, path);
      s.graph = field_or<std::string>(p, "graph", s.graph, path);
      return make_synthetic_instance(s);
    }
    if (spec.generator == "lower_bound_pair") {
      reject_unknown_keys(p, {"horizon", "replication", "variant"}, path);
      return pick_pair(make_lower_bound_pair(field<PullCount>(p, "horizon", path),
                                             field_or<int>(p, "replication", 1, path)),
                       field_or<std::string>(p, "variant", "a", path), path);
    }
    if (spec.generator == "constrained_pair") {
      reject_unknown_keys(p, {"horizon", "c", "replication", "variant"}, path);
      auto cp = make_constrained_pair(field<PullCount>(p, "horizon", path), field<double>(p, "c", path),
                                      field_or<int>(p, "replication", 1, path));
      return pick_pair({std::move(cp.a), std::move(cp.b)}, field_or<std::string>(p, "variant", "a", path), path);
    }
    if (spec.generator == "kmax_counterexample") {
      reject_unknown_keys(p, {"horizon"}, path);
      return make_kmax_counterexample(field<PullCount>(p, "horizon", path));
    }
  } catch (const ParameterError& e) {
    throw ConfigError(path, e.what());
  } catch (const ConstructionError& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError("instance.generator", fmt::format("unknown generator '{}'", spec.generator));
}

ExperimentConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("$", "expected an object");
  reject_unknown_keys(doc,
                      {"name", "instance", "horizon", "seeds", "policies", "output_dir", "threads", "heatmap",
                       "sampled_regret"},
                      "$");
  ExperimentConfig cfg;
  cfg.config_hash = fnv1a(doc.dump());
  cfg.name = field_or<std::string>(doc, "name", cfg.name, "$");

  if (!doc.contains("instance") || !doc.at("instance").is_object()) {
    throw ConfigError("instance", "expected an object");
  }
  const Json& inst = doc.at("instance");
  if (inst.contains("inline")) {
    reject_unknown_keys(inst, {"inline"}, "instance");
    cfg.instance.inline_doc = inst.at("inline");
  } else {
    reject_unknown_keys(inst, {"generator", "params"}, "instance");
    cfg.instance.generator = field<std::string>(inst, "generator", "instance");
    if (inst.contains("params")) cfg.instance.params = inst.at("params");
  }

  if (doc.contains("horizon")) {
    cfg.horizon = field<PullCount>(doc, "horizon", "$");
    if (*cfg.horizon < 1) throw ConfigError("horizon", "must be >= 1");
  }

  if (!doc.contains("seeds") || !doc.at("seeds").is_array() || doc.at("seeds").empty()) {
    throw ConfigError("seeds", "expected a nonempty array of nonnegative integers");
  }
  for (std::size_t k = 0; k < doc.at("seeds").size(); ++k) {
    const Json& s = doc.at("seeds")[k];
    const bool ok = s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0);
    if (!ok) throw ConfigError(fmt::format("seeds[{}]", k), "expected a nonnegative integer");
    cfg.seeds.push_back(s.get<std::uint64_t>());
  }

  if (!doc.contains("policies") || !doc.at("policies").is_array() || doc.at("policies").empty()) {
    throw ConfigError("policies", "expected a nonempty array");
  }
  std::set<std::string> labels;
  for (std::size_t k = 0; k < doc.at("policies").size(); ++k) {
    const std::string path = fmt::format("policies[{}]", k);
    const Json& p = doc.at("policies")[k];
    if (!p.is_object()) throw ConfigError(path, "expected an object");
    reject_unknown_keys(p, {"name", "label", "params"}, path);
    PolicyEntry e;
    e.spec.name = field<std::string>(p, "name", path);
    if (std::find(policy_names().begin(), policy_names().end(), e.spec.name) == policy_names().end()) {
      throw ConfigError(path + ".name", fmt::format("unknown policy '{}'", e.spec.name));
    }
    e.label = field_or<std::string>(p, "label", e.spec.name, path);
    if (e.label.empty() || e.label.find("__") != std::string::npos || e.label.find('/') != std::string::npos) {
      throw ConfigError(path + ".label", "must be nonempty and contain neither '__' nor '/'");
    }
    if (!labels.insert(e.label).second) throw ConfigError(path + ".label", "duplicate policy label");
    if (p.contains("params")) e.spec.params = p.at("params");
    if (!e.spec.params.is_object()) throw ConfigError(path + ".params", "expected an object");
    cfg.policies.push_back(std::move(e));
  }

  cfg.output_dir = field_or<std::string>(doc, "output_dir", cfg.output_dir, "$");
  cfg.threads = field_or<int>(doc, "threads", cfg.threads, "$");
  if (cfg.threads < 1) throw ConfigError("threads", "must be >= 1");
  cfg.sampled_regret = field_or<bool>(doc, "sampled_regret", false, "$");

  if (doc.contains("heatmap")) {
    const Json& h = doc.at("heatmap");
    if (!h.is_object()) throw ConfigError("heatmap", "expected an object");
    reject_unknown_keys(h, {"enabled", "bucket"}, "heatmap");
    cfg.heatmap = field_or<bool>(h, "enabled", true, "heatmap");
    cfg.heatmap_bucket = field_or<PullCount>(h, "bucket", 0, "heatmap");
    if (cfg.heatmap_bucket < 0) throw ConfigError("heatmap.bucket", "must be >= 1 (or 0 for horizon/50)");
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("$", fmt::format("cannot open config {}", file.string()));
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("$", fmt::format("invalid JSON: {}", e.what()));
  }
  return parse_config(doc);
}

RunTrace run_single(const BanditInstance& inst, const PolicyEntry& entry, std::uint64_t seed, PullCount horizon) {
  if (horizon < 1 || horizon > inst.horizon) {
    throw ParameterError(fmt::format("run horizon {} outside [1, {}]", horizon, inst.horizon));
  }
  auto policy = make_policy(entry.spec, inst, seed, "policy");
  Rng rng = make_rng(seed, "env");
  RunTrace trace;
  trace.policy = entry.label;
  trace.seed = seed;
  trace.actions.reserve(static_cast<std::size_t>(horizon));
  trace.expected_reward.reserve(static_cast<std::size_t>(horizon));
  trace.sampled_reward.reserve(static_cast<std::size_t>(horizon));
  std::vector<PullCount> pulls(inst.num_arms(), 0);
  for (PullCount t = 1; t <= horizon; ++t) {
    SuperArm s = policy->select(t);
    auto record = env_step(inst, pulls, s, t, rng);
    trace.expected_reward.push_back(super_arm_mean(inst, s, pulls));
    trace.sampled_reward.push_back(realised_reward(inst, record));
    policy->update(record);
    trace.actions.push_back(std::move(s));
  }
  trace.final_pulls = std::move(pulls);
  return trace;
}

AggregateCurve aggregate(const std::vector<std::vector<double>>& curves) {
  if (curves.empty()) throw ParameterError("aggregate needs at least one curve");
  const std::size_t n = curves.front().size();
  for (const auto& c : curves) {
    if (c.size() != n) throw ParameterError("aggregate needs curves of equal length");
  }
  AggregateCurve out;
  out.mean.assign(n, 0.0);
  out.stddev.assign(n, 0.0);
  const double count = static_cast<double>(curves.size());
  for (std::size_t t = 0; t < n; ++t) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c[t];
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& c : curves) ss += (c[t] - mean) * (c[t] - mean);
    out.mean[t] = mean;
    out.stddev[t] = curves.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  }
  return out;
}

HeatmapMatrix exploration_heatmap(const std::vector<std::vector<SuperArm>>& traces, std::size_t num_arms,
                                  PullCount bucket) {
  if (bucket < 1) throw ParameterError("heatmap bucket must be >= 1");
  HeatmapMatrix m;
  m.bucket = bucket;
  for (const auto& tr : traces) m.horizon = std::max(m.horizon, static_cast<PullCount>(tr.size()));
  const auto columns = static_cast<std::size_t>((m.horizon + bucket - 1) / bucket);
  m.counts.assign(num_arms, std::vector<PullCount>(columns, 0));
  for (const auto& tr : traces) {
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const auto col = k / static_cast<std::size_t>(bucket);
      for (ArmIndex a : tr[k]) {
        if (a < 0 || static_cast<std::size_t>(a) >= num_arms) throw ParameterError("heatmap arm index out of range");
        ++m.counts[a][col];
      }
    }
  }
  return m;
}

double final_bucket_mass(const HeatmapMatrix& m, const SuperArm& arms) {
  if (m.buckets() == 0) return 0.0;
  const std::size_t last = m.buckets() - 1;
  PullCount total = 0;
  PullCount on = 0;
  for (std::size_t a = 0; a < m.counts.size(); ++a) {
    total += m.counts[a][last];
    if (std::find(arms.begin(), arms.end(), static_cast<ArmIndex>(a)) != arms.end()) on += m.counts[a][last];
  }
  return total == 0 ? 0.0 : static_cast<double>(on) / static_cast<double>(total);
}

std::string heatmap_csv(const HeatmapMatrix& m) {
  std::string out = "arm";
  for (std::size_t b = 0; b < m.buckets(); ++b) {
    const PullCount lo = static_cast<PullCount>(b) * m.bucket + 1;
    const PullCount hi = std::min(m.horizon, lo + m.bucket - 1);
    out += fmt::format(",{}-{}", lo, hi);
  }
  out += '\n';
  for (std::size_t a = 0; a < m.counts.size(); ++a) {
    out += std::to_string(a + 1);
    for (PullCount c : m.counts[a]) out += fmt::format(",{}", c);
    out += '\n';
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const BanditInstance inst = build_instance(cfg.instance);
  const auto report = validate_instance(inst);
  if (!report.valid()) {
    const auto& v = report.violations.front();
    throw ConfigError("instance", fmt::format("instance fails validation: {} violation{} ({} at n={}: {})",
                                              report.violations.size(), report.violations.size() == 1 ? "" : "s",
                                              v.kind, v.n, v.detail));
  }
  const PullCount horizon = cfg.horizon.value_or(inst.horizon);
  if (horizon > inst.horizon) {
    throw ConfigError("horizon", fmt::format("{} exceeds the instance horizon {}", horizon, inst.horizon));
  }

  const fs::path dir(cfg.output_dir.empty() ? "out" : cfg.output_dir);
  fs::create_directories(dir);
  const OracleTable oracle = oracle_table(inst, horizon);

  struct Job {
    std::size_t policy;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
    for (std::uint64_t s : cfg.seeds) jobs.push_back({p, s});
  }
  struct JobResult {
    RunSummary summary;
    std::vector<double> regret;
    std::vector<SuperArm> actions;
  };
  std::vector<JobResult> results(jobs.size());

  auto execute = [&](std::size_t j) {
    const auto& entry = cfg.policies[jobs[j].policy];
    const std::uint64_t seed = jobs[j].seed;
    auto& res = results[j];
    res.summary.policy = entry.label;
    res.summary.seed = seed;
    const std::string stem = fmt::format("{}__{}__seed{}", inst.name, entry.label, seed);
    try {
      RunTrace trace = run_single(inst, entry, seed, horizon);
      RegretCurve curve = regret_curve(inst, trace.actions, oracle);
      std::string csv = "t,policy,seed,expected_reward,cum_reward,oracle_cum,regret\n";
      std::string tcsv = "t,super_arm,expected_reward,sampled_reward\n";
      double sampled_cum = 0.0;
      for (std::size_t k = 0; k < trace.actions.size(); ++k) {
        sampled_cum += trace.sampled_reward[k];
        const double cum = cfg.sampled_regret ? sampled_cum : curve.policy_cum[k];
        const double regret = curve.oracle_cum[k] - cum;
        csv += fmt::format("{},{},{},{},{},{},{}\n", k + 1, entry.label, seed, num(curve.expected_reward[k]),
                           num(cum), num(curve.oracle_cum[k]), num(regret));
        tcsv += fmt::format("{},{},{},{}\n", k + 1, join_arms(trace.actions[k]), num(trace.expected_reward[k]),
                            num(trace.sampled_reward[k]));
        res.regret.push_back(regret);
      }
      write_file(dir / (stem + ".csv"), csv);
      write_file(dir / (stem + ".trace.csv"), tcsv);
      res.summary.status = "ok";
      res.summary.final_regret = res.regret.empty() ? 0.0 : res.regret.back();
      res.summary.regret_csv = stem + ".csv";
      res.summary.trace_csv = stem + ".trace.csv";
      res.actions = std::move(trace.actions);
    } catch (const Error& e) {
      res.summary.status = "failed";
      res.summary.error = e.what();
      res.regret.clear();
    }
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), jobs.size());
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) execute(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) execute(j);
      });
    }
  }

  ExperimentResult out;
  out.instance = inst.name;
  out.horizon = horizon;
  for (const auto& r : results) {
    out.runs.push_back(r.summary);
    if (r.summary.status == "ok") {
      out.files.push_back(r.summary.regret_csv);
      out.files.push_back(r.summary.trace_csv);
    }
  }

  const PullCount bucket = cfg.heatmap_bucket > 0 ? cfg.heatmap_bucket : std::max<PullCount>(1, horizon / 50);
  for (const auto& entry : cfg.policies) {
    std::vector<std::vector<double>> curves;
    std::vector<std::vector<SuperArm>> traces;
    for (const auto& r : results) {
      if (r.summary.policy != entry.label || r.summary.status != "ok") continue;
      curves.push_back(r.regret);
      traces.push_back(r.actions);
    }
    if (curves.empty()) continue;
    const auto agg = aggregate(curves);
    std::string csv = "t,policy,runs,mean_regret,std_regret\n";
    for (std::size_t k = 0; k < agg.mean.size(); ++k) {
      csv += fmt::format("{},{},{},{},{}\n", k + 1, entry.label, curves.size(), num(agg.mean[k]),
                         num(agg.stddev[k]));
    }
    const std::string name = fmt::format("aggregate__{}__{}.csv", inst.name, entry.label);
    write_file(dir / name, csv);
    out.files.push_back(name);
    if (cfg.heatmap) {
      const std::string hname = fmt::format("heatmap__{}__{}.csv", inst.name, entry.label);
      write_file(dir / hname, heatmap_csv(exploration_heatmap(traces, inst.num_arms(), bucket)));
      out.files.push_back(hname);
    }
  }

  Json manifest;
  manifest["name"] = cfg.name;
  manifest["instance"] = inst.name;
  manifest["num_arms"] = inst.num_arms();
  manifest["horizon"] = horizon;
  manifest["rng"] = std::string(kRngIdentity);
  manifest["config_hash"] = fmt::format("{:016x}", cfg.config_hash);
  manifest["regret"] = cfg.sampled_regret ? "sampled" : "pseudo";
  manifest["runs"] = Json::array();
  for (const auto& r : out.runs) {
    Json j = {{"policy", r.policy}, {"seed", r.seed}, {"status", r.status}};
    if (r.status == "ok") {
      j["final_regret"] = r.final_regret;
      j["regret_csv"] = r.regret_csv;
      j["trace_csv"] = r.trace_csv;
    } else {
      j["error"] = r.error;
    }
    manifest["runs"].push_back(j);
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  out.files.push_back("manifest.json");
  return out;
}

TraceFile read_trace_csv(const fs::path& file) {
  const std::string fname = file.filename().string();
  const std::string suffix = ".trace.csv";
  if (fname.size() <= suffix.size() || fname.compare(fname.size() - suffix.size(), suffix.size(), suffix) != 0) {
    throw ParameterError(fmt::format("{} is not a trace file", fname));
  }
  const auto parts = [&] {
    std::vector<std::string> out;
    std::string stem = fname.substr(0, fname.size() - suffix.size());
    std::size_t pos = 0;
    while (true) {
      auto next = stem.find("__", pos);
      out.push_back(stem.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
      if (next == std::string::npos) break;
      pos = next + 2;
    }
    return out;
  }();
  if (parts.size() != 3 || parts[2].rfind("seed", 0) != 0) {
    throw ParameterError(fmt::format("{}: expected <instance>__<policy>__seed<k>.trace.csv", fname));
  }
  TraceFile tf;
  tf.instance = parts[0];
  tf.policy = parts[1];
  try {
    tf.seed = std::stoull(parts[2].substr(4));
  } catch (const std::exception&) {
    throw ParameterError(fmt::format("{}: bad seed", fname));
  }

  std::ifstream in(file);
  if (!in) throw Error(fmt::format("cannot open {}", file.string()));
  std::string line;
  std::getline(in, line);
  if (line.rfind("t,super_arm", 0) != 0) throw ParameterError(fmt::format("{}: unexpected header", fname));
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() < 2) throw ParameterError(fmt::format("{}:{}: malformed row", fname, row));
    SuperArm s;
    for (const auto& tok : split(cols[1], ';')) {
      try {
        s.push_back(std::stoi(tok) - 1);
      } catch (const std::exception&) {
        throw ParameterError(fmt::format("{}:{}: bad super arm '{}'", fname, row, cols[1]));
      }
    }
    tf.actions.push_back(std::move(s));
  }
  return tf;
}

std::vector<std::string> export_heatmaps(const fs::path& dir, const fs::path& out_dir, PullCount bucket) {
  if (!fs::is_directory(dir)) throw Error(fmt::format("{} is not a directory", dir.string()));
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    if (e.is_regular_file() && n.size() > 10 && n.ends_with(".trace.csv")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(fmt::format("no trace files in {}", dir.string()));

  std::size_t num_arms = 0;
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    try {
      num_arms = Json::parse(in).value("num_arms", std::size_t{0});
    } catch (const nlohmann::json::exception&) {
      num_arms = 0;
    }
  }

  std::map<std::pair<std::string, std::string>, std::vector<std::vector<SuperArm>>> groups;
  for (const auto& f : files) {
    auto tf = read_trace_csv(f);
    for (const auto& s : tf.actions) {
      for (ArmIndex a : s) num_arms = std::max(num_arms, static_cast<std::size_t>(a) + 1);
    }
    groups[{tf.instance, tf.policy}].push_back(std::move(tf.actions));
  }
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  for (const auto& [key, traces] : groups) {
    const fs::path path = out_dir / fmt::format("heatmap__{}__{}.csv", key.first, key.second);
    write_file(path, heatmap_csv(exploration_heatmap(traces, num_arms, bucket)));
    written.push_back(path.string());
  }
  return written;
}

}  // namespace crlab
