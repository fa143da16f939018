#include "crlab/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "crlab/bounds.hpp"
#include "crlab/errors.hpp"
#include "crlab/generators.hpp"
#include "crlab/harness.hpp"
#include "crlab/instance_json.hpp"
#include "crlab/oracle.hpp"

namespace crlab {
namespace {

std::string g6(double v) { return fmt::format("{:.6g}", v); }

// Prints `key=value` under --porcelain and `key: value` otherwise.
class Printer {
 public:
  Printer(std::ostream& out, bool porcelain) : out_(out), porcelain_(porcelain) {}
  void kv(const std::string& key, const std::string& value) {
    out_ << key << (porcelain_ ? "=" : ": ") << value << '\n';
  }
  void kv(const std::string& key, double value) { kv(key, g6(value)); }
  bool porcelain() const { return porcelain_; }
  std::ostream& raw() { return out_; }

 private:
  std::ostream& out_;
  bool porcelain_;
};

Json read_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("$", fmt::format("cannot open {}", file));
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("$", fmt::format("invalid JSON in {}: {}", file, e.what()));
  }
}

// Accepts a bare instance document or an experiment config.
BanditInstance load_instance_any(const std::string& file) {
  Json doc = read_json(file);
  if (doc.is_object() && doc.contains("arms")) return instance_from_json(doc);
  return build_instance(parse_config(doc).instance);
}

std::string arms_1based(const SuperArm& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k] + 1);
  return out;
}

int cmd_validate(const std::string& config, Printer& p) {
  const BanditInstance inst = load_instance_any(config);
  const auto r = validate_instance(inst);
  p.kv("instance", inst.name);
  p.kv("valid", r.valid() ? "true" : "false");
  p.kv("rising", r.rising ? "true" : "false");
  p.kv("concave", r.concave ? "true" : "false");
  p.kv("in_range", r.in_range ? "true" : "false");
  p.kv("family_ok", r.family_ok ? "true" : "false");
  p.kv("violations", std::to_string(r.violations.size()));
  for (const auto& v : r.violations) {
    p.kv("violation", fmt::format("{} arm={} n={} {}", v.kind, v.arm < 0 ? std::string("-") : std::to_string(v.arm + 1),
                                  v.n, v.detail));
  }
  return r.valid() ? 0 : 1;
}

int cmd_run(const std::string& config, const std::string& out_flag, int threads, Printer& p) {
  Json doc = read_json(config);
  ExperimentConfig cfg = parse_config(doc);
  if (!out_flag.empty()) {
    cfg.output_dir = out_flag;
  } else if (cfg.output_dir.empty()) {
    const char* env = std::getenv("CRLAB_OUT_DIR");
    cfg.output_dir = env && *env ? env : "out";
  }
  if (threads > 0) cfg.threads = threads;
  const auto result = run_experiment(cfg);
  p.kv("instance", result.instance);
  p.kv("horizon", std::to_string(result.horizon));
  p.kv("output_dir", cfg.output_dir);
  int failed = 0;
  for (const auto& r : result.runs) {
    if (r.status == "ok") {
      p.kv(fmt::format("final_regret.{}.seed{}", r.policy, r.seed), r.final_regret);
    } else {
      ++failed;
      p.kv(fmt::format("failed.{}.seed{}", r.policy, r.seed), r.error);
    }
  }
  p.kv("runs", std::to_string(result.runs.size()));
  p.kv("failed", std::to_string(failed));
  return failed == 0 ? 0 : 1;
}

int cmd_oracle(const std::string& config, PullCount t, Printer& p) {
  const BanditInstance inst = load_instance_any(config);
  if (t == 0) t = inst.horizon;
  const auto r = oracle_super_arm(inst, t);
  p.kv("t", std::to_string(t));
  p.kv("super_arm", arms_1based(r.arm));
  p.kv("value", r.value);
  p.kv("method", r.enumerated ? "enumeration" : "solver");
  return 0;
}

int cmd_bounds(const BoundQuery& q, const std::string& json_out, const std::string& csv_out, Printer& p) {
  const auto r = bound_report(q);
  p.kv("T", std::to_string(q.horizon));
  p.kv("K", std::to_string(q.k));
  p.kv("L", std::to_string(q.l));
  p.kv("c", q.c);
  p.kv("eps", q.epsilon);
  p.kv("sigma", q.sigma);
  p.kv("q", r.best.q);
  p.kv("upsilon", r.best.upsilon);
  p.kv("term_const", r.best.term_const);
  p.kv("term_rising", r.best.term_rising);
  p.kv("term_noise", r.best.term_noise);
  p.kv("upper_total", r.best.total());
  p.kv("lower_unconstrained", r.lower.unconstrained);
  if (r.lower.constrained) p.kv("lower_constrained", *r.lower.constrained);
  p.kv("lower_exponent", r.exponents.lower);
  p.kv("upper_exponent", r.exponents.upper);
  if (!json_out.empty()) {
    std::ofstream(json_out) << bound_report_json(r).dump(2) << '\n';
    p.kv("json", json_out);
  }
  if (!csv_out.empty()) {
    std::ofstream(csv_out) << bound_report_csv(r);
    p.kv("csv", csv_out);
  }
  return 0;
}

int cmd_heatmap(const std::string& dir, const std::string& out_dir, PullCount bucket, Printer& p) {
  const auto files = export_heatmaps(dir, out_dir.empty() ? dir : out_dir, bucket);
  for (const auto& f : files) p.kv("heatmap", f);
  return 0;
}

int cmd_list(Printer& p) {
  for (const auto& g : generator_catalog()) {
    if (p.porcelain()) {
      p.kv("generator", g.name);
      p.kv(g.name + ".params", g.params);
    } else {
      p.raw() << g.name << "\n  params: " << g.params << "\n  " << g.summary << '\n';
    }
  }
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Combinatorial rising bandit lab", "crlab"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  bool porcelain = false;
  app.add_flag("--porcelain", porcelain, "Print one key=value per line");

  std::string config;
  auto* validate = app.add_subcommand("validate", "Check an instance for the rising/concave/range properties");
  validate->add_option("--config", config, "Instance JSON or experiment config")->required();

  std::string out_dir;
  int threads = 0;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("--config", config, "Experiment config")->required();
  run->add_option("--out", out_dir, "Output directory (default: config, then $CRLAB_OUT_DIR, then ./out)");
  run->add_option("--threads", threads, "Parallel runs")->check(CLI::PositiveNumber);

  PullCount t = 0;
  auto* oracle = app.add_subcommand("oracle", "Best constant super arm for horizon t");
  oracle->add_option("--config", config, "Instance JSON or experiment config")->required();
  oracle->add_option("--t", t, "Horizon (default: instance horizon)")->check(CLI::PositiveNumber);

  BoundQuery bq;
  bq.k = 0;
  std::string json_out;
  std::string csv_out;
  auto* bounds = app.add_subcommand("bounds", "Upper/lower regret bounds for the (n+1)^-c envelope");
  bounds->add_option("--c", bq.c, "Growth exponent")->default_val(1.1);
  bounds->add_option("--T", bq.horizon, "Horizon")->default_val(200000)->check(CLI::PositiveNumber);
  bounds->add_option("--K", bq.k, "Number of base arms (default: L)");
  bounds->add_option("--L", bq.l, "Maximal super-arm size")->default_val(1)->check(CLI::PositiveNumber);
  bounds->add_option("--eps", bq.epsilon, "Window fraction")->default_val(0.25);
  bounds->add_option("--sigma", bq.sigma, "Noise scale")->default_val(0.01);
  bounds->add_option("--json", json_out, "Write the full report as JSON");
  bounds->add_option("--csv", csv_out, "Write parameter,value CSV");

  std::string trace_dir;
  PullCount bucket = 0;
  auto* heatmap = app.add_subcommand("heatmap", "Per-arm pull counts per episode bucket from trace files");
  heatmap->add_option("--trace-dir", trace_dir, "Directory with *.trace.csv files")->required();
  heatmap->add_option("--buckets", bucket, "Episodes per bucket")->required()->check(CLI::PositiveNumber);
  heatmap->add_option("--out", out_dir, "Output directory (default: trace dir)");

  auto* list = app.add_subcommand("list-instances", "Print the generator catalog");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Printer p(out, porcelain);
  try {
    if (*validate) return cmd_validate(config, p);
    if (*run) return cmd_run(config, out_dir, threads, p);
    if (*oracle) return cmd_oracle(config, t, p);
    if (*bounds) {
      if (bq.k == 0) bq.k = bq.l;
      return cmd_bounds(bq, json_out, csv_out, p);
    }
    if (*heatmap) return cmd_heatmap(trace_dir, out_dir, bucket, p);
    if (*list) return cmd_list(p);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace crlab
