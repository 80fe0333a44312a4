#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "frameless/bounds.hpp"
#include "frameless/exact_analysis.hpp"
#include "frameless/monte_carlo.hpp"
#include "frameless/optimizer.hpp"
#include "frameless/small_oracle.hpp"

namespace frameless::cli {

namespace {

using json = nlohmann::ordered_json;

class usage_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class oracle_failure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunSpec {
  std::string command;
  int n = 0;
  std::optional<double> beta;
  std::optional<double> beta1;
  std::optional<double> beta2;
  std::optional<int> m_star;
  std::optional<int> m;
  std::optional<int> m_from;
  std::optional<int> m_to;
  int m_step = 1;
  int trials = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string output;
  std::string format;
  double prune = kDefaultPruneThreshold;
  double denominator_floor = kDefaultDenominatorFloor;
  std::string omega = "exact-binomial";
  int simulate_trials = 0;
  std::string trace;

  double beta_min = 1.5;
  double beta_max = 3.5;
  double coarse_beta_step = 0.05;
  double fine_beta_step = 0.01;
  double m_ratio_min = 1.0;
  double m_ratio_max = 1.8;
  int coarse_m_step = 2;
  int fine_m_step = 1;

  double beta2_min = 2.0;
  double beta2_max = 8.0;
  double coarse_beta2_step = 0.1;
  double fine_beta2_step = 0.01;
  double target_ratio = 2.0;

  int max_n = 3;
  int max_m = 5;
  std::vector<double> betas{0.5, 1.0, 1.5, 2.5};
  double tolerance = 1e-12;
};

double rounded(double x) { return std::strtod(format_number(x).c_str(), nullptr); }

json number_array(std::span<const double> xs) {
  json arr = json::array();
  for (double x : xs) arr.push_back(rounded(x));
  return arr;
}

bool two_stage_requested(const RunSpec& s) { return s.beta1 || s.beta2 || s.m_star; }

ProtocolConfig config_for(const RunSpec& s, int m) {
  if (s.beta && two_stage_requested(s)) throw usage_error("--beta cannot be combined with --beta1/--beta2/--m-star");
  if (s.beta) return ProtocolConfig::single(s.n, *s.beta, m);
  if (s.beta1 && s.beta2 && s.m_star) return ProtocolConfig::two_stage(s.n, *s.beta1, *s.beta2, *s.m_star, m);
  throw usage_error("give either --beta or all of --beta1, --beta2, --m-star");
}

int require_m(const RunSpec& s) {
  if (!s.m) throw usage_error("--m is required");
  return *s.m;
}

std::pair<int, int> slot_range(const RunSpec& s) {
  if (s.m && (s.m_from || s.m_to)) throw usage_error("--m cannot be combined with --m-from/--m-to");
  if (s.m) return {*s.m, *s.m};
  if (!s.m_from || !s.m_to) throw usage_error("give --m or both --m-from and --m-to");
  return {*s.m_from, *s.m_to};
}

void put_schedule(json& j, const ProtocolConfig& cfg) {
  if (const auto* single = std::get_if<SingleBeta>(&cfg.schedule)) {
    j["beta"] = rounded(single->beta);
  } else {
    const auto& t = std::get<TwoStageBeta>(cfg.schedule);
    j["beta1"] = rounded(t.beta1);
    j["beta2"] = rounded(t.beta2);
    j["m_star"] = t.m_star;
  }
}

json spec_json(const RunSpec& s) {
  json j;
  j["command"] = s.command;
  auto opt = [&](const char* key, const auto& v) {
    if (v) j[key] = *v;
  };
  if (s.command != "verify-oracle") j["n"] = s.n;
  opt("beta", s.beta);
  opt("beta1", s.beta1);
  opt("beta2", s.beta2);
  opt("m_star", s.m_star);
  opt("m", s.m);
  opt("m_from", s.m_from);
  opt("m_to", s.m_to);
  if (s.command == "sweep" || s.command == "bound") j["m_step"] = s.m_step;
  if (s.command == "simulate" || (s.command == "sweep" && s.simulate_trials > 0)) {
    j["trials"] = s.command == "simulate" ? s.trials : s.simulate_trials;
    j["seed"] = s.seed;
  }
  if (s.command == "analyze" || s.command == "sweep" || s.command.starts_with("optimize") ||
      s.command == "verify-oracle") {
    j["omega"] = s.omega;
    j["prune_threshold"] = s.prune;
    j["denominator_floor"] = s.denominator_floor;
  }
  if (s.command == "optimize-peak") {
    j["beta_min"] = s.beta_min;
    j["beta_max"] = s.beta_max;
    j["coarse_beta_step"] = s.coarse_beta_step;
    j["fine_beta_step"] = s.fine_beta_step;
    j["m_ratio_min"] = s.m_ratio_min;
    j["m_ratio_max"] = s.m_ratio_max;
    j["coarse_m_step"] = s.coarse_m_step;
    j["fine_m_step"] = s.fine_m_step;
  }
  if (s.command == "optimize-floor") {
    j["beta2_min"] = s.beta2_min;
    j["beta2_max"] = s.beta2_max;
    j["coarse_beta2_step"] = s.coarse_beta2_step;
    j["fine_beta2_step"] = s.fine_beta2_step;
    j["target_ratio"] = s.target_ratio;
  }
  if (s.command == "verify-oracle") {
    j["max_n"] = s.max_n;
    j["max_m"] = s.max_m;
    j["betas"] = s.betas;
    j["tolerance"] = s.tolerance;
  }
  j["format"] = s.format;
  if (!s.output.empty()) j["output"] = s.output;
  if (!s.trace.empty()) j["trace"] = s.trace;
  return j;
}

AnalysisOptions analysis_options(const RunSpec& s) {
  AnalysisOptions o;
  o.omega_mode = omega_mode_from_string(s.omega);
  o.prune_threshold = s.prune;
  o.denominator_floor = s.denominator_floor;
  return o;
}

// ---------------------------------------------------------------------------
// CSV helpers

class CsvTable {
public:
  CsvTable(const RunSpec& spec, std::vector<std::string> header) : header_(std::move(header)) {
    os_ << "# run_spec: " << spec_json(spec).dump() << '\n';
    for (std::size_t i = 0; i < header_.size(); ++i) os_ << (i ? "," : "") << header_[i];
    os_ << '\n';
  }

  CsvTable& cell(const std::string& s) {
    os_ << (column_++ ? "," : "") << s;
    return *this;
  }
  CsvTable& cell(double x) { return cell(format_number(x)); }
  CsvTable& cell(int x) { return cell(std::to_string(x)); }
  CsvTable& cell(std::uint64_t x) { return cell(std::to_string(x)); }
  CsvTable& cell(bool b) { return cell(std::string(b ? "true" : "false")); }
  void end_row() {
    os_ << '\n';
    column_ = 0;
  }
  std::string str() const { return os_.str(); }

private:
  std::vector<std::string> header_;
  std::ostringstream os_;
  std::size_t column_ = 0;
};

std::vector<std::string> schedule_columns(const ProtocolConfig& cfg) {
  if (cfg.is_two_stage()) return {"beta1", "beta2", "m_star"};
  return {"beta"};
}

void schedule_cells(CsvTable& t, const ProtocolConfig& cfg) {
  if (const auto* single = std::get_if<SingleBeta>(&cfg.schedule)) {
    t.cell(single->beta);
  } else {
    const auto& ts = std::get<TwoStageBeta>(cfg.schedule);
    t.cell(ts.beta1).cell(ts.beta2).cell(ts.m_star);
  }
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// ---------------------------------------------------------------------------
// Output

std::filesystem::path resolve_output(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') p = std::filesystem::path(dir) / p;
  }
  return p;
}

void write_atomically(const std::filesystem::path& target, const std::string& payload) {
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << payload;
    if (!f.flush()) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

void emit(const RunSpec& s, const std::string& payload, std::ostream& out) {
  if (s.output.empty()) {
    out << payload;
  } else {
    write_atomically(resolve_output(s.output), payload);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Commands

std::string cmd_analyze(const RunSpec& s) {
  const ProtocolConfig cfg = config_for(s, require_m(s));
  const AnalysisResult r = analyze(cfg, analysis_options(s));
  if (s.format == "csv") {
    CsvTable t(s, concat(concat({"n", "m", "m_over_n"}, schedule_columns(cfg)),
                         {"per", "throughput", "pruned_mass", "conservation_defect", "approximate"}));
    t.cell(cfg.n).cell(cfg.m).cell(static_cast<double>(cfg.m) / cfg.n);
    schedule_cells(t, cfg);
    t.cell(r.per).cell(r.throughput).cell(r.pruned_mass).cell(r.conservation_defect).cell(r.approximate);
    t.end_row();
    return t.str();
  }
  json j;
  j["n"] = cfg.n;
  j["m"] = cfg.m;
  put_schedule(j, cfg);
  j["omega_mode"] = std::string(to_string(r.omega_mode));
  j["per"] = rounded(r.per);
  j["throughput"] = rounded(r.throughput);
  j["conservation_defect"] = rounded(r.conservation_defect);
  j["pruned_mass"] = rounded(r.pruned_mass);
  j["success_mass"] = rounded(r.success_mass);
  j["approximate"] = r.approximate;
  j["failure_profile"] = number_array(r.failure_profile);
  j["omega"] = number_array(r.omega);
  j["run_spec"] = spec_json(s);
  return dump(j);
}

std::string cmd_simulate(const RunSpec& s) {
  const ProtocolConfig cfg = config_for(s, require_m(s));
  const SimulationResult r = simulate(cfg, {s.trials, s.seed, s.threads});
  if (s.format == "csv") {
    CsvTable t(s, concat(concat({"n", "m", "m_over_n"}, schedule_columns(cfg)),
                         {"per", "throughput", "trials", "stderr_per", "stderr_throughput", "seed"}));
    t.cell(cfg.n).cell(cfg.m).cell(static_cast<double>(cfg.m) / cfg.n);
    schedule_cells(t, cfg);
    t.cell(r.mean_per).cell(r.mean_throughput).cell(r.trials).cell(r.stderr_per).cell(r.stderr_throughput).cell(r.seed);
    t.end_row();
    return t.str();
  }
  json j;
  j["n"] = cfg.n;
  j["m"] = cfg.m;
  put_schedule(j, cfg);
  j["per"] = rounded(r.mean_per);
  j["throughput"] = rounded(r.mean_throughput);
  j["trials"] = r.trials;
  j["stderr_per"] = rounded(r.stderr_per);
  j["stderr_throughput"] = rounded(r.stderr_throughput);
  j["seed"] = r.seed;
  j["run_spec"] = spec_json(s);
  return dump(j);
}

std::string cmd_sweep(const RunSpec& s) {
  if (!s.m_from || !s.m_to) throw usage_error("sweep needs --m-from and --m-to");
  const ProtocolConfig family = config_for(s, *s.m_from);
  SweepOptions opts;
  opts.analysis = analysis_options(s);
  opts.threads = s.threads;
  if (s.simulate_trials > 0) opts.simulation = SimulationOptions{s.simulate_trials, s.seed, 1};
  const auto rows = sweep(family, *s.m_from, *s.m_to, s.m_step, opts);

  if (s.format == "json") {
    json j;
    j["rows"] = json::array();
    for (const auto& row : rows) {
      json r;
      r["n"] = row.config.n;
      r["m"] = row.config.m;
      r["m_over_n"] = rounded(row.m_over_n);
      put_schedule(r, row.config);
      r["per"] = rounded(row.per);
      r["throughput"] = rounded(row.throughput);
      r["conservation_defect"] = rounded(row.conservation_defect);
      r["approximate"] = row.approximate;
      if (row.simulation) {
        r["sim_per"] = rounded(row.simulation->mean_per);
        r["sim_throughput"] = rounded(row.simulation->mean_throughput);
        r["trials"] = row.simulation->trials;
        r["stderr_per"] = rounded(row.simulation->stderr_per);
        r["stderr_throughput"] = rounded(row.simulation->stderr_throughput);
        r["seed"] = row.simulation->seed;
      }
      j["rows"].push_back(r);
    }
    j["run_spec"] = spec_json(s);
    return dump(j);
  }

  std::vector<std::string> header = concat(concat({"n", "m", "m_over_n"}, schedule_columns(family)), {"per", "throughput"});
  if (opts.simulation) {
    header = concat(header, {"sim_per", "sim_throughput", "trials", "stderr_per", "stderr_throughput", "seed"});
  }
  CsvTable t(s, header);
  for (const auto& row : rows) {
    t.cell(row.config.n).cell(row.config.m).cell(row.m_over_n);
    schedule_cells(t, row.config);
    t.cell(row.per).cell(row.throughput);
    if (row.simulation) {
      const auto& sim = *row.simulation;
      t.cell(sim.mean_per).cell(sim.mean_throughput).cell(sim.trials).cell(sim.stderr_per).cell(sim.stderr_throughput).cell(sim.seed);
    }
    t.end_row();
  }
  return t.str();
}

std::string cmd_bound(const RunSpec& s) {
  const auto [lo, hi] = slot_range(s);
  if (lo < 1 || hi < lo || s.m_step < 1) throw usage_error("invalid slot range");
  const ProtocolConfig first = config_for(s, lo);
  std::vector<std::pair<ProtocolConfig, BoundResult>> rows;
  for (int m = lo; m <= hi; m += s.m_step) {
    const auto cfg = first.with_slots(m);
    rows.emplace_back(cfg, per_lower_bound(cfg));
  }
  if (s.format == "json") {
    json j;
    j["rows"] = json::array();
    for (const auto& [cfg, b] : rows) {
      json r;
      r["n"] = cfg.n;
      r["m"] = cfg.m;
      put_schedule(r, cfg);
      r["exact_bound"] = rounded(b.exact_bound);
      r["exp_bound"] = rounded(b.exponential_bound);
      r["extension"] = b.extension;
      j["rows"].push_back(r);
    }
    j["run_spec"] = spec_json(s);
    return dump(j);
  }
  auto header = concat(concat({"n", "m"}, schedule_columns(first)), {"exact_bound", "exp_bound"});
  if (first.is_two_stage()) header.emplace_back("extension");
  CsvTable t(s, header);
  for (const auto& [cfg, b] : rows) {
    t.cell(cfg.n).cell(cfg.m);
    schedule_cells(t, cfg);
    t.cell(b.exact_bound).cell(b.exponential_bound);
    if (b.extension) t.cell(true);
    t.end_row();
  }
  return t.str();
}

PeakSearch peak_search(const RunSpec& s) {
  PeakSearch p;
  p.beta_lo = s.beta_min;
  p.beta_hi = s.beta_max;
  p.coarse_beta_step = s.coarse_beta_step;
  p.fine_beta_step = s.fine_beta_step;
  p.m_ratio_lo = s.m_ratio_min;
  p.m_ratio_hi = s.m_ratio_max;
  p.coarse_m_step = s.coarse_m_step;
  p.fine_m_step = s.fine_m_step;
  p.analysis = analysis_options(s);
  p.threads = s.threads;
  return p;
}

std::string cmd_optimize_peak(const RunSpec& s) {
  const PeakResult r = optimize_peak(s.n, peak_search(s));
  if (!s.trace.empty()) {
    CsvTable t(s, {"beta", "m", "m_over_n", "per", "throughput"});
    for (const auto& p : r.search_trace) {
      t.cell(p.beta).cell(p.m).cell(static_cast<double>(p.m) / s.n).cell(p.per).cell(p.throughput);
      t.end_row();
    }
    write_atomically(resolve_output(s.trace), t.str());
  }
  json j;
  j["n"] = r.n;
  j["beta_max"] = rounded(r.beta_max);
  j["t_max"] = rounded(r.t_max);
  j["m_max"] = r.m_max;
  j["per_at_peak"] = rounded(r.per_at_peak);
  j["evaluations"] = r.search_trace.size();
  j["run_spec"] = spec_json(s);
  return dump(j);
}

std::string cmd_optimize_floor(const RunSpec& s) {
  if (s.beta || s.beta2) throw usage_error("optimize-floor takes --beta1 and --m-star only");
  double beta1 = 0.0;
  int m_star = 0;
  std::string source = "given";
  if (s.beta1 && s.m_star) {
    beta1 = *s.beta1;
    m_star = *s.m_star;
  } else if (!s.beta1 && !s.m_star) {
    const PeakResult peak = optimize_peak(s.n, peak_search(s));
    beta1 = peak.beta_max;
    m_star = peak.m_max;
    source = "optimize-peak";
  } else {
    throw usage_error("give both --beta1 and --m-star, or neither");
  }
  FloorSearch f;
  f.beta2_lo = s.beta2_min;
  f.beta2_hi = s.beta2_max;
  f.coarse_step = s.coarse_beta2_step;
  f.fine_step = s.fine_beta2_step;
  f.target_ratio = s.target_ratio;
  f.analysis = analysis_options(s);
  f.threads = s.threads;
  const TwoStageResult r = optimize_floor(s.n, beta1, m_star, f);
  if (!s.trace.empty()) {
    CsvTable t(s, {"beta2", "per"});
    for (const auto& p : r.search_trace) {
      t.cell(p.beta2).cell(p.per);
      t.end_row();
    }
    write_atomically(resolve_output(s.trace), t.str());
  }
  json j;
  j["n"] = r.n;
  j["beta1"] = rounded(r.beta1);
  j["beta2"] = rounded(r.beta2);
  j["m_star"] = r.m_star;
  j["target_m"] = r.target_m;
  j["per_at_target"] = rounded(r.per_at_target);
  j["single_stage_per"] = rounded(r.single_stage_per);
  j["beta1_source"] = source;
  j["approximate"] = r.target_m > r.m_star;
  j["evaluations"] = r.search_trace.size();
  j["run_spec"] = spec_json(s);
  return dump(j);
}

std::string cmd_verify_oracle(const RunSpec& s, bool& all_passed) {
  if (s.max_n < 1 || s.max_m < 1) throw usage_error("--max-n and --max-m must be >= 1");
  struct Row {
    int n, m;
    double beta, oracle, dp, diff;
    bool pass;
  };
  std::vector<Row> rows;
  all_passed = true;
  const AnalysisOptions opts = analysis_options(s);
  for (int n = 1; n <= s.max_n; ++n) {
    for (int m = 1; m <= s.max_m; ++m) {
      for (double beta : s.betas) {
        if (beta > n) continue;
        const auto cfg = ProtocolConfig::single(n, beta, m);
        const double oracle = enumerate_exact(cfg).exact_per;
        const double dp = analyze(cfg, opts).per;
        const double diff = std::abs(oracle - dp);
        rows.push_back({n, m, beta, oracle, dp, diff, diff <= s.tolerance});
        all_passed = all_passed && rows.back().pass;
      }
    }
  }
  if (s.format == "json") {
    json j;
    j["passed"] = all_passed;
    j["rows"] = json::array();
    for (const auto& r : rows) {
      j["rows"].push_back({{"n", r.n},
                           {"m", r.m},
                           {"beta", rounded(r.beta)},
                           {"oracle_per", rounded(r.oracle)},
                           {"dp_per", rounded(r.dp)},
                           {"abs_diff", rounded(r.diff)},
                           {"status", r.pass ? "pass" : "fail"}});
    }
    j["run_spec"] = spec_json(s);
    return dump(j);
  }
  CsvTable t(s, {"n", "m", "beta", "oracle_per", "dp_per", "abs_diff", "status"});
  for (const auto& r : rows) {
    t.cell(r.n).cell(r.m).cell(r.beta).cell(r.oracle).cell(r.dp).cell(r.diff).cell(std::string(r.pass ? "pass" : "fail"));
    t.end_row();
  }
  return t.str();
}

// ---------------------------------------------------------------------------
// Parsing

void add_population(CLI::App* cmd, RunSpec& s) {
  cmd->add_option("--n", s.n, "Number of users")->required()->check(CLI::PositiveNumber);
}

void add_schedule(CLI::App* cmd, RunSpec& s) {
  cmd->add_option("--beta", s.beta, "Access load beta (p = beta / n)");
  cmd->add_option("--beta1", s.beta1, "Load before the switch slot");
  cmd->add_option("--beta2", s.beta2, "Load after the switch slot");
  cmd->add_option("--m-star", s.m_star, "Last slot using beta1");
}

void add_analysis(CLI::App* cmd, RunSpec& s) {
  cmd->add_option("--omega", s.omega, "Slot degree law: exact-binomial | poisson")
      ->check(CLI::IsMember({"exact-binomial", "binomial", "poisson"}));
  cmd->add_option("--prune", s.prune, "Drop decoder states below this probability")->check(CLI::NonNegativeNumber);
  cmd->add_option("--denominator-floor", s.denominator_floor,
                  "Treat cloud-departure denominators below this as degenerate")
      ->check(CLI::NonNegativeNumber);
}

void add_output(CLI::App* cmd, RunSpec& s, const std::string& default_format) {
  cmd->add_option("--format", s.format, "Output format (default " + default_format + ")")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--output,-o", s.output, "Write to this file instead of stdout");
}

void add_threads(CLI::App* cmd, RunSpec& s) {
  cmd->add_option("--threads", s.threads, "Worker threads (0 = hardware concurrency)");
}

void add_peak_grid(CLI::App* cmd, RunSpec& s) {
  cmd->add_option("--beta-min", s.beta_min);
  cmd->add_option("--beta-max", s.beta_max);
  cmd->add_option("--coarse-beta-step", s.coarse_beta_step);
  cmd->add_option("--fine-beta-step", s.fine_beta_step);
  cmd->add_option("--m-ratio-min", s.m_ratio_min);
  cmd->add_option("--m-ratio-max", s.m_ratio_max);
  cmd->add_option("--coarse-m-step", s.coarse_m_step);
  cmd->add_option("--fine-m-step", s.fine_m_step);
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message, int code,
                 const std::optional<json>& spec) {
  json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  if (spec) j["run_spec"] = *spec;
  err << j.dump() << '\n';
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunSpec s;
  CLI::App app{"Finite-length analysis, simulation and tuning of frameless ALOHA", "frameless"};
  app.require_subcommand(1);

  auto* analyze_cmd = app.add_subcommand("analyze", "Exact PER and throughput from the decoder state machine");
  add_population(analyze_cmd, s);
  add_schedule(analyze_cmd, s);
  analyze_cmd->add_option("--m", s.m, "Number of slots");
  add_analysis(analyze_cmd, s);
  add_output(analyze_cmd, s, "json");

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate with the peeling decoder");
  add_population(simulate_cmd, s);
  add_schedule(simulate_cmd, s);
  simulate_cmd->add_option("--m", s.m, "Number of slots");
  simulate_cmd->add_option("--trials", s.trials, "Contention periods")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", s.seed, "Master seed");
  add_threads(simulate_cmd, s);
  add_output(simulate_cmd, s, "json");

  auto* sweep_cmd = app.add_subcommand("sweep", "Analysis over a range of slot counts");
  add_population(sweep_cmd, s);
  add_schedule(sweep_cmd, s);
  sweep_cmd->add_option("--m-from", s.m_from)->required();
  sweep_cmd->add_option("--m-to", s.m_to)->required();
  sweep_cmd->add_option("--m-step", s.m_step);
  sweep_cmd->add_option("--simulate-trials", s.simulate_trials, "Also simulate each point with this many trials");
  sweep_cmd->add_option("--seed", s.seed);
  add_analysis(sweep_cmd, s);
  add_threads(sweep_cmd, s);
  add_output(sweep_cmd, s, "csv");

  auto* peak_cmd = app.add_subcommand("optimize-peak", "Load and slot count maximizing throughput");
  add_population(peak_cmd, s);
  add_peak_grid(peak_cmd, s);
  peak_cmd->add_option("--trace", s.trace, "Write every evaluated grid point to this CSV");
  add_analysis(peak_cmd, s);
  add_threads(peak_cmd, s);
  add_output(peak_cmd, s, "json");

  auto* floor_cmd = app.add_subcommand("optimize-floor", "Second-stage load minimizing PER at a target m/n");
  add_population(floor_cmd, s);
  add_schedule(floor_cmd, s);
  add_peak_grid(floor_cmd, s);
  floor_cmd->add_option("--beta2-min", s.beta2_min);
  floor_cmd->add_option("--beta2-max", s.beta2_max);
  floor_cmd->add_option("--coarse-beta2-step", s.coarse_beta2_step);
  floor_cmd->add_option("--fine-beta2-step", s.fine_beta2_step);
  floor_cmd->add_option("--target-ratio", s.target_ratio, "Target m/n")->check(CLI::PositiveNumber);
  floor_cmd->add_option("--trace", s.trace, "Write every evaluated beta2 to this CSV");
  add_analysis(floor_cmd, s);
  add_threads(floor_cmd, s);
  add_output(floor_cmd, s, "json");

  auto* bound_cmd = app.add_subcommand("bound", "Lower bounds on PER from users that never transmit");
  add_population(bound_cmd, s);
  add_schedule(bound_cmd, s);
  bound_cmd->add_option("--m", s.m);
  bound_cmd->add_option("--m-from", s.m_from);
  bound_cmd->add_option("--m-to", s.m_to);
  bound_cmd->add_option("--m-step", s.m_step);
  add_output(bound_cmd, s, "csv");

  auto* oracle_cmd = app.add_subcommand("verify-oracle", "Compare the analysis against exhaustive enumeration");
  oracle_cmd->add_option("--max-n", s.max_n);
  oracle_cmd->add_option("--max-m", s.max_m);
  oracle_cmd->add_option("--betas", s.betas)->delimiter(',');
  oracle_cmd->add_option("--tol", s.tolerance);
  add_analysis(oracle_cmd, s);
  add_output(oracle_cmd, s, "csv");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what(), kUsage, std::nullopt);
    return kUsage;
  }

  for (const auto* sub : app.get_subcommands()) s.command = sub->get_name();
  if (s.format.empty()) {
    s.format = (s.command == "sweep" || s.command == "bound" || s.command == "verify-oracle") ? "csv" : "json";
  }

  try {
    std::string payload;
    bool oracle_ok = true;
    if (s.command == "analyze") payload = cmd_analyze(s);
    else if (s.command == "simulate") payload = cmd_simulate(s);
    else if (s.command == "sweep") payload = cmd_sweep(s);
    else if (s.command == "optimize-peak") payload = cmd_optimize_peak(s);
    else if (s.command == "optimize-floor") payload = cmd_optimize_floor(s);
    else if (s.command == "bound") payload = cmd_bound(s);
    else if (s.command == "verify-oracle") payload = cmd_verify_oracle(s, oracle_ok);
    emit(s, payload, out);
    if (!oracle_ok) {
      print_error(err, "oracle-verification", "analysis disagrees with exhaustive enumeration", kOracleFailure,
                  spec_json(s));
      return kOracleFailure;
    }
    return kOk;
  } catch (const usage_error& e) {
    print_error(err, "usage", e.what(), kUsage, spec_json(s));
    return kUsage;
  } catch (const config_error& e) {
    print_error(err, "usage", e.what(), kUsage, spec_json(s));
    return kUsage;
  } catch (const degenerate_distribution_error& e) {
    print_error(err, "numeric-degeneracy", e.what(), kNumericDegeneracy, spec_json(s));
    return kNumericDegeneracy;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what(), kInternalError, spec_json(s));
    return kInternalError;
  }
}

}  // namespace frameless::cli
