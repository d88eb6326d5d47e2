#include "etd_cli/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "etd_cli/json_writer.hpp"
#include "etd_cli/problem_file.hpp"

namespace etd::cli {

namespace fs = std::filesystem;

namespace {

std::uint64_t parse_u64(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("bad seed '" + s + "'");
  }
  return std::stoull(s);
}

// Loads and validates; prints the violation list when the task is invalid.
std::optional<Scenario> load_valid(const std::string& input, std::ostream& err, int& code) {
  Scenario sc;
  try {
    sc = resolve_input(input);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    code = kExitIo;
    return std::nullopt;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    code = kExitValidation;
    return std::nullopt;
  }
  const ValidationReport report = validate_task(sc.task);
  if (!report.ok()) {
    err << "invalid task '" << sc.name << "':\n";
    for (const Violation& v : report.violations) err << "  " << v.invariant << ": " << v.detail << '\n';
    code = kExitValidation;
    return std::nullopt;
  }
  return sc;
}

bool write_file(const fs::path& path, const std::string& content, std::ostream& err) {
  std::ofstream f(path, std::ios::binary);
  if (f) f << content;
  if (!f) {
    err << "error: cannot write '" << path.string() << "'\n";
    return false;
  }
  return true;
}

std::string manifest_json(const Scenario& sc, const RunConfig& cfg, const ExperimentResult& res) {
  JsonWriter w;
  w.begin_object();
  w.field("scenario", sc.name);
  w.field("algorithm", to_string(cfg.kind));
  w.key("seeds").begin_array();
  for (const auto s : cfg.seeds) w.value(s);
  w.end_array();
  w.field("alpha", cfg.alpha);
  w.field("horizon", cfg.horizon);
  w.field("theta0", cfg.theta0);
  if (cfg.bound) w.field("bound", *cfg.bound); else w.key("bound").null();
  w.field("record_every", cfg.record_every);
  w.field("config_hash", config_hash(sc, cfg));
  w.field("expected_available", res.expected_unavailable_reason.has_value() ? false : true);
  if (res.expected_unavailable_reason) w.field("expected_unavailable_reason", *res.expected_unavailable_reason);
  w.key("runs").begin_array();
  for (const RunRecord& r : res.runs) {
    w.begin_object();
    w.field("seed", r.seed);
    w.field("status", to_string(r.status));
    w.field("steps_completed", r.steps_completed);
    w.field("final_theta", r.final_theta);
    w.end_object();
  }
  w.end_array();
  w.key("files").begin_array().value("runs.csv").value("expected.csv").end_array();
  w.end_object();
  return w.str();
}

int cmd_analyze(const std::string& input, const std::string& algorithm, std::ostream& out,
                std::ostream& err) {
  Method method;
  try {
    method = parse_method(algorithm);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  int code = kExitOk;
  const auto sc = load_valid(input, err, code);
  if (!sc) return code;
  try {
    out << analysis_json(*sc, analyze(sc->task, method));
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

struct RunOptions {
  std::string input;
  std::string algorithm = "emphatic";
  std::string seeds = "1";
  std::optional<double> alpha;
  std::optional<std::int64_t> horizon;
  std::vector<double> theta0;
  std::optional<double> bound;
  std::int64_t record_every = 1;
  std::string out_dir;
};

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::vector<std::uint64_t> seeds;
  LearnerKind kind;
  try {
    kind = parse_learner_kind(o.algorithm);
    seeds = parse_seeds(o.seeds);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  int code = kExitOk;
  const auto sc = load_valid(o.input, err, code);
  if (!sc) return code;

  cfg = default_run_config(*sc, kind, std::move(seeds));
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.horizon) cfg.horizon = *o.horizon;
  if (!o.theta0.empty()) {
    if (static_cast<Index>(o.theta0.size()) != sc->task.num_features()) {
      err << "error: --theta0 needs " << sc->task.num_features() << " values\n";
      return kExitValidation;
    }
    cfg.theta0 = Eigen::Map<const Vector>(o.theta0.data(), static_cast<Index>(o.theta0.size()));
  }
  cfg.bound = o.bound;
  cfg.record_every = o.record_every;
  if (cfg.alpha < 0.0 || cfg.horizon < 0 || cfg.record_every < 1) {
    err << "error: alpha and horizon must be non-negative, record-every positive\n";
    return kExitValidation;
  }

  fs::path dir = o.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("ETD_OUT_DIR");
    dir = env && *env ? env : "etd-out";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    err << "error: cannot create output directory '" << dir.string() << "'\n";
    return kExitIo;
  }

  ExperimentResult res;
  try {
    res = run_experiment(*sc, cfg);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }

  const Index n = sc->task.num_features();
  std::ostringstream runs_csv, expected_csv;
  write_runs_csv(runs_csv, res, n);
  write_expected_csv(expected_csv, res, n);
  if (!write_file(dir / "runs.csv", runs_csv.str(), err) ||
      !write_file(dir / "expected.csv", expected_csv.str(), err) ||
      !write_file(dir / "manifest.json", manifest_json(*sc, cfg, res), err)) {
    return kExitIo;
  }

  int diverged = 0;
  for (const RunRecord& r : res.runs) {
    out << "seed " << r.seed << ": " << to_string(r.status) << " after " << r.steps_completed
        << " steps, theta =";
    for (Index k = 0; k < r.final_theta.size(); ++k) out << ' ' << format_double(r.final_theta(k));
    out << '\n';
    diverged += r.status == RunStatus::kDiverged;
  }
  out << res.runs.size() << " runs, " << diverged << " diverged; output in " << dir.string() << '\n';
  return kExitOk;
}

int cmd_moments(const std::string& input, const std::string& mode_name, std::int64_t t_max,
                const std::string& out_file, std::ostream& out, std::ostream& err) {
  InterestMode mode;
  try {
    mode = parse_interest_mode(mode_name);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  if (t_max < 0) {
    err << "error: --tmax must be non-negative\n";
    return kExitValidation;
  }
  int code = kExitOk;
  const auto sc = load_valid(input, err, code);
  if (!sc) return code;
  const std::string csv = moments_csv(*sc, mode, t_max);
  if (out_file.empty()) {
    out << csv;
    return kExitOk;
  }
  return write_file(out_file, csv, err) ? kExitOk : kExitIo;
}

int cmd_list(bool as_json, std::ostream& out) {
  const auto names = scenario_names();
  if (as_json) {
    JsonWriter w;
    w.begin_array();
    for (const auto& name : names) {
      const Scenario sc = build_scenario(name);
      w.begin_object();
      w.field("name", sc.name);
      w.field("description", sc.description);
      w.field("provenance", sc.provenance);
      w.end_object();
    }
    w.end_array();
    out << w.str();
    return kExitOk;
  }
  for (const auto& name : names) {
    const Scenario sc = build_scenario(name);
    out << sc.name << "  " << sc.description << "  [" << sc.provenance << "]\n";
  }
  return kExitOk;
}

int cmd_export(const std::string& name, std::ostream& out, std::ostream& err) {
  try {
    out << serialize_problem(build_scenario(name));
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) throw std::invalid_argument("empty entry in seed list '" + text + "'");
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(parse_u64(part));
      continue;
    }
    const std::uint64_t lo = parse_u64(part.substr(0, dots));
    const std::uint64_t hi = parse_u64(part.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("descending seed range '" + part + "'");
    if (hi - lo >= 1000000) throw std::invalid_argument("seed range '" + part + "' is too long");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds given");
  return seeds;
}

std::string analysis_json(const Scenario& sc, const AnalysisReport& r) {
  JsonWriter w;
  w.begin_object();
  w.field("scenario", sc.name);
  w.field("algorithm", to_string(r.method));
  w.field("d_mu", r.d_mu);
  if (r.d_pi) w.field("d_pi", *r.d_pi); else w.key("d_pi").null();
  w.field("p_pi", r.p_pi);
  w.field("r_pi", r.r_pi);
  w.field("v_pi", r.v_pi);
  w.field("f", r.f);
  w.field("m", r.m);
  w.field("p_lambda", r.p_lambda);
  w.field("key", r.key);
  w.field("key_column_sums", r.key_column_sums);
  w.field("A", r.a_mat);
  w.field("b", r.b_vec);
  w.field("min_sym_eig", r.min_sym_eig);
  w.field("verdict", to_string(r.verdict));
  w.field("a_min_sym_eig", r.a_min_sym_eig);
  w.field("a_verdict", to_string(r.a_verdict));
  w.field("theta_bar", r.theta_bar);
  w.field("condition_number", r.condition_number);
  w.field("msve_at_fixed_point", r.msve_at_fixed_point);
  w.end_object();
  return w.str();
}

std::string moments_csv(const Scenario& sc, InterestMode mode, std::int64_t t_max) {
  std::ostringstream os;
  os << "t,mean,variance,analytic_mean,analytic_variance\n";
  for (const MomentPoint& p : f_moment_curve(sc, mode, t_max)) {
    os << p.t << ',' << format_double(p.mean) << ',' << format_double(p.variance) << ',';
    const auto closed =
        mode == InterestMode::kInitialPulse ? pulse_moment_closed_form(sc.task, p.t) : std::nullopt;
    if (closed) os << format_double(closed->mean) << ',' << format_double(closed->variance);
    else os << ',';
    os << '\n';
  }
  return os.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Emphatic TD(lambda) policy-evaluation workbench"};
  app.require_subcommand(1);

  std::string analyze_input, algorithm = "emphatic";
  auto* analyze = app.add_subcommand("analyze", "Exact expected-update analysis as JSON");
  analyze->add_option("input", analyze_input, "Built-in scenario name or problem file")->required();
  analyze->add_option("--algorithm,-a", algorithm, "on-policy-td0 | off-policy-td0 | emphatic");

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run learners over a list of seeds; writes CSV + manifest");
  run->add_option("input", run_opts.input, "Built-in scenario name or problem file")->required();
  run->add_option("--algorithm,-a", run_opts.algorithm,
                  "td0 | off-policy-td0 | emphatic-td0 | emphatic");
  run->add_option("--seeds,-s", run_opts.seeds, "Seed list, e.g. 1..50,77");
  run->add_option("--alpha", run_opts.alpha, "Step size (default: scenario's)");
  run->add_option("--horizon", run_opts.horizon, "Steps per run (default: scenario's)");
  run->add_option("--theta0", run_opts.theta0, "Initial parameters (default: scenario's)");
  run->add_option("--bound", run_opts.bound, "Clip F and trace entries to this magnitude");
  run->add_option("--record-every", run_opts.record_every, "Keep every k-th step in runs.csv");
  run->add_option("--out,-o", run_opts.out_dir, "Output directory (default: $ETD_OUT_DIR or ./etd-out)");

  std::string moments_input, mode = "initial-pulse", moments_out;
  std::int64_t t_max = 30;
  auto* moments = app.add_subcommand("moments", "Exact mean and variance of the followon trace");
  moments->add_option("input", moments_input, "Built-in scenario name or problem file")->required();
  moments->add_option("--mode", mode, "initial-pulse | state-interest");
  moments->add_option("--tmax", t_max, "Last time step");
  moments->add_option("--out,-o", moments_out, "Write CSV here instead of stdout");

  bool list_json = false;
  auto* list = app.add_subcommand("list", "Built-in scenarios");
  list->add_flag("--json", list_json, "Machine-readable output");

  std::string export_name;
  auto* exp = app.add_subcommand("export", "Print a built-in scenario as a problem file");
  exp->add_option("name", export_name, "Built-in scenario name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (*analyze) return cmd_analyze(analyze_input, algorithm, out, err);
  if (*run) return cmd_run(run_opts, out, err);
  if (*moments) return cmd_moments(moments_input, mode, t_max, moments_out, out, err);
  if (*list) return cmd_list(list_json, out);
  if (*exp) return cmd_export(export_name, out, err);
  return kExitValidation;
}

}  // namespace etd::cli
