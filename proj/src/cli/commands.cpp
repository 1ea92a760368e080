#include "cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "cli/csvio.hpp"
#include "cli/svgplot.hpp"

namespace van::cli {

namespace {

void write_active_curve(const std::string& path,
                        const std::vector<ActiveRecord<double>>& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "round,examples_seen,test_log_loss\n";
  for (const auto& row : curve)
    out << row.round << ',' << row.examples_seen << ','
        << format_number(row.test_log_loss) << '\n';
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace

int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    const BuiltProblem built = build_problem(spec);

    if (built.active) {
      const auto curve = active_loop<double>(built.pool, built.test, *built.active);
      write_active_curve(spec.trace_out, curve);
      const auto& last = curve.back();
      out << "final test log-loss " << format_number(last.test_log_loss) << " after "
          << last.examples_seen << " labeled examples (" << (curve.size() - 1)
          << " rounds)\n";
      out << "wrote " << spec.trace_out << '\n';
      return kExitOk;
    }

    const RunResult<double> result = run<double>(*built.objective, built.optimizer);
    write_trace_csv(spec.trace_out, result.trace);
    if (result.trace.empty()) {
      out << "no iterations performed\n";
    } else {
      out << "final f_at_mean " << format_number(result.trace.back().f_at_mean)
          << " after " << result.trace.size() << " iterations ("
          << name_of(result.reason) << ")\n";
    }
    out << "wrote " << spec.trace_out << '\n';
    return result.converged() ? kExitOk : kExitMaxIters;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

namespace {

struct CompareOutcome {
  bool ok = false;
  std::string status;  // stop reason, or "error: ..."
  double final_value = std::numeric_limits<double>::quiet_NaN();
  std::size_t iters = 0;
  std::uint64_t wall_ns = 0;
};

std::string sanitize_cell(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

CompareOutcome run_one_spec(const RunSpec& spec) {
  CompareOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  try {
    const BuiltProblem built = build_problem(spec);
    if (built.active) {
      const auto curve = active_loop<double>(built.pool, built.test, *built.active);
      write_active_curve(spec.trace_out, curve);
      outcome.final_value = curve.back().test_log_loss;
      outcome.iters = curve.size() - 1;
      outcome.status = "ok";
    } else {
      const RunResult<double> result = run<double>(*built.objective, built.optimizer);
      write_trace_csv(spec.trace_out, result.trace);
      if (!result.trace.empty()) outcome.final_value = result.trace.back().f_at_mean;
      outcome.iters = result.trace.size();
      outcome.status = name_of(result.reason);
    }
    outcome.ok = true;
  } catch (const std::exception& e) {
    outcome.status = "error: " + sanitize_cell(e.what());
  }
  outcome.wall_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                           start)
          .count());
  return outcome;
}

}  // namespace

int cmd_compare(const CompareRequest& request, std::ostream& out, std::ostream& err) {
  if (request.specs.size() < 2) {
    err << "error: compare needs at least two specs\n";
    return kExitUsage;
  }
  for (const auto& spec : request.specs)
    if (spec.problem != request.specs.front().problem) {
      err << "error: compare specs must share one problem\n";
      return kExitUsage;
    }

  std::error_code ec;
  std::filesystem::create_directories(request.out_dir, ec);
  if (ec) {
    err << "error: cannot create '" << request.out_dir << "': " << ec.message() << '\n';
    return kExitUsage;
  }

  // Each spec runs on its own worker with its own RNG and trace file;
  // nothing is shared but the output directory.
  std::vector<RunSpec> specs = request.specs;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::string label = specs[i].label.empty() ? name_of(specs[i].optimizer.method)
                                                     : specs[i].label;
    specs[i].label = label;
    specs[i].trace_out = (std::filesystem::path(request.out_dir) /
                          ("trace_" + std::to_string(i) + "_" + label + ".csv"))
                             .string();
  }
  std::vector<std::future<CompareOutcome>> workers;
  workers.reserve(specs.size());
  for (const auto& spec : specs)
    workers.push_back(std::async(std::launch::async, run_one_spec, std::cref(spec)));

  // Summary assembly keeps spec order regardless of finish order.
  bool any_failed = false;
  const std::string summary_path =
      (std::filesystem::path(request.out_dir) / "summary.csv").string();
  try {
    std::ofstream summary(summary_path, std::ios::binary);
    if (!summary) throw Error("cannot open '" + summary_path + "' for writing");
    summary << "label,method,problem,status,final_f_at_mean,iters,wallclock_ns\n";
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const CompareOutcome outcome = workers[i].get();
      any_failed = any_failed || !outcome.ok;
      summary << sanitize_cell(specs[i].label) << ',' << name_of(specs[i].optimizer.method)
              << ',' << name_of(specs[i].problem) << ',' << outcome.status << ','
              << format_number(outcome.final_value) << ',' << outcome.iters << ','
              << outcome.wall_ns << '\n';
      out << specs[i].label << ": " << outcome.status << " final "
          << format_number(outcome.final_value) << " after " << outcome.iters
          << " iterations\n";
    }
    if (!summary) throw Error("failed writing '" + summary_path + "'");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  out << "wrote " << summary_path << '\n';
  return any_failed ? kExitPartial : kExitOk;
}

int cmd_plot(const PlotRequest& request, std::ostream& out, std::ostream& err) {
  try {
    if (request.traces.empty()) throw BadParams("plot needs at least one trace CSV");
    if (request.columns.empty()) throw BadParams("plot needs at least one column");

    std::vector<CsvTable> tables;
    tables.reserve(request.traces.size());
    for (const auto& path : request.traces) {
      tables.push_back(read_csv(path));
      if (tables.back().columns != tables.front().columns)
        throw SchemaMismatch("'" + path + "' does not share the schema of '" +
                             request.traces.front() + "'");
    }

    std::vector<Series> series;
    for (std::size_t t = 0; t < tables.size(); ++t) {
      const std::string stem = std::filesystem::path(request.traces[t]).stem().string();
      for (const auto& column : request.columns) {
        Series s;
        if (tables.size() == 1)
          s.label = column;
        else if (request.columns.size() == 1)
          s.label = stem;
        else
          s.label = stem + ":" + column;
        s.x = tables[t].values(request.x_column);
        s.y = tables[t].values(column);
        series.push_back(std::move(s));
      }
    }

    PlotOptions options;
    options.title = request.title;
    options.x_label = request.x_column;
    options.log_y = request.log_y;
    options.y_label = request.columns.front();
    for (std::size_t c = 1; c < request.columns.size(); ++c)
      options.y_label += "/" + request.columns[c];

    write_plot(request.out_svg, series, options);
    out << "wrote " << request.out_svg << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

// ---------------------------------------------------------------------------
// Command-line front end
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& text) {
  const auto a = text.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  const auto b = text.find_last_not_of(" \t");
  return text.substr(a, b - a + 1);
}

/// Applies a flat `key = value` config file to every option of `cmd`
/// that the command line (or environment) left unset. Later lines
/// override earlier ones for single-value keys; multi-value keys
/// (such as plot traces) accumulate.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  std::set<const CLI::Option*> from_config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string entry = trim(line);
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw ParseError(line_no, 1, path + ": expected `key = value`");
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, 1, path + ": empty key");
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr) opt = cmd->get_option_no_throw(key);
    if (opt == nullptr)
      throw ParseError(line_no, 1, path + ": unknown key '" + key + "'");
    if (!opt->empty() && from_config.find(opt) == from_config.end())
      continue;  // explicitly set elsewhere: the config file yields
    const bool multi = opt->get_expected_max() > 1;
    if (!multi && from_config.find(opt) != from_config.end()) opt->clear();
    opt->add_result(value);
    from_config.insert(opt);
    opt->run_callback();
  }
}

std::vector<std::string> split_csv_list(const std::string& joined) {
  std::vector<std::string> items;
  std::string::size_type start = 0;
  while (start <= joined.size()) {
    const auto comma = joined.find(',', start);
    const auto end = comma == std::string::npos ? joined.size() : comma;
    std::string item = joined.substr(start, end - start);
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) {
      item.clear();
    } else {
      const auto b = item.find_last_not_of(" \t");
      item = item.substr(a, b - a + 1);
    }
    if (!item.empty()) items.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

Vector<double> parse_vector(const std::string& joined) {
  const auto items = split_csv_list(joined);
  Vector<double> v(static_cast<Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    const char* begin = items[i].c_str();
    char* end = nullptr;
    v[static_cast<Index>(i)] = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
      throw BadParams("not a number in vector flag: '" + items[i] + "'");
  }
  return v;
}

/// All run/compare flags as plain strings and numbers; `resolve_for`
/// turns them into a validated RunSpec for one method.
struct RunFlags {
  std::string problem = "sinc";
  std::string method = "van";
  double beta = 0.1;
  std::string schedule = "constant";
  double power = 0.55;
  std::string estimator = "mc";
  Index samples = 10;
  Index quad_order = 20;
  Index iters = 10000;
  double tol_grad = 1e-6;
  double tol_step = 1e-10;
  std::uint64_t seed = 0;
  Index minibatch = 0;
  std::string safeguard = "backtrack";
  double eigen_floor = 1e-8;
  int retries = 30;
  std::string mu0;
  double sigma0 = 1.0;
  bool timing = false;
  std::string data;
  Index n = 200;
  Index dim = 5;
  double sparsity = 0.3;
  double noise_sd = 0.5;
  double separation = 2.0;
  std::uint64_t data_seed = 1;
  double reg = 0.01;
  Index batch_per_round = 10;
  Index rounds = 10;
  Index pred_samples = 100;
  Index test_n = 100;
  std::string acquisition = "entropy";
  bool replace = false;
  std::string out = "trace.csv";

  CLI::Option* beta_option = nullptr;
  CLI::Option* samples_option = nullptr;
  CLI::Option* safeguard_option = nullptr;
  CLI::Option* floor_option = nullptr;

  void attach(CLI::App* cmd, bool with_method) {
    cmd->add_option("--problem", problem,
                    "sinc | quadratic | lasso | logistic | vi-logistic | active-logistic")
        ->capture_default_str();
    if (with_method)
      cmd->add_option("--method", method,
                      "van | van-natural | vag | van-d | vag-d | vsgd | newton | adagrad "
                      "| iridge")
          ->capture_default_str();
    beta_option = cmd->add_option(
        "--beta", beta, "step size (default depends on the method: see --dump-config)");
    cmd->add_option("--schedule", schedule, "constant | decay")->capture_default_str();
    cmd->add_option("--power", power, "decay exponent for --schedule decay")
        ->capture_default_str();
    cmd->add_option("--estimator", estimator, "exact | quadrature | mc")
        ->capture_default_str();
    samples_option = cmd->add_option("--samples", samples,
                                     "Monte Carlo samples per iteration")
                         ->capture_default_str();
    cmd->add_option("--quad-order", quad_order, "Gauss-Hermite order per dimension")
        ->capture_default_str();
    cmd->add_option("--iters", iters, "iteration budget")->capture_default_str();
    cmd->add_option("--tol-grad", tol_grad, "gradient-norm stopping tolerance")
        ->capture_default_str();
    cmd->add_option("--tol-step", tol_step, "step-norm stopping tolerance")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "RNG seed (falls back to $VAN_SEED)")
        ->envname("VAN_SEED")
        ->capture_default_str();
    cmd->add_option("--minibatch", minibatch, "minibatch size, 0 = full batch")
        ->capture_default_str();
    safeguard_option = cmd->add_option("--safeguard", safeguard,
                                       "backtrack | eigen-floor")
                           ->capture_default_str();
    floor_option = cmd->add_option("--eigen-floor", eigen_floor,
                                   "eigenvalue floor for the safeguard")
                       ->capture_default_str();
    cmd->add_option("--retries", retries, "backtracking retry budget")
        ->capture_default_str();
    cmd->add_option("--mu0", mu0, "initial mean, comma-separated (default origin)");
    cmd->add_option("--sigma0", sigma0, "initial isotropic standard deviation")
        ->capture_default_str();
    cmd->add_flag("--timing", timing, "record wallclock per iteration in the trace");
    cmd->add_option("--data", data, "dataset file in sparse index:value format");
    cmd->add_option("--n", n, "synthetic dataset rows")->capture_default_str();
    cmd->add_option("--dim", dim, "problem dimension")->capture_default_str();
    cmd->add_option("--sparsity", sparsity, "active fraction for synthetic regression")
        ->capture_default_str();
    cmd->add_option("--noise-sd", noise_sd, "noise level for synthetic regression")
        ->capture_default_str();
    cmd->add_option("--separation", separation, "cluster separation for synthetic blobs")
        ->capture_default_str();
    cmd->add_option("--data-seed", data_seed, "seed for synthetic data")
        ->capture_default_str();
    cmd->add_option("--reg", reg, "regularization strength")->capture_default_str();
    cmd->add_option("--batch-per-round", batch_per_round, "labels acquired per round")
        ->capture_default_str();
    cmd->add_option("--rounds", rounds, "active-learning rounds")->capture_default_str();
    cmd->add_option("--pred-samples", pred_samples, "samples per predictive probability")
        ->capture_default_str();
    cmd->add_option("--test-n", test_n, "held-out rows for the active curve")
        ->capture_default_str();
    cmd->add_option("--acquisition", acquisition, "entropy | random")
        ->capture_default_str();
    cmd->add_flag("--replace", replace, "keep selected rows in the pool");
    cmd->add_option("--out", out, "trace CSV path")->capture_default_str();
  }

  RunSpec resolve_for(const std::string& method_name) const {
    RunSpec spec;
    spec.problem = problem_from_name(problem);
    spec.optimizer = OptimizerConfig<double>::defaults(method_from_name(method_name));
    if (beta_option != nullptr && !beta_option->empty()) spec.optimizer.step.base = beta;
    spec.optimizer.step.kind = schedule_from_name(schedule);
    spec.optimizer.step.power = power;
    spec.optimizer.estimator = estimator_from_name(estimator);
    spec.optimizer.mc_samples = samples;
    spec.optimizer.quad_order = quad_order;
    spec.optimizer.max_iters = iters;
    spec.optimizer.tol_grad = tol_grad;
    spec.optimizer.tol_step = tol_step;
    spec.optimizer.seed = seed;
    spec.optimizer.minibatch_size = minibatch;
    spec.optimizer.safeguard.kind = safeguard_from_name(safeguard);
    spec.optimizer.safeguard.eigen_floor = eigen_floor;
    spec.optimizer.safeguard.max_retries = retries;
    spec.optimizer.init_mean = parse_vector(mu0);
    spec.optimizer.init_sigma = sigma0;
    spec.optimizer.collect_timing = timing;
    spec.data_path = data;
    spec.n = n;
    spec.dim = dim;
    spec.sparsity = sparsity;
    spec.noise_sd = noise_sd;
    spec.separation = separation;
    spec.data_seed = data_seed;
    spec.reg = reg;
    spec.batch_per_round = batch_per_round;
    spec.rounds = rounds;
    spec.predictive_samples = pred_samples;
    spec.test_n = test_n;
    spec.acquisition = acquisition_from_name(acquisition);
    spec.replace = replace;
    spec.trace_out = out;
    spec.label = method_name;
    if (spec.problem == ProblemKind::Sinc && !is_point_method(spec.optimizer.method)) {
      // Escape-demo defaults: enough samples to see the well from the
      // ripples, and a precision floor so one noisy Hessian estimate
      // cannot collapse the precision and launch the mean into the
      // tail. Explicit flags (or config-file keys) still win.
      if (samples_option != nullptr && samples_option->empty())
        spec.optimizer.mc_samples = 50;
      if (safeguard_option != nullptr && safeguard_option->empty())
        spec.optimizer.safeguard.kind = SafeguardKind::EigenFloor;
      if (floor_option != nullptr && floor_option->empty() &&
          spec.optimizer.safeguard.kind == SafeguardKind::EigenFloor)
        spec.optimizer.safeguard.eigen_floor = 0.1;
    }
    return spec;
  }

  /// Emits the fully-resolved configuration as `key = value` lines
  /// that read back as a config file.
  void dump(const RunSpec& spec, std::ostream& os) const {
    os << "problem = " << name_of(spec.problem) << '\n';
    os << "method = " << name_of(spec.optimizer.method) << '\n';
    os << "beta = " << format_number(spec.optimizer.step.base) << '\n';
    os << "schedule = " << name_of(spec.optimizer.step.kind) << '\n';
    os << "power = " << format_number(spec.optimizer.step.power) << '\n';
    os << "estimator = " << name_of(spec.optimizer.estimator) << '\n';
    os << "samples = " << spec.optimizer.mc_samples << '\n';
    os << "quad-order = " << spec.optimizer.quad_order << '\n';
    os << "iters = " << spec.optimizer.max_iters << '\n';
    os << "tol-grad = " << format_number(spec.optimizer.tol_grad) << '\n';
    os << "tol-step = " << format_number(spec.optimizer.tol_step) << '\n';
    os << "seed = " << spec.optimizer.seed << '\n';
    os << "minibatch = " << spec.optimizer.minibatch_size << '\n';
    os << "safeguard = " << name_of(spec.optimizer.safeguard.kind) << '\n';
    os << "eigen-floor = " << format_number(spec.optimizer.safeguard.eigen_floor) << '\n';
    os << "retries = " << spec.optimizer.safeguard.max_retries << '\n';
    if (spec.optimizer.init_mean.size() > 0) {
      os << "mu0 = ";
      for (Index i = 0; i < spec.optimizer.init_mean.size(); ++i)
        os << (i > 0 ? "," : "") << format_number(spec.optimizer.init_mean[i]);
      os << '\n';
    }
    os << "sigma0 = " << format_number(spec.optimizer.init_sigma) << '\n';
    os << "timing = " << (spec.optimizer.collect_timing ? "true" : "false") << '\n';
    if (!spec.data_path.empty()) os << "data = " << spec.data_path << '\n';
    os << "n = " << spec.n << '\n';
    os << "dim = " << spec.dim << '\n';
    os << "sparsity = " << format_number(spec.sparsity) << '\n';
    os << "noise-sd = " << format_number(spec.noise_sd) << '\n';
    os << "separation = " << format_number(spec.separation) << '\n';
    os << "data-seed = " << spec.data_seed << '\n';
    os << "reg = " << format_number(spec.reg) << '\n';
    os << "batch-per-round = " << spec.batch_per_round << '\n';
    os << "rounds = " << spec.rounds << '\n';
    os << "pred-samples = " << spec.predictive_samples << '\n';
    os << "test-n = " << spec.test_n << '\n';
    os << "acquisition = " << name_of(spec.acquisition) << '\n';
    os << "replace = " << (spec.replace ? "true" : "false") << '\n';
    os << "out = " << spec.trace_out << '\n';
  }
};

struct PlotFlags {
  std::vector<std::string> traces;
  std::string columns = "f_at_mean";
  std::string x_column = "iter";
  std::string out = "plot.svg";
  std::string title;
  bool log_y = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("traces", traces, "trace CSV files sharing one schema");
    cmd->add_option("--columns", columns, "columns to plot, comma-separated")
        ->capture_default_str();
    cmd->add_option("--x-column", x_column, "column used as the x axis")
        ->capture_default_str();
    cmd->add_option("--out", out, "output SVG path")->capture_default_str();
    cmd->add_option("--title", title, "plot title");
    cmd->add_flag("--log-y", log_y, "logarithmic y axis");
  }

  PlotRequest resolve() const {
    PlotRequest request;
    request.traces = traces;
    request.columns = split_csv_list(columns);
    request.x_column = x_column;
    request.out_svg = out;
    request.title = title;
    request.log_y = log_y;
    return request;
  }

  void dump(std::ostream& os) const {
    for (const auto& t : traces) os << "traces = " << t << '\n';
    os << "columns = " << columns << '\n';
    os << "x-column = " << x_column << '\n';
    os << "log-y = " << (log_y ? "true" : "false") << '\n';
    if (!title.empty()) os << "title = " << title << '\n';
    os << "out = " << out << '\n';
  }
};

}  // namespace

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"explorative Gaussian optimizer toolbox"};
  app.name("van");
  app.require_subcommand(1);

  static constexpr char kConfigHelp[] =
      "flat `key = value` config file; flags override it";

  RunFlags run_flags;
  std::string run_config;
  bool run_dump = false;
  auto* run_cmd = app.add_subcommand("run", "run one experiment and write its trace CSV");
  run_flags.attach(run_cmd, /*with_method=*/true);
  run_cmd->add_option("--config", run_config, kConfigHelp);
  run_cmd->add_flag("--dump-config", run_dump,
                    "print the fully-resolved configuration and exit");

  RunFlags compare_flags;
  std::string compare_config;
  std::string compare_methods = "van,newton";
  std::string compare_dir = "compare-out";
  bool compare_dump = false;
  auto* compare_cmd =
      app.add_subcommand("compare", "run several methods on one problem, side by side");
  compare_flags.attach(compare_cmd, /*with_method=*/false);
  compare_cmd->add_option("--methods", compare_methods, "methods to race, comma-separated")
      ->capture_default_str();
  compare_cmd->add_option("--out-dir", compare_dir, "directory for traces and summary.csv")
      ->capture_default_str();
  compare_cmd->add_option("--config", compare_config, kConfigHelp);
  compare_cmd->add_flag("--dump-config", compare_dump,
                        "print the fully-resolved configuration and exit");

  PlotFlags plot_flags;
  std::string plot_config;
  bool plot_dump = false;
  auto* plot_cmd = app.add_subcommand("plot", "render trace CSVs into a static SVG");
  plot_flags.attach(plot_cmd);
  plot_cmd->add_option("--config", plot_config, kConfigHelp);
  plot_cmd->add_flag("--dump-config", plot_dump,
                     "print the fully-resolved configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) {
      if (!run_config.empty()) apply_config_file(run_cmd, run_config);
      const RunSpec spec = run_flags.resolve_for(run_flags.method);
      if (run_dump) {
        run_flags.dump(spec, out);
        return kExitOk;
      }
      return cmd_run(spec, out, err);
    }

    if (compare_cmd->parsed()) {
      if (!compare_config.empty()) apply_config_file(compare_cmd, compare_config);
      const auto names = split_csv_list(compare_methods);
      if (compare_dump) {
        for (const auto& name : names) {
          const RunSpec spec = compare_flags.resolve_for(name);
          out << "# method " << name << '\n';
          compare_flags.dump(spec, out);
        }
        out << "methods = " << compare_methods << '\n';
        out << "out-dir = " << compare_dir << '\n';
        return kExitOk;
      }
      CompareRequest request;
      request.out_dir = compare_dir;
      for (const auto& name : names)
        request.specs.push_back(compare_flags.resolve_for(name));
      return cmd_compare(request, out, err);
    }

    if (plot_cmd->parsed()) {
      if (!plot_config.empty()) apply_config_file(plot_cmd, plot_config);
      if (plot_dump) {
        plot_flags.dump(out);
        return kExitOk;
      }
      return cmd_plot(plot_flags.resolve(), out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace van::cli
