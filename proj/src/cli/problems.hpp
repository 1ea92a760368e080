#pragma once

#include <memory>
#include <optional>
#include <string>

#include "van/active.hpp"
#include "van/data.hpp"
#include "van/objective.hpp"
#include "van/optim.hpp"

namespace van::cli {

enum class ProblemKind { Sinc, Quadratic, Lasso, Logistic, ViLogistic, ActiveLogistic };

ProblemKind problem_from_name(const std::string& name);
Method method_from_name(const std::string& name);
EstimatorKind estimator_from_name(const std::string& name);
ScheduleKind schedule_from_name(const std::string& name);
SafeguardKind safeguard_from_name(const std::string& name);
Acquisition acquisition_from_name(const std::string& name);

std::string name_of(ProblemKind problem);
std::string name_of(Method method);
std::string name_of(EstimatorKind estimator);
std::string name_of(ScheduleKind schedule);
std::string name_of(SafeguardKind safeguard);
std::string name_of(Acquisition acquisition);
std::string name_of(StopReason reason);

/// True for methods that maintain a single iterate rather than a
/// search distribution.
bool is_point_method(Method m);

/// Everything one experiment needs: the problem, the optimizer knobs,
/// where the data comes from, and where the trace goes.
struct RunSpec {
  ProblemKind problem = ProblemKind::Sinc;
  OptimizerConfig<double> optimizer = OptimizerConfig<double>::defaults(Method::Van);

  // Data source: an explicit file wins over the synthetic generator.
  std::string data_path;
  Index n = 200;
  Index dim = 5;
  double sparsity = 0.3;
  double noise_sd = 0.5;
  double separation = 2.0;
  std::uint64_t data_seed = 1;
  double reg = 0.01;

  // Active-learning knobs.
  Index batch_per_round = 10;
  Index rounds = 10;
  Index predictive_samples = 100;
  Index test_n = 100;
  Acquisition acquisition = Acquisition::Entropy;
  bool replace = false;  // keep selected rows in the pool

  std::string trace_out = "trace.csv";
  std::string label;  // row label in compare summaries; default = method name
};

/// A validated, ready-to-run experiment. Exactly one of `objective`
/// (optimizer problems) and `active` (pool problems) is set.
struct BuiltProblem {
  std::shared_ptr<const Objective<double>> objective;
  OptimizerConfig<double> optimizer;
  std::optional<ActiveConfig<double>> active;
  Dataset<double> pool;
  Dataset<double> test;
};

/// Checks what can be checked before touching data: parameter ranges,
/// referenced files, and method/problem compatibility (curvature
/// baselines need a smooth objective, so e.g. newton rejects lasso).
void validate_spec(const RunSpec& spec);

BuiltProblem build_problem(const RunSpec& spec);

}  // namespace van::cli
