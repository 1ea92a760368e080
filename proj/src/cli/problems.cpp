#include "cli/problems.hpp"

#include <filesystem>

#include "van/objectives/lasso.hpp"
#include "van/objectives/logistic.hpp"
#include "van/objectives/quadratic.hpp"
#include "van/objectives/sinc.hpp"
#include "van/objectives/vi.hpp"
#include "van/rng.hpp"

namespace van::cli {

ProblemKind problem_from_name(const std::string& name) {
  if (name == "sinc") return ProblemKind::Sinc;
  if (name == "quadratic") return ProblemKind::Quadratic;
  if (name == "lasso") return ProblemKind::Lasso;
  if (name == "logistic") return ProblemKind::Logistic;
  if (name == "vi-logistic") return ProblemKind::ViLogistic;
  if (name == "active-logistic") return ProblemKind::ActiveLogistic;
  throw BadParams("unknown problem '" + name + "'");
}

Method method_from_name(const std::string& name) {
  if (name == "van") return Method::Van;
  if (name == "van-natural") return Method::VanNaturalPath;
  if (name == "vag") return Method::Vag;
  if (name == "van-d") return Method::VanDiag;
  if (name == "vag-d") return Method::VagDiag;
  if (name == "vsgd") return Method::Vsgd;
  if (name == "newton") return Method::Newton;
  if (name == "adagrad") return Method::AdaGrad;
  if (name == "iridge") return Method::IRidge;
  throw BadParams("unknown method '" + name + "'");
}

EstimatorKind estimator_from_name(const std::string& name) {
  if (name == "exact") return EstimatorKind::Exact;
  if (name == "quadrature") return EstimatorKind::Quadrature;
  if (name == "mc") return EstimatorKind::MonteCarlo;
  throw BadParams("unknown estimator '" + name + "'");
}

ScheduleKind schedule_from_name(const std::string& name) {
  if (name == "constant") return ScheduleKind::Constant;
  if (name == "decay") return ScheduleKind::Decay;
  throw BadParams("unknown schedule '" + name + "'");
}

SafeguardKind safeguard_from_name(const std::string& name) {
  if (name == "backtrack") return SafeguardKind::Backtrack;
  if (name == "eigen-floor") return SafeguardKind::EigenFloor;
  throw BadParams("unknown safeguard '" + name + "'");
}

Acquisition acquisition_from_name(const std::string& name) {
  if (name == "entropy") return Acquisition::Entropy;
  if (name == "random") return Acquisition::Random;
  throw BadParams("unknown acquisition '" + name + "'");
}

std::string name_of(ProblemKind problem) {
  switch (problem) {
    case ProblemKind::Sinc: return "sinc";
    case ProblemKind::Quadratic: return "quadratic";
    case ProblemKind::Lasso: return "lasso";
    case ProblemKind::Logistic: return "logistic";
    case ProblemKind::ViLogistic: return "vi-logistic";
    case ProblemKind::ActiveLogistic: return "active-logistic";
  }
  return "?";
}

std::string name_of(Method method) {
  switch (method) {
    case Method::Van: return "van";
    case Method::VanNaturalPath: return "van-natural";
    case Method::Vag: return "vag";
    case Method::VanDiag: return "van-d";
    case Method::VagDiag: return "vag-d";
    case Method::Vsgd: return "vsgd";
    case Method::Newton: return "newton";
    case Method::AdaGrad: return "adagrad";
    case Method::IRidge: return "iridge";
  }
  return "?";
}

std::string name_of(EstimatorKind estimator) {
  switch (estimator) {
    case EstimatorKind::Exact: return "exact";
    case EstimatorKind::Quadrature: return "quadrature";
    case EstimatorKind::MonteCarlo: return "mc";
  }
  return "?";
}

std::string name_of(ScheduleKind schedule) {
  return schedule == ScheduleKind::Constant ? "constant" : "decay";
}

std::string name_of(SafeguardKind safeguard) {
  return safeguard == SafeguardKind::Backtrack ? "backtrack" : "eigen-floor";
}

std::string name_of(Acquisition acquisition) {
  return acquisition == Acquisition::Entropy ? "entropy" : "random";
}

std::string name_of(StopReason reason) {
  switch (reason) {
    case StopReason::GradientTolerance: return "grad_tol";
    case StopReason::StepTolerance: return "step_tol";
    case StopReason::MaxIterations: return "max_iters";
  }
  return "?";
}

bool is_point_method(Method m) {
  return m == Method::Newton || m == Method::AdaGrad || m == Method::IRidge;
}

void validate_spec(const RunSpec& spec) {
  spec.optimizer.validate();
  if (spec.n < 1 || spec.dim < 1) throw BadParams("n and dim must be positive");
  if (spec.sparsity < 0.0 || spec.sparsity > 1.0)
    throw BadParams("sparsity must lie in [0, 1]");
  if (spec.noise_sd < 0.0) throw BadParams("noise-sd must be nonnegative");
  if (spec.separation < 0.0) throw BadParams("separation must be nonnegative");
  if (spec.reg < 0.0) throw NegativeRegularization("reg must be nonnegative");
  if (spec.trace_out.empty()) throw BadParams("output path must not be empty");

  if (!spec.data_path.empty() && !std::filesystem::exists(spec.data_path))
    throw Error("data file '" + spec.data_path + "' does not exist");

  const Method m = spec.optimizer.method;
  if (m == Method::IRidge && spec.problem != ProblemKind::Lasso)
    throw BadParams("iridge solves only the lasso problem");
  if (spec.problem == ProblemKind::Lasso && (m == Method::Newton || m == Method::AdaGrad))
    throw BadParams(name_of(m) + " needs a smooth objective; lasso is not");
  if (spec.problem == ProblemKind::Sinc && spec.optimizer.init_mean.size() > 1)
    throw BadParams("sinc is one-dimensional; mu0 must be a single value");
  if ((spec.problem == ProblemKind::ViLogistic ||
       spec.problem == ProblemKind::ActiveLogistic) &&
      is_point_method(m))
    throw BadParams(name_of(spec.problem) + " needs a distribution method, not " +
                    name_of(m));
  if (spec.problem == ProblemKind::ActiveLogistic) {
    if (spec.batch_per_round < 1) throw BadParams("batch-per-round must be positive");
    if (spec.rounds < 0) throw BadParams("rounds must be nonnegative");
    if (spec.predictive_samples < 1) throw BadParams("pred-samples must be positive");
    if (spec.test_n < 1) throw BadParams("test-n must be positive");
  }
}

namespace {

/// Deterministic holdout for file-backed pools: the last quarter of the
/// rows (at least one) becomes the test set.
void split_holdout(const Dataset<double>& all, Dataset<double>& pool, Dataset<double>& test) {
  const Index total = all.features.rows();
  if (total < 2) throw BadParams("active pool file needs at least 2 rows");
  const Index held = std::max<Index>(1, total / 4);
  const Index kept = total - held;
  pool.name = all.name;
  pool.features = all.features.topRows(kept);
  pool.labels = all.labels.head(kept);
  test.name = all.name + ":holdout";
  test.features = all.features.bottomRows(held);
  test.labels = all.labels.tail(held);
}

}  // namespace

BuiltProblem build_problem(const RunSpec& spec) {
  validate_spec(spec);
  BuiltProblem out;
  out.optimizer = spec.optimizer;

  switch (spec.problem) {
    case ProblemKind::Sinc:
      // The CLI's sinc problem is the escape demonstration: a deep
      // global well at theta = 1 that a wide enough search
      // distribution finds from across the ripples.
      out.objective = make_sinc_escape<double>();
      break;

    case ProblemKind::Quadratic: {
      const Index d = spec.dim;
      Matrix<double> curvature = Matrix<double>::Zero(d, d);
      for (Index i = 0; i < d; ++i) curvature(i, i) = 1.0 + static_cast<double>(i);
      for (Index i = 0; i + 1 < d; ++i) curvature(i, i + 1) = curvature(i + 1, i) = 0.25;
      Vector<double> minimizer(d);
      for (Index i = 0; i < d; ++i) minimizer[i] = (i % 2 == 0) ? 1.0 : -1.0;
      out.objective = make_quadratic<double>(std::move(curvature), std::move(minimizer));
      break;
    }

    case ProblemKind::Lasso: {
      const Dataset<double> data =
          spec.data_path.empty()
              ? make_synthetic_regression<double>(spec.n, spec.dim, spec.sparsity,
                                                  spec.noise_sd, spec.data_seed)
                    .data
              : read_libsvm<double>(spec.data_path, LabelKind::Regression);
      out.objective = make_lasso<double>(data, spec.reg);
      break;
    }

    case ProblemKind::Logistic:
    case ProblemKind::ViLogistic: {
      const Dataset<double> data =
          spec.data_path.empty()
              ? make_synthetic_blobs<double>(spec.n, spec.dim, spec.separation,
                                             spec.data_seed)
              : read_libsvm<double>(spec.data_path, LabelKind::Classification);
      auto logistic = make_logistic<double>(data, spec.reg);
      out.objective = spec.problem == ProblemKind::ViLogistic
                          ? make_vi_objective<double>(std::move(logistic))
                          : std::move(logistic);
      break;
    }

    case ProblemKind::ActiveLogistic: {
      if (spec.data_path.empty()) {
        out.pool = make_synthetic_blobs<double>(spec.n, spec.dim, spec.separation,
                                                spec.data_seed);
        out.test = make_synthetic_blobs<double>(
            spec.test_n, spec.dim, spec.separation,
            RngStream(spec.data_seed).substream(11).id());
      } else {
        const Dataset<double> all =
            read_libsvm<double>(spec.data_path, LabelKind::Classification);
        split_holdout(all, out.pool, out.test);
      }
      ActiveConfig<double> active;
      active.optimizer = spec.optimizer;
      active.batch_per_round = spec.batch_per_round;
      active.rounds = spec.rounds;
      active.predictive_samples = spec.predictive_samples;
      active.acquisition = spec.acquisition;
      active.remove_selected = !spec.replace;
      active.reg_strength = spec.reg;
      out.active = std::move(active);
      break;
    }
  }
  return out;
}

}  // namespace van::cli
