#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "van/estimator.hpp"
#include "van/gaussian.hpp"
#include "van/objective.hpp"
#include "van/objectives/lasso.hpp"
#include "van/rng.hpp"

namespace van {

/// The update family. The first five evolve a Gaussian search
/// distribution by blending averaged curvature into its precision; the
/// mean-and-covariance gradient method (Vsgd) moves both moments by a
/// plain gradient step; the rest are point baselines.
enum class Method {
  Van,             // full covariance, precision accumulates E[hess]
  VanNaturalPath,  // same update computed in natural parameters
  Vag,             // precision accumulates E[grad grad^T]
  VanDiag,         // mean-field: per-coordinate precisions, E[diag hess]
  VagDiag,         // mean-field with squared-gradient increments
  Vsgd,            // gradient step on (mu, Sigma)
  Newton,          // point iterate, curvature-scaled step
  AdaGrad,         // point iterate, accumulated squared gradients
  IRidge,          // reweighted ridge fixed-point solver (lasso reference)
};

enum class EstimatorKind { Exact, Quadrature, MonteCarlo };

enum class SafeguardKind { Backtrack, EigenFloor };

/// How a step that would leave the positive-definite cone is repaired:
/// halve the step size and retry, or clamp eigenvalues at a floor.
struct SafeguardPolicy {
  SafeguardKind kind = SafeguardKind::Backtrack;
  double eigen_floor = 1e-8;
  int max_retries = 30;
};

enum class ScheduleKind { Constant, Decay };

/// Step size beta_t (distribution methods) or rho_t (point methods):
/// constant, or base / (1 + t)^power.
template <typename Scalar>
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  Scalar base = Scalar(0.1);
  Scalar power = Scalar(0.55);

  Scalar at(Index t) const {
    if (kind == ScheduleKind::Constant) return base;
    return base / std::pow(Scalar(1) + static_cast<Scalar>(t), power);
  }
};

template <typename Scalar>
struct OptimizerConfig {
  Method method = Method::Van;
  StepSchedule<Scalar> step{};
  EstimatorKind estimator = EstimatorKind::MonteCarlo;
  Index mc_samples = 10;
  Index quad_order = 20;
  Index max_iters = 10000;
  Scalar tol_grad = Scalar(1e-6);
  Scalar tol_step = Scalar(1e-10);
  std::uint64_t seed = 0;
  Index minibatch_size = 0;  // 0 = full batch
  SafeguardPolicy safeguard{};
  Vector<Scalar> init_mean;  // empty = origin
  Scalar init_sigma = Scalar(1);
  /// Warm start: resume a distribution method from this state instead
  /// of (init_mean, init_sigma). Lets callers chain runs.
  std::optional<GaussianState<Scalar>> init_state;
  Scalar iridge_floor = Scalar(1e-8);
  bool collect_timing = false;  // off keeps traces bit-reproducible

  /// Per-method step-size conventions; everything else shared.
  static OptimizerConfig defaults(Method m) {
    OptimizerConfig c;
    c.method = m;
    switch (m) {
      case Method::Vsgd:
      case Method::AdaGrad:
        c.step.base = Scalar(0.01);
        break;
      case Method::Newton:
        c.step.base = Scalar(1);
        break;
      default:
        c.step.base = Scalar(0.1);
        break;
    }
    return c;
  }

  void validate() const {
    if (!(step.base > Scalar(0))) throw BadParams("config: step size must be positive");
    if (mc_samples < 1) throw BadParams("config: mc_samples must be at least 1");
    if (quad_order < 3) throw BadParams("config: quad_order must be at least 3");
    if (!(tol_grad > Scalar(0)) || !(tol_step > Scalar(0)))
      throw BadParams("config: tolerances must be positive");
    if (max_iters < 0) throw BadParams("config: max_iters must be nonnegative");
    if (minibatch_size < 0) throw BadParams("config: minibatch_size must be nonnegative");
    if (!(init_sigma > Scalar(0))) throw BadParams("config: init_sigma must be positive");
    if (!(iridge_floor > Scalar(0))) throw BadParams("config: iridge_floor must be positive");
    if (safeguard.max_retries < 1) throw BadParams("config: max_retries must be positive");
    if (!(safeguard.eigen_floor > 0)) throw BadParams("config: eigen_floor must be positive");
  }
};

/// One trace row. epoch_fraction counts cumulative passes over the
/// data (iterations, for objectives without examples); wallclock_ns is
/// zero unless timing collection is enabled, keeping traces
/// bit-reproducible by default.
template <typename Scalar>
struct IterationRecord {
  Index iter = 0;
  Scalar epoch_fraction = Scalar(0);
  Scalar f_at_mean = Scalar(0);
  Scalar l_estimate = Scalar(0);
  Scalar grad_norm = Scalar(0);
  Scalar step_norm = Scalar(0);
  Scalar trace_sigma = Scalar(0);
  Index samples_used = 0;
  std::uint64_t wallclock_ns = 0;
};

enum class StopReason { GradientTolerance, StepTolerance, MaxIterations };

template <typename Scalar>
struct RunResult {
  Vector<Scalar> final_point;  // distribution mean, or the point iterate
  std::optional<GaussianState<Scalar>> final_state;  // absent for point methods
  std::vector<IterationRecord<Scalar>> trace;
  StopReason reason = StopReason::MaxIterations;

  bool converged() const { return reason != StopReason::MaxIterations; }
};

namespace detail {

/// Clamp the eigenvalues of a symmetric matrix at `floor`.
template <typename Scalar>
Matrix<Scalar> eigen_floor_spd(const Matrix<Scalar>& m, Scalar floor) {
  const Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(symmetrized(m));
  if (eig.info() != Eigen::Success)
    throw FactorizationFailure("eigen floor: eigensolver failed");
  const Vector<Scalar> clamped = eig.eigenvalues().cwiseMax(floor);
  return eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace detail

/// Core distribution update: the precision absorbs the averaged
/// Hessian FIRST, then the new precision scales the mean step,
///   P' = P + beta E[hess f],   mu' = mu - beta P'^{-1} E[grad f].
/// A non-PD P' is repaired per the safeguard: halve beta and retry, or
/// clamp eigenvalues at the policy floor.
template <typename Scalar>
GaussianState<Scalar> van_step(const GaussianState<Scalar>& q,
                               const ExpectationEstimate<Scalar>& est, Scalar beta,
                               const SafeguardPolicy& safeguard = {}) {
  if (!est.has_full_hess()) throw BadParams("van_step: estimate lacks a full Hessian");
  const Index d = q.dim();
  if (est.avg_grad.size() != d || est.avg_hess.rows() != d || est.avg_hess.cols() != d)
    throw DimensionMismatch("van_step: estimate does not match state dimension");
  if (!(beta > Scalar(0))) throw BadParams("van_step: beta must be positive");

  if (d == 1) {
    // Scalar arithmetic, shared verbatim with the mean-field step so a
    // one-dimensional problem produces identical bits on either path.
    const Scalar h = est.avg_hess(0, 0);
    const Scalar g = est.avg_grad[0];
    const Scalar p = q.precisions()[0];
    Scalar b = beta;
    Scalar p_new = p + b * h;
    if (safeguard.kind == SafeguardKind::Backtrack) {
      int tries = safeguard.max_retries;
      while (!(p_new > Scalar(0)) && tries-- > 0) {
        b /= Scalar(2);
        p_new = p + b * h;
      }
      if (!(p_new > Scalar(0)))
        throw SafeguardExhausted("van_step: precision not positive after backtracking");
    } else if (!(p_new > Scalar(0))) {
      p_new = static_cast<Scalar>(safeguard.eigen_floor);
    }
    Vector<Scalar> mu(1), prec(1);
    mu[0] = q.mean()[0] - b * g / p_new;
    prec[0] = p_new;
    if (q.is_diagonal()) return GaussianState<Scalar>::diag_from_precisions(mu, prec);
    Matrix<Scalar> pm(1, 1);
    pm(0, 0) = p_new;
    return GaussianState<Scalar>::from_precision(mu, pm);
  }

  const Matrix<Scalar> p = q.precision();
  const Matrix<Scalar> hess = symmetrized(est.avg_hess);

  Scalar b = beta;
  Matrix<Scalar> p_new;
  Eigen::LLT<Matrix<Scalar>> llt;
  if (safeguard.kind == SafeguardKind::Backtrack) {
    int tries = safeguard.max_retries + 1;
    while (true) {
      p_new = symmetrized(Matrix<Scalar>(p + b * hess));
      llt.compute(p_new);
      if (llt.info() == Eigen::Success) break;
      if (--tries <= 0)
        throw SafeguardExhausted("van_step: precision not positive-definite after backtracking");
      b /= Scalar(2);
    }
  } else {
    p_new = symmetrized(Matrix<Scalar>(p + b * hess));
    llt.compute(p_new);
    if (llt.info() != Eigen::Success) {
      p_new = detail::eigen_floor_spd(p_new, static_cast<Scalar>(safeguard.eigen_floor));
      llt.compute(p_new);
      if (llt.info() != Eigen::Success)
        throw FactorizationFailure("van_step: floored precision still not factorizable");
    }
  }

  // When the precision is exactly diagonal (separable problems), solve
  // coordinatewise with the same expression as the mean-field step so
  // the two methods agree bit-for-bit, not merely to rounding.
  Vector<Scalar> mu(d);
  Matrix<Scalar> off = p_new;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() == Scalar(0)) {
    for (Index i = 0; i < d; ++i) mu[i] = q.mean()[i] - b * est.avg_grad[i] / p_new(i, i);
  } else {
    mu = q.mean() - b * llt.solve(est.avg_grad);
  }
  return GaussianState<Scalar>::from_precision(mu, p_new);
}

/// The same update computed along the natural-parameter path: convert
/// to (P mu, -P/2), take a gradient step in those coordinates using the
/// chain-rule transforms of the mean-parameter gradient,
///   g_1 = grad_mu - 2 grad_Sigma mu,   g_2 = grad_Sigma,
/// and convert back. Algebraically identical to van_step with
/// grad_Sigma = E[hess]/2; kept separate so the equivalence is testable.
template <typename Scalar>
GaussianState<Scalar> van_step_natural(const GaussianState<Scalar>& q,
                                       const Vector<Scalar>& grad_mu,
                                       const Matrix<Scalar>& grad_sigma, Scalar beta,
                                       const SafeguardPolicy& safeguard = {}) {
  const Index d = q.dim();
  if (grad_mu.size() != d || grad_sigma.rows() != d || grad_sigma.cols() != d)
    throw DimensionMismatch("van_step_natural: gradient does not match state dimension");
  if (!is_symmetric(grad_sigma)) throw BadParams("van_step_natural: grad_sigma not symmetric");
  if (!(beta > Scalar(0))) throw BadParams("van_step_natural: beta must be positive");

  const NaturalParams<Scalar> nat = to_natural_params(q);
  const Vector<Scalar> g1 = grad_mu - Scalar(2) * grad_sigma * q.mean();

  Scalar b = beta;
  if (safeguard.kind == SafeguardKind::Backtrack) {
    int tries = safeguard.max_retries + 1;
    while (true) {
      NaturalParams<Scalar> stepped;
      stepped.lambda1 = nat.lambda1 - b * g1;
      stepped.lambda2 = nat.lambda2 - b * grad_sigma;
      try {
        return from_natural_params(stepped);
      } catch (const FactorizationFailure&) {
        if (--tries <= 0)
          throw SafeguardExhausted(
              "van_step_natural: precision not positive-definite after backtracking");
        b /= Scalar(2);
      }
    }
  }
  NaturalParams<Scalar> stepped;
  stepped.lambda1 = nat.lambda1 - b * g1;
  stepped.lambda2 = nat.lambda2 - b * grad_sigma;
  const Matrix<Scalar> prec = symmetrized(Matrix<Scalar>(Scalar(-2) * stepped.lambda2));
  if (Eigen::LLT<Matrix<Scalar>>(prec).info() != Eigen::Success)
    stepped.lambda2 =
        Scalar(-0.5) * detail::eigen_floor_spd(prec, static_cast<Scalar>(safeguard.eigen_floor));
  return from_natural_params(stepped);
}

/// Gauss-Newton variant: the precision increment is the averaged
/// gradient outer product, which is PSD, so positive-definiteness can
/// never be lost and no safeguard is needed.
template <typename Scalar>
GaussianState<Scalar> vag_step(const GaussianState<Scalar>& q,
                               const ExpectationEstimate<Scalar>& est, Scalar beta) {
  if (est.method != EstimatorMethod::GaussNewton)
    throw BadParams("vag_step: estimate must use gradient outer products");
  if (!est.has_full_hess()) throw BadParams("vag_step: estimate lacks the outer-product average");
  const Index d = q.dim();
  if (est.avg_grad.size() != d || est.avg_hess.rows() != d)
    throw DimensionMismatch("vag_step: estimate does not match state dimension");
  if (!(beta > Scalar(0))) throw BadParams("vag_step: beta must be positive");

  const Matrix<Scalar> p_new =
      symmetrized(Matrix<Scalar>(q.precision() + beta * symmetrized(est.avg_hess)));
  const Eigen::LLT<Matrix<Scalar>> llt(p_new);
  if (llt.info() != Eigen::Success)
    throw FactorizationFailure("vag_step: precision lost positive-definiteness");
  const Vector<Scalar> mu = q.mean() - beta * llt.solve(est.avg_grad);
  return GaussianState<Scalar>::from_precision(mu, p_new);
}

/// Mean-field update: per-coordinate precisions absorb the averaged
/// Hessian diagonal, then scale the mean step coordinatewise.
template <typename Scalar>
GaussianState<Scalar> van_d_step(const GaussianState<Scalar>& q,
                                 const Vector<Scalar>& avg_grad,
                                 const Vector<Scalar>& hess_diag, Scalar beta,
                                 const SafeguardPolicy& safeguard = {}) {
  if (!q.is_diagonal()) throw BadParams("van_d_step: state must be diagonal");
  const Index d = q.dim();
  if (avg_grad.size() != d || hess_diag.size() != d)
    throw DimensionMismatch("van_d_step: estimate does not match state dimension");
  if (!(beta > Scalar(0))) throw BadParams("van_d_step: beta must be positive");

  const Vector<Scalar> s = q.precisions();
  Scalar b = beta;
  Vector<Scalar> s_new = s + b * hess_diag;
  if (safeguard.kind == SafeguardKind::Backtrack) {
    int tries = safeguard.max_retries;
    while (!(s_new.minCoeff() > Scalar(0)) && tries-- > 0) {
      b /= Scalar(2);
      s_new = s + b * hess_diag;
    }
    if (!(s_new.minCoeff() > Scalar(0)))
      throw SafeguardExhausted("van_d_step: precision not positive after backtracking");
  } else {
    s_new = s_new.cwiseMax(static_cast<Scalar>(safeguard.eigen_floor));
  }

  Vector<Scalar> mu(d);
  for (Index i = 0; i < d; ++i) mu[i] = q.mean()[i] - b * avg_grad[i] / s_new[i];
  return GaussianState<Scalar>::diag_from_precisions(mu, s_new);
}

/// Plain gradient descent on both moments,
///   mu' = mu - rho grad_mu,   Sigma' = Sigma - rho grad_Sigma,
/// with the covariance eigenvalues floored to stay positive-definite
/// (the floor always succeeds, so this step cannot fail).
template <typename Scalar>
GaussianState<Scalar> vsgd_step(const GaussianState<Scalar>& q, const Vector<Scalar>& grad_mu,
                                const Matrix<Scalar>& grad_sigma, Scalar rho,
                                Scalar eigen_floor = Scalar(1e-8)) {
  const Index d = q.dim();
  if (grad_mu.size() != d || grad_sigma.rows() != d || grad_sigma.cols() != d)
    throw DimensionMismatch("vsgd_step: gradient does not match state dimension");
  if (!(rho > Scalar(0))) throw BadParams("vsgd_step: rho must be positive");
  if (!(eigen_floor > Scalar(0))) throw BadParams("vsgd_step: eigen_floor must be positive");

  const Vector<Scalar> mu = q.mean() - rho * grad_mu;
  Matrix<Scalar> cov = symmetrized(Matrix<Scalar>(q.cov() - rho * grad_sigma));
  const Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(cov);
  if (eig.info() != Eigen::Success)
    throw FactorizationFailure("vsgd_step: eigensolver failed");
  if (eig.eigenvalues().minCoeff() < eigen_floor) {
    const Vector<Scalar> clamped = eig.eigenvalues().cwiseMax(eigen_floor);
    cov = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    cov = symmetrized(cov);
  }
  return GaussianState<Scalar>::from_cov(mu, cov);
}

/// Curvature-scaled point step theta' = theta - rho hess^{-1} grad; an
/// indefinite Hessian is repaired by clamping its eigenvalues.
template <typename Scalar>
Vector<Scalar> newton_step(const Vector<Scalar>& theta, const Vector<Scalar>& grad,
                           const Matrix<Scalar>& hess, Scalar rho,
                           Scalar eigen_floor = Scalar(1e-8)) {
  const Index d = theta.size();
  if (grad.size() != d || hess.rows() != d || hess.cols() != d)
    throw DimensionMismatch("newton_step: derivative shapes do not match theta");
  if (!(rho > Scalar(0))) throw BadParams("newton_step: rho must be positive");

  const Matrix<Scalar> h = symmetrized(hess);
  const Eigen::LLT<Matrix<Scalar>> llt(h);
  if (llt.info() == Eigen::Success) return theta - rho * llt.solve(grad);

  const Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(h);
  if (eig.info() != Eigen::Success)
    throw FactorizationFailure("newton_step: eigensolver failed");
  const Vector<Scalar> clamped = eig.eigenvalues().cwiseMax(eigen_floor);
  const Vector<Scalar> step =
      eig.eigenvectors() * (eig.eigenvectors().transpose() * grad).cwiseQuotient(clamped);
  return theta - rho * step;
}

template <typename Scalar>
struct AdaGradIterate {
  Vector<Scalar> theta;
  Vector<Scalar> accum;  // running elementwise sum of squared gradients
};

/// theta' = theta - rho g / (sqrt(s + g.g) + eps), s' = s + g.g.
template <typename Scalar>
AdaGradIterate<Scalar> adagrad_step(const Vector<Scalar>& theta, const Vector<Scalar>& accum,
                                    const Vector<Scalar>& grad, Scalar rho,
                                    Scalar eps = Scalar(1e-8)) {
  const Index d = theta.size();
  if (accum.size() != d || grad.size() != d)
    throw DimensionMismatch("adagrad_step: shapes do not match theta");
  if (!(rho > Scalar(0))) throw BadParams("adagrad_step: rho must be positive");
  if (accum.size() > 0 && accum.minCoeff() < Scalar(0))
    throw BadParams("adagrad_step: accumulator must be nonnegative");

  AdaGradIterate<Scalar> next;
  next.accum = accum + grad.cwiseAbs2();
  const Vector<Scalar> denom = (next.accum.cwiseSqrt().array() + eps).matrix();
  next.theta = theta - rho * grad.cwiseQuotient(denom);
  return next;
}

/// Reweighted-ridge fixed point: iterate
///   theta <- solve(X^T X + reg diag(1 / max(|theta_d|, floor)), X^T y)
/// from the plain ridge start until the iterate stops moving. The fixed
/// point solves the l1-penalized least-squares problem
/// 1/2 |y - X theta|^2 + reg |theta|_1.
template <typename Scalar>
Vector<Scalar> iridge_solve(const Matrix<Scalar>& x, const Vector<Scalar>& y, Scalar reg,
                            Index max_iters = 1000, Scalar tol = Scalar(1e-10),
                            Scalar floor = Scalar(1e-8)) {
  if (x.rows() != y.size()) throw DimensionMismatch("iridge_solve: row count mismatch");
  if (reg < Scalar(0)) throw NegativeRegularization("iridge_solve: negative reg");
  if (!(floor > Scalar(0))) throw BadParams("iridge_solve: floor must be positive");
  if (!(tol > Scalar(0))) throw BadParams("iridge_solve: tol must be positive");

  const Index d = x.cols();
  const Matrix<Scalar> xtx = x.transpose() * x;
  const Vector<Scalar> xty = x.transpose() * y;

  const auto weighted_solve = [&](const Vector<Scalar>& weights) {
    Matrix<Scalar> a = xtx;
    a.diagonal() += weights;
    const Eigen::LLT<Matrix<Scalar>> llt(a);
    if (llt.info() != Eigen::Success)
      throw FactorizationFailure("iridge_solve: normal equations not positive-definite");
    return Vector<Scalar>(llt.solve(xty));
  };

  Vector<Scalar> theta = weighted_solve(Vector<Scalar>::Constant(d, reg));
  for (Index t = 0; t < max_iters; ++t) {
    const Vector<Scalar> weights =
        reg * theta.cwiseAbs().cwiseMax(floor).cwiseInverse();
    const Vector<Scalar> next = weighted_solve(weights);
    const Scalar move = (next - theta).norm();
    theta = next;
    if (move < tol) return theta;
  }
  throw MaxItersExceeded("iridge_solve: no fixed point within iteration budget");
}

template <typename Scalar>
Vector<Scalar> iridge_solve(const Dataset<Scalar>& data, Scalar reg, Index max_iters = 1000,
                            Scalar tol = Scalar(1e-10), Scalar floor = Scalar(1e-8)) {
  return iridge_solve<Scalar>(data.features, data.labels, reg, max_iters, tol, floor);
}

template <typename Scalar>
using IterationCallback = std::function<void(const IterationRecord<Scalar>&)>;

namespace detail {

inline bool is_distribution_method(Method m) {
  switch (m) {
    case Method::Van:
    case Method::VanNaturalPath:
    case Method::Vag:
    case Method::VanDiag:
    case Method::VagDiag:
    case Method::Vsgd:
      return true;
    default:
      return false;
  }
}

inline bool is_diagonal_method(Method m) {
  return m == Method::VanDiag || m == Method::VagDiag;
}

/// Subgradient optimality measure for the l1-penalized quadratic: the
/// norm of the minimum-norm subgradient, zero exactly at the optimum.
template <typename Scalar>
Scalar lasso_optimality(const LassoObjective<Scalar>& lasso, const Vector<Scalar>& theta) {
  const Matrix<Scalar>& x = lasso.features();
  const Vector<Scalar> smooth =
      lasso.data_scale() * Scalar(2) *
      (x.transpose() * (x * theta) - x.transpose() * lasso.targets());
  const Scalar reg = lasso.reg_strength();
  Scalar acc = Scalar(0);
  for (Index i = 0; i < theta.size(); ++i) {
    Scalar g;
    if (theta[i] > Scalar(0))
      g = smooth[i] + reg;
    else if (theta[i] < Scalar(0))
      g = smooth[i] - reg;
    else
      g = std::max(Scalar(0), std::abs(smooth[i]) - reg);
    acc += g * g;
  }
  return std::sqrt(acc);
}

/// Rethrow the active exception with iteration context attached,
/// preserving the concrete error type for the common failures.
[[noreturn]] inline void rethrow_with_iteration(Index iter) {
  const std::string where = "iteration " + std::to_string(iter) + ": ";
  try {
    throw;
  } catch (const SafeguardExhausted& e) {
    throw SafeguardExhausted(where + e.what());
  } catch (const FactorizationFailure& e) {
    throw FactorizationFailure(where + e.what());
  } catch (const DegenerateVariance& e) {
    throw DegenerateVariance(where + e.what());
  } catch (const NonFiniteValue& e) {
    throw NonFiniteValue(where + e.what());
  } catch (const CapabilityMissing& e) {
    throw CapabilityMissing(where + e.what());
  } catch (const OutOfRange& e) {
    throw OutOfRange(where + e.what());
  }
}

}  // namespace detail

/// Driver: validates method/estimator/objective compatibility, then
/// iterates estimate -> correct -> step -> record until a tolerance or
/// the iteration budget stops it. Deterministic given (objective,
/// config): all randomness flows from config.seed through dedicated
/// substreams, and timing is only collected when asked.
template <typename Scalar>
RunResult<Scalar> run(const Objective<Scalar>& obj, const OptimizerConfig<Scalar>& config,
                      const IterationCallback<Scalar>& callback = {}) {
  config.validate();
  const Index d = obj.dim();

  Vector<Scalar> mean0 = config.init_mean;
  if (mean0.size() == 0) mean0 = Vector<Scalar>::Zero(d);
  if (mean0.size() != d) throw DimensionMismatch("run: init_mean does not match objective");

  const Method method = config.method;
  const bool distributional = detail::is_distribution_method(method);
  const bool point_method = method == Method::Newton || method == Method::AdaGrad;

  // --- capability gates -----------------------------------------------------
  if (point_method && obj.has(Capability::NonSmooth))
    throw CapabilityMissing("run: point methods need a smooth objective");
  if ((method == Method::Vag || method == Method::VagDiag) &&
      config.estimator != EstimatorKind::MonteCarlo)
    throw BadParams("run: gradient outer products require the sampling estimator");
  if (distributional) {
    switch (config.estimator) {
      case EstimatorKind::Exact:
        if (!obj.has(Capability::ExactExpectation))
          throw CapabilityMissing("run: objective has no exact expectation engine");
        break;
      case EstimatorKind::Quadrature:
        if (!obj.has(Capability::GlmStructure))
          throw CapabilityMissing("run: objective has no per-example link structure");
        break;
      case EstimatorKind::MonteCarlo:
        if (!obj.has(Capability::Grad))
          throw CapabilityMissing("run: objective has no gradient");
        if ((method == Method::Van || method == Method::VanNaturalPath ||
             method == Method::Vsgd) &&
            !obj.has(Capability::Hess))
          throw CapabilityMissing("run: full-covariance sampling needs a Hessian");
        break;
    }
  }
  const LassoObjective<Scalar>* lasso = nullptr;
  if (method == Method::IRidge) {
    lasso = dynamic_cast<const LassoObjective<Scalar>*>(&obj);
    if (lasso == nullptr)
      throw CapabilityMissing("run: the reweighted-ridge solver needs an l1 least-squares objective");
    if (config.minibatch_size > 0)
      throw BadParams("run: the reweighted-ridge solver runs full batch");
  }

  // --- minibatch plumbing ---------------------------------------------------
  const Index n_examples = obj.num_examples();
  Index batch_size = config.minibatch_size;
  if (batch_size > 0) {
    if (!obj.has(Capability::Minibatch))
      throw CapabilityMissing("run: objective cannot form minibatches");
    if (batch_size > n_examples) throw BadParams("run: minibatch larger than the dataset");
    if (batch_size == n_examples) batch_size = 0;  // full batch, skip the plumbing
  }

  const RngStream root(config.seed);
  std::vector<Index> order(static_cast<std::size_t>(n_examples));
  std::iota(order.begin(), order.end(), Index{0});
  Index epoch_count = 0, batch_cursor = 0;
  const auto next_batch = [&]() -> std::shared_ptr<const Objective<Scalar>> {
    if (batch_cursor == 0) {
      RngStream shuffle_stream = root.substream(2, static_cast<std::uint64_t>(epoch_count));
      deterministic_shuffle(order, shuffle_stream);
    }
    const Index begin = batch_cursor;
    const Index end = std::min<Index>(batch_cursor + batch_size, n_examples);
    batch_cursor = end;
    if (batch_cursor >= n_examples) {
      batch_cursor = 0;
      ++epoch_count;
    }
    return obj.minibatch(
        std::span<const Index>(order.data() + begin, static_cast<std::size_t>(end - begin)));
  };

  // --- state ----------------------------------------------------------------
  std::optional<GaussianState<Scalar>> state;
  if (config.init_state.has_value()) {
    if (!distributional) throw BadParams("run: init_state only applies to distribution methods");
    if (config.init_state->dim() != d)
      throw DimensionMismatch("run: init_state does not match objective");
    if (detail::is_diagonal_method(method) && !config.init_state->is_diagonal())
      throw BadParams("run: mean-field methods need a diagonal init_state");
    state = *config.init_state;
  } else if (distributional) {
    const Scalar var = config.init_sigma * config.init_sigma;
    if (detail::is_diagonal_method(method))
      state = GaussianState<Scalar>::diag_from_variances(mean0,
                                                         Vector<Scalar>::Constant(d, var));
    else
      state = GaussianState<Scalar>::from_cov(mean0,
                                              Matrix<Scalar>(var * Matrix<Scalar>::Identity(d, d)));
  }
  Vector<Scalar> theta = state ? state->mean() : mean0;
  Vector<Scalar> adagrad_accum = Vector<Scalar>::Zero(d);

  RunResult<Scalar> result;
  result.reason = StopReason::MaxIterations;
  result.trace.reserve(static_cast<std::size_t>(std::min<Index>(config.max_iters, 4096)));

  Index examples_seen = 0;
  for (Index t = 0; t < config.max_iters; ++t) {
    const auto tick = std::chrono::steady_clock::now();
    const Scalar step_size = config.step.at(t);
    const RngStream iter_stream = root.substream(1, static_cast<std::uint64_t>(t));

    std::shared_ptr<const Objective<Scalar>> view_holder;
    const Objective<Scalar>* view = &obj;
    if (batch_size > 0) {
      view_holder = next_batch();
      view = view_holder.get();
      examples_seen += view->num_examples();
    } else {
      examples_seen += n_examples;
    }

    IterationRecord<Scalar> row;
    row.iter = t;
    row.epoch_fraction = n_examples > 0
                             ? static_cast<Scalar>(examples_seen) / static_cast<Scalar>(n_examples)
                             : static_cast<Scalar>(t + 1);

    try {
      if (method == Method::IRidge) {
        // One reweighted-ridge pass per iteration, on the full data.
        const Matrix<Scalar>& x = lasso->features();
        const Vector<Scalar> xty = x.transpose() * lasso->targets();
        const Scalar effective_reg =
            lasso->reg_strength() / (Scalar(2) * lasso->data_scale());
        Matrix<Scalar> a = x.transpose() * x;
        if (t == 0)
          a.diagonal().array() += effective_reg;
        else
          a.diagonal() +=
              effective_reg * theta.cwiseAbs().cwiseMax(config.iridge_floor).cwiseInverse();
        const Eigen::LLT<Matrix<Scalar>> llt(a);
        if (llt.info() != Eigen::Success)
          throw FactorizationFailure("run: reweighted normal equations not positive-definite");
        const Vector<Scalar> next = llt.solve(xty);
        row.step_norm = (next - theta).norm();
        theta = next;
        row.grad_norm = detail::lasso_optimality(*lasso, theta);
        row.f_at_mean = obj.value(theta);
        row.l_estimate = row.f_at_mean;
        row.samples_used = 0;
      } else if (point_method) {
        const Vector<Scalar> grad = view->gradient(theta);
        Vector<Scalar> next;
        if (method == Method::Newton) {
          next = newton_step(theta, grad, view->hessian(theta), step_size,
                             static_cast<Scalar>(config.safeguard.eigen_floor));
        } else {
          auto iterate = adagrad_step(theta, adagrad_accum, grad, step_size);
          next = std::move(iterate.theta);
          adagrad_accum = std::move(iterate.accum);
        }
        row.step_norm = (next - theta).norm();
        theta = next;
        // The row describes the post-step iterate throughout, so the
        // stopping rule sees the gradient where the iterate landed.
        row.grad_norm = view->gradient(theta).norm();
        row.f_at_mean = obj.value(theta);
        row.l_estimate = row.f_at_mean;
        row.samples_used = 0;
      } else {
        // Distribution methods: estimate, correct, step.
        ExpectationEstimate<Scalar> est;
        switch (config.estimator) {
          case EstimatorKind::Exact:
            est = estimate_exact(*view, *state);
            break;
          case EstimatorKind::Quadrature:
            est = estimate_quadrature_glm(*view, *state, config.quad_order);
            break;
          case EstimatorKind::MonteCarlo: {
            HessianMode mode = HessianMode::Full;
            if (method == Method::Vag || method == Method::VagDiag)
              mode = HessianMode::GaussNewton;
            else if (method == Method::VanDiag)
              mode = HessianMode::None;
            est = estimate_mc(*view, *state, config.mc_samples, iter_stream, mode);
            if (method == Method::VanDiag)
              est.hess_diag =
                  estimate_hess_diag_reparam(*view, *state, config.mc_samples, iter_stream);
            break;
          }
        }
        if (view->has(Capability::VariationalCorrection))
          view->correct_expectation(est, *state);

        GaussianState<Scalar> next = [&]() {
          switch (method) {
            case Method::Van:
              return van_step(*state, est, step_size, config.safeguard);
            case Method::VanNaturalPath:
              return van_step_natural(*state, est.avg_grad,
                                      Matrix<Scalar>(symmetrized(est.avg_hess) / Scalar(2)),
                                      step_size, config.safeguard);
            case Method::Vag:
              return vag_step(*state, est, step_size);
            case Method::VanDiag:
            case Method::VagDiag: {
              const Vector<Scalar> hd =
                  est.has_hess_diag() ? est.hess_diag : Vector<Scalar>(est.avg_hess.diagonal());
              return van_d_step(*state, est.avg_grad, hd, step_size, config.safeguard);
            }
            default:  // Vsgd
              return vsgd_step(*state, est.avg_grad,
                               Matrix<Scalar>(symmetrized(est.avg_hess) / Scalar(2)), step_size,
                               static_cast<Scalar>(config.safeguard.eigen_floor));
          }
        }();

        row.grad_norm = est.avg_grad.norm();
        row.step_norm = (next.mean() - state->mean()).norm();
        row.samples_used = est.samples_used;
        row.l_estimate = est.avg_value;
        state = std::move(next);
        theta = state->mean();
        row.f_at_mean = obj.value(theta);
        row.trace_sigma = state->is_diagonal() ? state->variances().sum() : state->cov().trace();
      }
    } catch (...) {
      detail::rethrow_with_iteration(t);
    }

    if (config.collect_timing) {
      const auto tock = std::chrono::steady_clock::now();
      row.wallclock_ns = static_cast<std::uint64_t>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(tock - tick).count());
    }
    result.trace.push_back(row);
    if (callback) callback(row);

    if (row.grad_norm < config.tol_grad) {
      result.reason = StopReason::GradientTolerance;
      break;
    }
    if (row.step_norm < config.tol_step) {
      result.reason = StopReason::StepTolerance;
      break;
    }
  }

  result.final_point = theta;
  if (state) result.final_state = std::move(state);
  return result;
}

}  // namespace van
