#pragma once

#include <cmath>

#include "van/estimate.hpp"
#include "van/gaussian.hpp"
#include "van/objective.hpp"
#include "van/quadrature.hpp"
#include "van/rng.hpp"

namespace van {

enum class HessianMode { None, Full, Diag, GaussNewton };

namespace detail {

template <typename Scalar>
void require_finite(const Vector<Scalar>& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteValue(what);
}
template <typename Scalar>
void require_finite(const Matrix<Scalar>& m, const char* what) {
  if (!m.allFinite()) throw NonFiniteValue(what);
}
template <typename Scalar>
void require_finite(Scalar s, const char* what) {
  if (!std::isfinite(static_cast<double>(s))) throw NonFiniteValue(what);
}

}  // namespace detail

/// Monte-Carlo estimate of E_q[grad f] and, per `mode`, the averaged
/// Hessian (Full), Hessian diagonal (Diag), or gradient outer product
/// (GaussNewton). One sample batch serves every average (common random
/// numbers) and the reduction runs in sample order, so the result is a
/// pure function of (objective, state, S, stream).
template <typename Scalar>
ExpectationEstimate<Scalar> estimate_mc(const Objective<Scalar>& obj,
                                        const GaussianState<Scalar>& q, Index samples,
                                        const RngStream& stream,
                                        HessianMode mode = HessianMode::Full) {
  if (samples < 1) throw BadParams("estimate_mc: need at least one sample");
  if (q.dim() != obj.dim()) throw DimensionMismatch("estimate_mc: dimension mismatch");
  if (!obj.has(Capability::Grad))
    throw CapabilityMissing("estimate_mc: objective lacks gradient");
  if (mode == HessianMode::Full && !obj.has(Capability::Hess))
    throw CapabilityMissing("estimate_mc: objective lacks Hessian");
  const bool diag_via_full = !obj.has(Capability::HessDiag) && obj.has(Capability::Hess);
  if (mode == HessianMode::Diag && !obj.has(Capability::HessDiag) && !diag_via_full)
    throw CapabilityMissing("estimate_mc: objective lacks Hessian diagonal");

  const Index d = obj.dim();
  const SampleBatch<Scalar> batch = sample(q, stream, samples);

  ExpectationEstimate<Scalar> est;
  est.avg_grad = Vector<Scalar>::Zero(d);
  if (mode == HessianMode::Full || mode == HessianMode::GaussNewton)
    est.avg_hess = Matrix<Scalar>::Zero(d, d);
  if (mode == HessianMode::Diag) est.hess_diag = Vector<Scalar>::Zero(d);

  Scalar value_acc = Scalar(0);
  for (Index s = 0; s < samples; ++s) {
    const Vector<Scalar> theta = batch.draws.row(s);
    const Scalar fval = obj.value(theta);
    detail::require_finite(fval, "estimate_mc: non-finite objective value");
    value_acc += fval;

    const Vector<Scalar> g = obj.gradient(theta);
    detail::require_finite(g, "estimate_mc: non-finite gradient sample");
    est.avg_grad += g;

    switch (mode) {
      case HessianMode::Full: {
        const Matrix<Scalar> h = obj.hessian(theta);
        detail::require_finite(h, "estimate_mc: non-finite Hessian sample");
        est.avg_hess += h;
        break;
      }
      case HessianMode::Diag: {
        const Vector<Scalar> hd =
            diag_via_full ? Vector<Scalar>(obj.hessian(theta).diagonal())
                          : obj.hessian_diag(theta);
        detail::require_finite(hd, "estimate_mc: non-finite Hessian diagonal sample");
        est.hess_diag += hd;
        break;
      }
      case HessianMode::GaussNewton:
        est.avg_hess += g * g.transpose();
        break;
      case HessianMode::None:
        break;
    }
  }

  const Scalar inv = Scalar(1) / static_cast<Scalar>(samples);
  est.avg_grad *= inv;
  if (est.has_full_hess()) est.avg_hess *= inv;
  if (est.has_hess_diag()) est.hess_diag *= inv;
  est.avg_value = value_acc * inv;
  est.method = mode == HessianMode::GaussNewton ? EstimatorMethod::GaussNewton
                                                : EstimatorMethod::MonteCarlo;
  est.samples_used = samples;
  est.seed = stream.id();
  return est;
}

/// Reparameterization estimate of E_q[diag hess f] for a diagonal q,
/// needing only gradients: with theta = mu + sigma*eps, each coordinate
/// averages grad_d(theta) * eps_d / sigma_d. Reuses the exact noise
/// that sample() pairs with its draws, so it shares the batch with
/// estimate_mc on the same stream.
template <typename Scalar>
Vector<Scalar> estimate_hess_diag_reparam(const Objective<Scalar>& obj,
                                          const GaussianState<Scalar>& q, Index samples,
                                          const RngStream& stream) {
  if (samples < 1) throw BadParams("estimate_hess_diag_reparam: need at least one sample");
  if (!q.is_diagonal())
    throw BadParams("estimate_hess_diag_reparam: state must be diagonal");
  if (q.dim() != obj.dim())
    throw DimensionMismatch("estimate_hess_diag_reparam: dimension mismatch");
  if (!obj.has(Capability::Grad))
    throw CapabilityMissing("estimate_hess_diag_reparam: objective lacks gradient");

  const Index d = obj.dim();
  const Vector<Scalar> variances = q.variances();
  Vector<Scalar> inv_sigma(d);
  for (Index i = 0; i < d; ++i) {
    if (!(variances[i] >= Scalar(kMinSigma) * Scalar(kMinSigma)))
      throw DegenerateVariance("estimate_hess_diag_reparam: sigma below floor");
    inv_sigma[i] = Scalar(1) / std::sqrt(variances[i]);
  }

  const SampleBatch<Scalar> batch = sample(q, stream, samples);
  Vector<Scalar> acc = Vector<Scalar>::Zero(d);
  for (Index s = 0; s < samples; ++s) {
    const Vector<Scalar> g = obj.gradient(batch.draws.row(s));
    detail::require_finite(g, "estimate_hess_diag_reparam: non-finite gradient");
    acc += g.cwiseProduct(batch.noise.row(s).transpose()).cwiseProduct(inv_sigma);
  }
  return acc / static_cast<Scalar>(samples);
}

/// Closed-form estimate from an objective's expectation engine. The
/// stored avg_hess is twice the Sigma-gradient, matching E_q[hess f].
template <typename Scalar>
ExpectationEstimate<Scalar> estimate_exact(const Objective<Scalar>& obj,
                                           const GaussianState<Scalar>& q) {
  if (!obj.has(Capability::ExactExpectation))
    throw CapabilityMissing("estimate_exact: objective has no expectation engine");
  ExpectationEstimate<Scalar> est;
  est.avg_grad = obj.expectation_grad_mean(q);
  est.avg_hess = Scalar(2) * obj.expectation_grad_cov(q);
  est.avg_value = obj.expectation(q);
  est.method = EstimatorMethod::Exact;
  est.samples_used = 0;
  est.seed = 0;
  return est;
}

/// Deterministic estimate for objectives whose data terms touch theta
/// only through z_i = x_i . theta: each per-example expectation reduces
/// to a 1-D Gaussian integral over z_i ~ N(x_i.mu, x_i^T Sigma x_i),
/// evaluated by Gauss-Hermite quadrature.
template <typename Scalar>
ExpectationEstimate<Scalar> estimate_quadrature_glm(const Objective<Scalar>& obj,
                                                    const GaussianState<Scalar>& q,
                                                    Index order = 20) {
  if (!obj.has(Capability::GlmStructure))
    throw CapabilityMissing("estimate_quadrature_glm: objective has no link structure");
  if (order < 3) throw BadParams("estimate_quadrature_glm: order must be at least 3");
  if (q.dim() != obj.dim())
    throw DimensionMismatch("estimate_quadrature_glm: dimension mismatch");

  const QuadratureRule<Scalar> rule = gauss_hermite_rule<Scalar>(order);
  const Matrix<Scalar>& x = obj.glm_features();
  const Index n = x.rows();

  const Vector<Scalar> means = x * q.mean();
  Vector<Scalar> vars(n);
  if (q.is_diagonal()) {
    vars = x.cwiseAbs2() * q.variances();
  } else {
    const Matrix<Scalar> xs = x * q.cov();
    vars = xs.cwiseProduct(x).rowwise().sum();
  }

  const Scalar inv_sqrt_pi = Scalar(1) / std::sqrt(static_cast<Scalar>(M_PI));
  Vector<Scalar> e_val(n), e_d1(n), e_d2(n);
  for (Index i = 0; i < n; ++i) {
    const Scalar spread = std::sqrt(Scalar(2) * std::max(vars[i], Scalar(0)));
    Scalar a0 = Scalar(0), a1 = Scalar(0), a2 = Scalar(0);
    for (Index k = 0; k < rule.order(); ++k) {
      const Scalar z = means[i] + spread * rule.nodes[k];
      const Scalar w = rule.weights[k];
      a0 += w * obj.glm_link(0, z, i);
      a1 += w * obj.glm_link(1, z, i);
      a2 += w * obj.glm_link(2, z, i);
    }
    e_val[i] = a0 * inv_sqrt_pi;
    e_d1[i] = a1 * inv_sqrt_pi;
    e_d2[i] = a2 * inv_sqrt_pi;
  }

  const Scalar scale = obj.glm_scale();
  ExpectationEstimate<Scalar> est;
  est.avg_grad = scale * (x.transpose() * e_d1) + obj.glm_reg_expect_grad(q);
  est.avg_hess = symmetrized(
      Matrix<Scalar>(scale * (x.transpose() * e_d2.asDiagonal() * x))) +
      obj.glm_reg_expect_hess(q);
  est.avg_value = scale * e_val.sum() + obj.glm_reg_expect_value(q);
  detail::require_finite(est.avg_grad, "estimate_quadrature_glm: non-finite gradient");
  detail::require_finite(est.avg_hess, "estimate_quadrature_glm: non-finite Hessian");
  est.method = EstimatorMethod::Quadrature;
  est.samples_used = order;
  est.seed = 0;
  return est;
}

template <typename Scalar>
struct BonnetPriceReport {
  Scalar mean_discrepancy;
  Scalar cov_discrepancy;
};

/// Diagnostic check of the two Gaussian gradient identities
///   d/d mu E_q[f] = E_q[grad f]
///   d/d Sigma E_q[f] = 1/2 E_q[hess f]
/// by central finite differences of L(mu, Sigma). With an exact engine
/// the engine itself supplies both L and the right-hand sides; otherwise
/// L is a fixed-noise Monte-Carlo average (common random numbers across
/// every perturbed evaluation) and the right-hand sides are sample
/// averages over the same noise. Off-diagonal Sigma entries are probed
/// along symmetric directions, whose directional derivative is twice
/// the per-entry gradient.
template <typename Scalar>
BonnetPriceReport<Scalar> check_bonnet_price(const Objective<Scalar>& obj,
                                             const GaussianState<Scalar>& q, Index samples,
                                             Scalar fd_step,
                                             const RngStream& stream = RngStream(2718281828)) {
  const Index d = obj.dim();
  if (d > 4) throw BadParams("check_bonnet_price: diagnostic limited to dim <= 4");
  if (q.dim() != d) throw DimensionMismatch("check_bonnet_price: dimension mismatch");
  if (!(fd_step > Scalar(0))) throw BadParams("check_bonnet_price: fd_step must be positive");

  const Vector<Scalar> mu = q.mean();
  const Matrix<Scalar> cov = q.cov();
  const bool exact = obj.has(Capability::ExactExpectation);

  Matrix<Scalar> noise;
  if (!exact) {
    if (!obj.has(Capability::Grad) || !obj.has(Capability::Hess))
      throw CapabilityMissing("check_bonnet_price: needs gradient and Hessian");
    if (samples < 1) throw BadParams("check_bonnet_price: need at least one sample");
    noise.resize(samples, d);
    for (Index s = 0; s < samples; ++s)
      for (Index j = 0; j < d; ++j)
        noise(s, j) = static_cast<Scalar>(
            stream.normal_at(static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(d) +
                             static_cast<std::uint64_t>(j)));
  }

  const auto bound = [&](const Vector<Scalar>& m, const Matrix<Scalar>& c) -> Scalar {
    if (exact) return obj.expectation(GaussianState<Scalar>::from_cov(m, symmetrized(c)));
    Eigen::LLT<Matrix<Scalar>> llt(symmetrized(c));
    if (llt.info() != Eigen::Success)
      throw FactorizationFailure("check_bonnet_price: perturbed covariance not PD");
    const Matrix<Scalar> chol = llt.matrixL();
    Scalar acc = Scalar(0);
    for (Index s = 0; s < noise.rows(); ++s)
      acc += obj.value(m + chol * noise.row(s).transpose());
    return acc / static_cast<Scalar>(noise.rows());
  };

  Vector<Scalar> rhs_mu(d);
  Matrix<Scalar> rhs_cov(d, d);
  if (exact) {
    rhs_mu = obj.expectation_grad_mean(q);
    rhs_cov = obj.expectation_grad_cov(q);
  } else {
    const Eigen::LLT<Matrix<Scalar>> llt(cov);
    if (llt.info() != Eigen::Success)
      throw FactorizationFailure("check_bonnet_price: covariance not PD");
    const Matrix<Scalar> chol = llt.matrixL();
    rhs_mu.setZero();
    rhs_cov.setZero();
    for (Index s = 0; s < samples; ++s) {
      const Vector<Scalar> theta = mu + chol * noise.row(s).transpose();
      rhs_mu += obj.gradient(theta);
      rhs_cov += obj.hessian(theta);
    }
    rhs_mu /= static_cast<Scalar>(samples);
    rhs_cov /= Scalar(2) * static_cast<Scalar>(samples);  // identity carries the 1/2
  }

  BonnetPriceReport<Scalar> report{Scalar(0), Scalar(0)};
  for (Index i = 0; i < d; ++i) {
    Vector<Scalar> mp = mu, mm = mu;
    mp[i] += fd_step;
    mm[i] -= fd_step;
    const Scalar fd = (bound(mp, cov) - bound(mm, cov)) / (Scalar(2) * fd_step);
    report.mean_discrepancy = std::max(report.mean_discrepancy, std::abs(fd - rhs_mu[i]));
  }
  for (Index i = 0; i < d; ++i) {
    for (Index j = i; j < d; ++j) {
      Matrix<Scalar> dir = Matrix<Scalar>::Zero(d, d);
      dir(i, j) += Scalar(1);
      dir(j, i) += Scalar(1);
      const Scalar fd = (bound(mu, cov + fd_step * dir) - bound(mu, cov - fd_step * dir)) /
                        (Scalar(2) * fd_step);
      // The directional derivative along dir is sum_kl G_kl dir_kl, i.e.
      // 2 G_ij off the diagonal and 2 G_ii on it (dir doubles there), so
      // halving recovers the per-entry gradient in both cases.
      const Scalar probe = fd / Scalar(2);
      report.cov_discrepancy =
          std::max(report.cov_discrepancy, std::abs(probe - rhs_cov(i, j)));
    }
  }
  return report;
}

}  // namespace van
