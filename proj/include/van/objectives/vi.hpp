#pragma once

#include <memory>
#include <utility>

#include "van/objective.hpp"

namespace van {

/// Variational-inference wrapper. The wrapped objective is read as a
/// negative log joint -log p(y, theta); the quantity being minimized
/// over (mu, Sigma) is the variational bound
///   L(mu, Sigma) = E_q[f(theta)] - H(q).
/// Pointwise evaluation and the expectation engine stay those of f; the
/// entropy enters through correct_expectation, which shifts the
/// averaged Hessian by -Sigma^{-1} (the entropy's Sigma-gradient is
/// -Sigma^{-1}/2 and estimates store 2 * grad_Sigma) and leaves the
/// mean gradient untouched. A variational step with the corrected
/// estimate therefore blends precisions, P <- (1-beta) P + beta
/// E[hess f], whose fixed point is the posterior of the conjugate case.
template <typename Scalar>
class ViObjective final : public Objective<Scalar> {
 public:
  explicit ViObjective(std::shared_ptr<const Objective<Scalar>> neg_log_joint)
      : inner_(std::move(neg_log_joint)) {
    if (!inner_) throw BadParams("vi: null objective");
    if (!inner_->has(Capability::Grad))
      throw CapabilityMissing("vi: wrapped objective must provide a gradient");
  }

  Index dim() const override { return inner_->dim(); }
  unsigned capabilities() const override {
    return inner_->capabilities() | Capability::VariationalCorrection;
  }

  Scalar value(const Vector<Scalar>& theta) const override { return inner_->value(theta); }
  Vector<Scalar> gradient(const Vector<Scalar>& theta) const override {
    return inner_->gradient(theta);
  }
  Matrix<Scalar> hessian(const Vector<Scalar>& theta) const override {
    return inner_->hessian(theta);
  }
  Vector<Scalar> hessian_diag(const Vector<Scalar>& theta) const override {
    return inner_->hessian_diag(theta);
  }

  Scalar expectation(const GaussianState<Scalar>& q) const override {
    return inner_->expectation(q);
  }
  Vector<Scalar> expectation_grad_mean(const GaussianState<Scalar>& q) const override {
    return inner_->expectation_grad_mean(q);
  }
  Matrix<Scalar> expectation_grad_cov(const GaussianState<Scalar>& q) const override {
    return inner_->expectation_grad_cov(q);
  }

  const Matrix<Scalar>& glm_features() const override { return inner_->glm_features(); }
  Scalar glm_link(int order, Scalar z, Index example) const override {
    return inner_->glm_link(order, z, example);
  }
  Scalar glm_scale() const override { return inner_->glm_scale(); }
  Scalar glm_reg_expect_value(const GaussianState<Scalar>& q) const override {
    return inner_->glm_reg_expect_value(q);
  }
  Vector<Scalar> glm_reg_expect_grad(const GaussianState<Scalar>& q) const override {
    return inner_->glm_reg_expect_grad(q);
  }
  Matrix<Scalar> glm_reg_expect_hess(const GaussianState<Scalar>& q) const override {
    return inner_->glm_reg_expect_hess(q);
  }

  Index num_examples() const override { return inner_->num_examples(); }
  std::shared_ptr<const Objective<Scalar>> minibatch(
      std::span<const Index> examples) const override {
    return std::make_shared<ViObjective<Scalar>>(inner_->minibatch(examples));
  }

  void correct_expectation(ExpectationEstimate<Scalar>& est,
                           const GaussianState<Scalar>& q) const override {
    if (est.has_full_hess()) est.avg_hess -= q.precision();
    if (est.has_hess_diag()) est.hess_diag -= q.precisions();
    est.avg_value -= entropy(q);
  }

  const Objective<Scalar>& neg_log_joint() const { return *inner_; }

 private:
  std::shared_ptr<const Objective<Scalar>> inner_;
};

template <typename Scalar>
std::shared_ptr<const Objective<Scalar>> make_vi_objective(
    std::shared_ptr<const Objective<Scalar>> neg_log_joint) {
  return std::make_shared<ViObjective<Scalar>>(std::move(neg_log_joint));
}

}  // namespace van
