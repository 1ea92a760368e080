#pragma once

#include <memory>
#include <utility>

#include "van/objective.hpp"

namespace van {

/// f(theta) = 1/2 (theta - a)^T A (theta - a) with A symmetric
/// positive-definite. The expectation engine is closed form:
/// E_q[f] = f(mu) + 1/2 tr(A Sigma).
template <typename Scalar>
class QuadraticObjective final : public Objective<Scalar> {
 public:
  QuadraticObjective(Matrix<Scalar> curvature, Vector<Scalar> minimizer)
      : curvature_(std::move(curvature)), minimizer_(std::move(minimizer)) {
    if (curvature_.rows() != minimizer_.size() || curvature_.cols() != minimizer_.size())
      throw DimensionMismatch("quadratic: curvature shape does not match minimizer");
    if (!is_symmetric(curvature_)) throw BadParams("quadratic: curvature not symmetric");
    const Eigen::LLT<Matrix<Scalar>> llt(curvature_);
    if (llt.info() != Eigen::Success)
      throw NotPositiveDefinite("quadratic: curvature not positive-definite");
  }

  Index dim() const override { return minimizer_.size(); }
  unsigned capabilities() const override {
    return Capability::Value | Capability::Grad | Capability::Hess | Capability::HessDiag |
           Capability::ExactExpectation;
  }

  Scalar value(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    const Vector<Scalar> delta = theta - minimizer_;
    return delta.dot(curvature_ * delta) / Scalar(2);
  }

  Vector<Scalar> gradient(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    return curvature_ * (theta - minimizer_);
  }

  Matrix<Scalar> hessian(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    return curvature_;
  }

  Vector<Scalar> hessian_diag(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    return curvature_.diagonal();
  }

  Scalar expectation(const GaussianState<Scalar>& q) const override {
    check_q(q);
    const Vector<Scalar> delta = q.mean() - minimizer_;
    return delta.dot(curvature_ * delta) / Scalar(2) +
           (curvature_ * q.cov()).trace() / Scalar(2);
  }

  Vector<Scalar> expectation_grad_mean(const GaussianState<Scalar>& q) const override {
    check_q(q);
    return curvature_ * (q.mean() - minimizer_);
  }

  Matrix<Scalar> expectation_grad_cov(const GaussianState<Scalar>& q) const override {
    check_q(q);
    return curvature_ / Scalar(2);
  }

  const Matrix<Scalar>& curvature() const { return curvature_; }
  const Vector<Scalar>& minimizer() const { return minimizer_; }

 private:
  void check_q(const GaussianState<Scalar>& q) const {
    if (q.dim() != dim()) throw DimensionMismatch("quadratic: state dimension mismatch");
  }

  Matrix<Scalar> curvature_;
  Vector<Scalar> minimizer_;
};

template <typename Scalar>
std::shared_ptr<const Objective<Scalar>> make_quadratic(Matrix<Scalar> curvature,
                                                        Vector<Scalar> minimizer) {
  return std::make_shared<QuadraticObjective<Scalar>>(std::move(curvature),
                                                      std::move(minimizer));
}

}  // namespace van
