#pragma once

#include <cmath>
#include <memory>
#include <utility>

#include "van/data.hpp"
#include "van/objective.hpp"

namespace van {

/// Lasso regression: f(theta) = sum_i (y_i - theta.x_i)^2 + lambda *
/// sum_d |theta_d|. The data term is a plain sum (not a mean); a
/// minibatch view rescales it by N/M so its expectation matches the
/// full sum. Pointwise derivatives exist only where every theta_d is
/// nonzero (flagged NonSmooth); the expectation engine is smooth
/// everywhere and uses the closed-form E|theta_d| for Gaussian
/// marginals:
///   E|t| = mu erf(mu / (sigma sqrt 2)) + sigma sqrt(2/pi) e^{-mu^2 / (2 sigma^2)}
///   d/d mu = erf(mu / (sigma sqrt 2)),  d/d sigma^2 = pdf(0; mu, sigma^2).
template <typename Scalar>
class LassoObjective final : public Objective<Scalar> {
 public:
  LassoObjective(Matrix<Scalar> features, Vector<Scalar> targets, Scalar reg_strength,
                 Scalar data_scale = Scalar(1))
      : x_(std::move(features)),
        y_(std::move(targets)),
        reg_(reg_strength),
        scale_(data_scale) {
    if (x_.rows() != y_.size()) throw DimensionMismatch("lasso: row count mismatch");
    if (x_.rows() < 1) throw DimensionMismatch("lasso: empty dataset");
    if (reg_ < Scalar(0)) throw NegativeRegularization("lasso: negative reg_strength");
    xtx_ = x_.transpose() * x_;
    xty_ = x_.transpose() * y_;
    yty_ = y_.squaredNorm();
  }

  Index dim() const override { return x_.cols(); }
  unsigned capabilities() const override {
    return Capability::Value | Capability::Grad | Capability::Hess | Capability::HessDiag |
           Capability::ExactExpectation | Capability::Minibatch | Capability::NonSmooth;
  }

  Scalar value(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    return scale_ * (yty_ - Scalar(2) * theta.dot(xty_) + theta.dot(xtx_ * theta)) +
           reg_ * theta.template lpNorm<1>();
  }

  Vector<Scalar> gradient(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    check_smooth_point(theta);
    Vector<Scalar> g = scale_ * Scalar(2) * (xtx_ * theta - xty_);
    for (Index d = 0; d < theta.size(); ++d)
      g[d] += reg_ * (theta[d] > Scalar(0) ? Scalar(1) : Scalar(-1));
    return g;
  }

  Matrix<Scalar> hessian(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    check_smooth_point(theta);
    return scale_ * Scalar(2) * xtx_;
  }

  Vector<Scalar> hessian_diag(const Vector<Scalar>& theta) const override {
    return hessian(theta).diagonal();
  }

  Scalar expectation(const GaussianState<Scalar>& q) const override {
    const Vector<Scalar> sigma2 = marginals(q);
    const Vector<Scalar>& mu = q.mean();
    Scalar data = yty_ - Scalar(2) * mu.dot(xty_) + mu.dot(xtx_ * mu);
    data += (xtx_ * q.cov()).trace();
    Scalar reg_part = Scalar(0);
    for (Index d = 0; d < dim(); ++d) {
      const Scalar sd = std::sqrt(sigma2[d]);
      reg_part += mu[d] * std::erf(mu[d] / (sd * sqrt2())) +
                  sd * std::sqrt(Scalar(2) / static_cast<Scalar>(M_PI)) *
                      std::exp(-mu[d] * mu[d] / (Scalar(2) * sigma2[d]));
    }
    return scale_ * data + reg_ * reg_part;
  }

  Vector<Scalar> expectation_grad_mean(const GaussianState<Scalar>& q) const override {
    const Vector<Scalar> sigma2 = marginals(q);
    const Vector<Scalar>& mu = q.mean();
    Vector<Scalar> g = scale_ * Scalar(2) * (xtx_ * mu - xty_);
    for (Index d = 0; d < dim(); ++d)
      g[d] += reg_ * std::erf(mu[d] / (std::sqrt(sigma2[d]) * sqrt2()));
    return g;
  }

  Matrix<Scalar> expectation_grad_cov(const GaussianState<Scalar>& q) const override {
    const Vector<Scalar> sigma2 = marginals(q);
    const Vector<Scalar>& mu = q.mean();
    Matrix<Scalar> g = scale_ * xtx_;
    for (Index d = 0; d < dim(); ++d)
      g(d, d) += reg_ * gaussian_pdf_at_zero(mu[d], sigma2[d]);
    return g;
  }

  Index num_examples() const override { return x_.rows(); }

  std::shared_ptr<const Objective<Scalar>> minibatch(
      std::span<const Index> examples) const override {
    if (examples.empty()) throw EmptySplit("lasso minibatch: no examples");
    Matrix<Scalar> xb(static_cast<Index>(examples.size()), dim());
    Vector<Scalar> yb(static_cast<Index>(examples.size()));
    for (Index r = 0; r < xb.rows(); ++r) {
      const Index src = examples[static_cast<std::size_t>(r)];
      if (src < 0 || src >= num_examples()) throw OutOfRange("lasso minibatch: bad index");
      xb.row(r) = x_.row(src);
      yb[r] = y_[src];
    }
    const Scalar view_scale =
        scale_ * static_cast<Scalar>(num_examples()) / static_cast<Scalar>(examples.size());
    return std::make_shared<LassoObjective<Scalar>>(std::move(xb), std::move(yb), reg_,
                                                    view_scale);
  }

  const Matrix<Scalar>& features() const { return x_; }
  const Vector<Scalar>& targets() const { return y_; }
  Scalar reg_strength() const { return reg_; }
  Scalar data_scale() const { return scale_; }

 private:
  void check_smooth_point(const Vector<Scalar>& theta) const {
    for (Index d = 0; d < theta.size(); ++d)
      if (theta[d] == Scalar(0))
        throw OutOfRange("lasso derivatives undefined where theta_d = 0");
  }

  Vector<Scalar> marginals(const GaussianState<Scalar>& q) const {
    if (q.dim() != dim()) throw DimensionMismatch("lasso: state dimension mismatch");
    Vector<Scalar> sigma2 = q.variances();
    for (Index d = 0; d < sigma2.size(); ++d)
      if (!(sigma2[d] >= Scalar(kMinVariance)))
        throw DegenerateVariance("lasso engine: marginal variance below floor");
    return sigma2;
  }

  static Scalar gaussian_pdf_at_zero(Scalar mu, Scalar sigma2) {
    return std::exp(-mu * mu / (Scalar(2) * sigma2)) /
           std::sqrt(Scalar(2) * static_cast<Scalar>(M_PI) * sigma2);
  }

  static Scalar sqrt2() { return std::sqrt(Scalar(2)); }

  Matrix<Scalar> x_;
  Vector<Scalar> y_;
  Scalar reg_;
  Scalar scale_;
  Matrix<Scalar> xtx_;
  Vector<Scalar> xty_;
  Scalar yty_;
};

template <typename Scalar>
std::shared_ptr<const Objective<Scalar>> make_lasso(const Dataset<Scalar>& data,
                                                    Scalar reg_strength) {
  return std::make_shared<LassoObjective<Scalar>>(data.features, data.labels, reg_strength);
}

}  // namespace van
