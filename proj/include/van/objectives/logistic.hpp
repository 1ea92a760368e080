#pragma once

#include <cmath>
#include <memory>
#include <utility>

#include "van/data.hpp"
#include "van/objective.hpp"

namespace van {

namespace detail {

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// log(1 + e^{-yz}) evaluated without overflow for either sign.
template <typename Scalar>
Scalar log1p_exp_neg(Scalar yz) {
  if (yz >= Scalar(0)) return std::log1p(std::exp(-yz));
  return -yz + std::log1p(std::exp(yz));
}

}  // namespace detail

/// L2-regularized logistic loss over labels y_i in {-1,+1}:
///   f(theta) = sum_i log(1 + e^{-y_i theta.x_i}) + lambda * |theta|^2.
/// Data term is a sum; minibatch views rescale by N/M. Each example
/// touches theta only through z_i = theta.x_i, which the per-example
/// link structure exposes for quadrature estimators.
template <typename Scalar>
class LogisticObjective final : public Objective<Scalar> {
 public:
  LogisticObjective(Matrix<Scalar> features, Vector<Scalar> labels, Scalar reg_strength,
                    Scalar data_scale = Scalar(1))
      : x_(std::move(features)), y_(std::move(labels)), reg_(reg_strength), scale_(data_scale) {
    if (x_.rows() != y_.size()) throw DimensionMismatch("logistic: row count mismatch");
    if (x_.rows() < 1) throw DimensionMismatch("logistic: empty dataset");
    if (reg_ < Scalar(0)) throw NegativeRegularization("logistic: negative reg_strength");
    for (Index i = 0; i < y_.size(); ++i)
      if (y_[i] != Scalar(1) && y_[i] != Scalar(-1))
        throw BadLabels("logistic: labels must be +1 or -1");
  }

  Index dim() const override { return x_.cols(); }
  unsigned capabilities() const override {
    return Capability::Value | Capability::Grad | Capability::Hess | Capability::HessDiag |
           Capability::GlmStructure | Capability::Minibatch;
  }

  Scalar value(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    const Vector<Scalar> z = x_ * theta;
    Scalar acc = Scalar(0);
    for (Index i = 0; i < z.size(); ++i) acc += detail::log1p_exp_neg(y_[i] * z[i]);
    return scale_ * acc + reg_ * theta.squaredNorm();
  }

  Vector<Scalar> gradient(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    const Vector<Scalar> z = x_ * theta;
    Vector<Scalar> coeff(z.size());
    for (Index i = 0; i < z.size(); ++i)
      coeff[i] = -y_[i] * detail::sigmoid(-y_[i] * z[i]);
    return scale_ * (x_.transpose() * coeff) + Scalar(2) * reg_ * theta;
  }

  Matrix<Scalar> hessian(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    const Vector<Scalar> z = x_ * theta;
    Vector<Scalar> w(z.size());
    for (Index i = 0; i < z.size(); ++i) {
      const Scalar s = detail::sigmoid(z[i]);
      w[i] = s * (Scalar(1) - s);
    }
    Matrix<Scalar> h = scale_ * (x_.transpose() * w.asDiagonal() * x_);
    h.diagonal().array() += Scalar(2) * reg_;
    return symmetrized(h);
  }

  Vector<Scalar> hessian_diag(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    const Vector<Scalar> z = x_ * theta;
    Vector<Scalar> diag = Vector<Scalar>::Constant(dim(), Scalar(2) * reg_);
    for (Index i = 0; i < z.size(); ++i) {
      const Scalar s = detail::sigmoid(z[i]);
      diag += scale_ * s * (Scalar(1) - s) * x_.row(i).transpose().cwiseAbs2();
    }
    return diag;
  }

  const Matrix<Scalar>& glm_features() const override { return x_; }

  Scalar glm_link(int order, Scalar z, Index example) const override {
    const Scalar y = y_[example];
    switch (order) {
      case 0:
        return detail::log1p_exp_neg(y * z);
      case 1:
        return -y * detail::sigmoid(-y * z);
      case 2: {
        const Scalar s = detail::sigmoid(z);
        return s * (Scalar(1) - s);
      }
      default:
        throw BadParams("logistic link: order must be 0, 1, or 2");
    }
  }

  Scalar glm_scale() const override { return scale_; }

  Scalar glm_reg_expect_value(const GaussianState<Scalar>& q) const override {
    return reg_ * (q.mean().squaredNorm() + q.cov().trace());
  }
  Vector<Scalar> glm_reg_expect_grad(const GaussianState<Scalar>& q) const override {
    return Scalar(2) * reg_ * q.mean();
  }
  Matrix<Scalar> glm_reg_expect_hess(const GaussianState<Scalar>& q) const override {
    return Scalar(2) * reg_ * Matrix<Scalar>::Identity(dim(), dim());
  }

  Index num_examples() const override { return x_.rows(); }

  std::shared_ptr<const Objective<Scalar>> minibatch(
      std::span<const Index> examples) const override {
    if (examples.empty()) throw EmptySplit("logistic minibatch: no examples");
    Matrix<Scalar> xb(static_cast<Index>(examples.size()), dim());
    Vector<Scalar> yb(static_cast<Index>(examples.size()));
    for (Index r = 0; r < xb.rows(); ++r) {
      const Index src = examples[static_cast<std::size_t>(r)];
      if (src < 0 || src >= num_examples())
        throw OutOfRange("logistic minibatch: bad index");
      xb.row(r) = x_.row(src);
      yb[r] = y_[src];
    }
    const Scalar view_scale =
        scale_ * static_cast<Scalar>(num_examples()) / static_cast<Scalar>(examples.size());
    return std::make_shared<LogisticObjective<Scalar>>(std::move(xb), std::move(yb), reg_,
                                                       view_scale);
  }

  const Matrix<Scalar>& features() const { return x_; }
  const Vector<Scalar>& labels() const { return y_; }
  Scalar reg_strength() const { return reg_; }

 private:
  Matrix<Scalar> x_;
  Vector<Scalar> y_;
  Scalar reg_;
  Scalar scale_;
};

template <typename Scalar>
std::shared_ptr<const Objective<Scalar>> make_logistic(const Dataset<Scalar>& data,
                                                       Scalar reg_strength) {
  return std::make_shared<LogisticObjective<Scalar>>(data.features, data.labels,
                                                     reg_strength);
}

/// Mean per-example log loss of the point estimate theta,
/// (1/N) sum_i log(1 + e^{-y_i theta.x_i}). No regularizer.
template <typename Scalar>
Scalar test_log_loss(const Vector<Scalar>& theta, const Matrix<Scalar>& x,
                     const Vector<Scalar>& y) {
  if (x.cols() != theta.size()) throw DimensionMismatch("test_log_loss: dimension mismatch");
  if (x.rows() != y.size() || x.rows() < 1)
    throw DimensionMismatch("test_log_loss: empty or mismatched evaluation set");
  const Vector<Scalar> z = x * theta;
  Scalar acc = Scalar(0);
  for (Index i = 0; i < z.size(); ++i) acc += detail::log1p_exp_neg(y[i] * z[i]);
  return acc / static_cast<Scalar>(z.size());
}

/// The same loss restricted to one named split of a dataset.
template <typename Scalar>
Scalar test_log_loss(const Vector<Scalar>& theta, const Dataset<Scalar>& data,
                     const std::string& split_name) {
  return test_log_loss<Scalar>(theta, data.features_of(split_name), data.labels_of(split_name));
}

}  // namespace van
