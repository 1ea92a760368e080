#pragma once

#include <memory>
#include <span>
#include <string>

#include "van/errors.hpp"
#include "van/estimate.hpp"
#include "van/gaussian.hpp"
#include "van/types.hpp"

namespace van {

/// What an objective can do; estimators and optimizers dispatch on
/// these flags instead of downcasting.
enum class Capability : unsigned {
  Value = 1u << 0,
  Grad = 1u << 1,
  Hess = 1u << 2,
  HessDiag = 1u << 3,
  ExactExpectation = 1u << 4,
  GlmStructure = 1u << 5,
  Minibatch = 1u << 6,
  NonSmooth = 1u << 7,
  VariationalCorrection = 1u << 8,
};

constexpr unsigned operator|(Capability a, Capability b) {
  return static_cast<unsigned>(a) | static_cast<unsigned>(b);
}
constexpr unsigned operator|(unsigned a, Capability b) {
  return a | static_cast<unsigned>(b);
}

/// A target function f(theta) with whatever derivative, expectation,
/// and structure hooks it supports. Declared capabilities are the
/// contract: every flagged operation works, every unflagged one throws
/// CapabilityMissing. Objectives are immutable after construction and
/// all evaluation is const and thread-safe.
template <typename Scalar>
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Index dim() const = 0;
  virtual unsigned capabilities() const = 0;
  bool has(Capability c) const { return (capabilities() & static_cast<unsigned>(c)) != 0; }

  virtual Scalar value(const Vector<Scalar>& theta) const = 0;

  virtual Vector<Scalar> gradient(const Vector<Scalar>& theta) const {
    (void)theta;
    throw CapabilityMissing("objective has no gradient");
  }
  virtual Matrix<Scalar> hessian(const Vector<Scalar>& theta) const {
    (void)theta;
    throw CapabilityMissing("objective has no Hessian");
  }
  virtual Vector<Scalar> hessian_diag(const Vector<Scalar>& theta) const {
    (void)theta;
    throw CapabilityMissing("objective has no Hessian diagonal");
  }

  // --- Closed-form expectation engine (capability ExactExpectation) ---
  /// E_q[f].
  virtual Scalar expectation(const GaussianState<Scalar>& q) const {
    (void)q;
    throw CapabilityMissing("objective has no exact expectation engine");
  }
  /// d/d mu E_q[f].
  virtual Vector<Scalar> expectation_grad_mean(const GaussianState<Scalar>& q) const {
    (void)q;
    throw CapabilityMissing("objective has no exact expectation engine");
  }
  /// d/d Sigma E_q[f], symmetric convention (equals half the averaged
  /// Hessian for Gaussian q).
  virtual Matrix<Scalar> expectation_grad_cov(const GaussianState<Scalar>& q) const {
    (void)q;
    throw CapabilityMissing("objective has no exact expectation engine");
  }

  // --- Per-example scalar-link structure (capability GlmStructure) ---
  // f(theta) = glm_scale * sum_i link0(x_i . theta, i) + regularizer.
  virtual const Matrix<Scalar>& glm_features() const {
    throw CapabilityMissing("objective has no per-example link structure");
  }
  /// Derivative of the per-example link of the given order (0, 1, 2)
  /// with respect to its scalar argument.
  virtual Scalar glm_link(int order, Scalar z, Index example) const {
    (void)order;
    (void)z;
    (void)example;
    throw CapabilityMissing("objective has no per-example link structure");
  }
  /// Factor the data term is rescaled by (N over M for minibatches).
  virtual Scalar glm_scale() const { return Scalar(1); }
  virtual Scalar glm_reg_expect_value(const GaussianState<Scalar>& q) const {
    (void)q;
    return Scalar(0);
  }
  virtual Vector<Scalar> glm_reg_expect_grad(const GaussianState<Scalar>& q) const {
    (void)q;
    return Vector<Scalar>::Zero(dim());
  }
  virtual Matrix<Scalar> glm_reg_expect_hess(const GaussianState<Scalar>& q) const {
    (void)q;
    return Matrix<Scalar>::Zero(dim(), dim());
  }

  // --- Data subsetting (capability Minibatch) ---
  virtual Index num_examples() const { return 0; }
  /// View of the objective restricted to the given example rows, with
  /// the data term rescaled to stay unbiased for the full sum.
  virtual std::shared_ptr<const Objective<Scalar>> minibatch(
      std::span<const Index> examples) const {
    (void)examples;
    throw CapabilityMissing("objective cannot form minibatches");
  }

  // --- Variational-objective hook (capability VariationalCorrection) ---
  /// Folds any distribution-dependent terms (entropy gradients) into an
  /// estimate that was computed for the plain expectation part.
  virtual void correct_expectation(ExpectationEstimate<Scalar>& est,
                                   const GaussianState<Scalar>& q) const {
    (void)est;
    (void)q;
  }

 protected:
  void check_theta(const Vector<Scalar>& theta) const {
    if (theta.size() != dim()) throw DimensionMismatch("theta dimension mismatch");
    if (!theta.allFinite()) throw NonFiniteValue("theta has non-finite entries");
  }
};

}  // namespace van
