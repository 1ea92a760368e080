#pragma once

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "van/errors.hpp"
#include "van/types.hpp"

namespace van {

/// Gauss-Hermite nodes and weights for the weight function e^{-x^2}.
template <typename Scalar>
struct QuadratureRule {
  Vector<Scalar> nodes;
  Vector<Scalar> weights;
  Index order() const { return nodes.size(); }
};

/// Physicists' Gauss-Hermite rule by the Golub-Welsch method: nodes are
/// the eigenvalues of the symmetric tridiagonal Jacobi matrix with
/// off-diagonals sqrt(k/2), weights come from the first component of
/// each normalized eigenvector scaled by the zeroth moment sqrt(pi).
template <typename Scalar = double>
QuadratureRule<Scalar> gauss_hermite_rule(Index order) {
  if (order < 1) throw BadParams("gauss_hermite_rule: order must be positive");

  Matrix<Scalar> jacobi = Matrix<Scalar>::Zero(order, order);
  for (Index k = 1; k < order; ++k) {
    const Scalar off = std::sqrt(static_cast<Scalar>(k) / Scalar(2));
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  const Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(jacobi);
  if (solver.info() != Eigen::Success)
    throw FactorizationFailure("gauss_hermite_rule: eigensolver failed");

  QuadratureRule<Scalar> rule;
  rule.nodes = solver.eigenvalues();
  rule.weights.resize(order);
  const Scalar sqrt_pi = std::sqrt(static_cast<Scalar>(M_PI));
  for (Index i = 0; i < order; ++i) {
    const Scalar first = solver.eigenvectors()(0, i);
    rule.weights[i] = sqrt_pi * first * first;
  }
  return rule;
}

/// E[g(z)] for z ~ N(mean, var) via the substitution z = mean +
/// sqrt(2 var) x against the Hermite weight.
template <typename Scalar, typename F>
Scalar gauss_expect(const QuadratureRule<Scalar>& rule, Scalar mean, Scalar var, F&& g) {
  if (!(var >= Scalar(0))) throw DegenerateVariance("gauss_expect: negative variance");
  const Scalar spread = std::sqrt(Scalar(2) * var);
  const Scalar inv_sqrt_pi = Scalar(1) / std::sqrt(static_cast<Scalar>(M_PI));
  Scalar acc = Scalar(0);
  for (Index i = 0; i < rule.order(); ++i)
    acc += rule.weights[i] * g(mean + spread * rule.nodes[i]);
  return acc * inv_sqrt_pi;
}

}  // namespace van
