#pragma once

#include <cmath>
#include <memory>

#include "van/objective.hpp"

namespace van {

namespace detail {

// Normalized sinc kernel sin(pi x) / (pi x) and its first two
// derivatives. Below |pi x| = 1e-4 the Taylor forms are exact to
// machine precision and avoid the 0/0 at the origin.
template <typename Scalar>
Scalar sinc_value(Scalar x) {
  const Scalar u = static_cast<Scalar>(M_PI) * x;
  if (std::abs(u) < Scalar(1e-4)) {
    const Scalar u2 = u * u;
    return Scalar(1) - u2 / Scalar(6) + u2 * u2 / Scalar(120);
  }
  return std::sin(u) / u;
}

template <typename Scalar>
Scalar sinc_grad(Scalar x) {
  const Scalar pi = static_cast<Scalar>(M_PI);
  const Scalar u = pi * x;
  if (std::abs(u) < Scalar(1e-4)) {
    return pi * (-u / Scalar(3) + u * u * u / Scalar(30));
  }
  return pi * (u * std::cos(u) - std::sin(u)) / (u * u);
}

template <typename Scalar>
Scalar sinc_hess(Scalar x) {
  const Scalar pi = static_cast<Scalar>(M_PI);
  const Scalar u = pi * x;
  if (std::abs(u) < Scalar(1e-4)) {
    return pi * pi * (Scalar(-1) / Scalar(3) + u * u / Scalar(10));
  }
  const Scalar s = std::sin(u), c = std::cos(u);
  return pi * pi *
         (-s / u - Scalar(2) * c / (u * u) + Scalar(2) * s / (u * u * u));
}

}  // namespace detail

/// Normalized sinc in one dimension: f(theta) = sin(pi theta) / (pi
/// theta) with f(0) = 1. The global minima sit at the first negative
/// lobe (theta about +-1.43); shallower local minima follow further
/// out. The ripples make it a good stress test for the smoothed
/// estimators.
template <typename Scalar>
class SincObjective final : public Objective<Scalar> {
 public:
  Index dim() const override { return 1; }
  unsigned capabilities() const override {
    return Capability::Value | Capability::Grad | Capability::Hess | Capability::HessDiag;
  }

  Scalar value(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    return detail::sinc_value(theta[0]);
  }

  Vector<Scalar> gradient(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    Vector<Scalar> g(1);
    g[0] = detail::sinc_grad(theta[0]);
    return g;
  }

  Matrix<Scalar> hessian(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    Matrix<Scalar> h(1, 1);
    h(0, 0) = detail::sinc_hess(theta[0]);
    return h;
  }

  Vector<Scalar> hessian_diag(const Vector<Scalar>& theta) const override {
    return hessian(theta).diagonal();
  }
};

/// The escape demonstration variant: f(theta) = -sinc(theta - 1), a
/// deep global well (f = -1 at theta = 1) surrounded by shallow
/// ripples. Gradient-following point methods started at theta = -3.2
/// stop in the local minimum near -3.48 (depth only -0.07), while a
/// distribution with enough initial spread sees past the ripples and
/// the smoothed landscape pulls its mean into the central well. The
/// plain SincObjective has no comparable funnel: under Gaussian
/// smoothing its central bump pushes the mean outward, so it cannot
/// stage this demonstration.
template <typename Scalar>
class SincEscapeObjective final : public Objective<Scalar> {
 public:
  Index dim() const override { return 1; }
  unsigned capabilities() const override {
    return Capability::Value | Capability::Grad | Capability::Hess | Capability::HessDiag;
  }

  Scalar value(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    return -detail::sinc_value(theta[0] - Scalar(1));
  }

  Vector<Scalar> gradient(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    Vector<Scalar> g(1);
    g[0] = -detail::sinc_grad(theta[0] - Scalar(1));
    return g;
  }

  Matrix<Scalar> hessian(const Vector<Scalar>& theta) const override {
    this->check_theta(theta);
    Matrix<Scalar> h(1, 1);
    h(0, 0) = -detail::sinc_hess(theta[0] - Scalar(1));
    return h;
  }

  Vector<Scalar> hessian_diag(const Vector<Scalar>& theta) const override {
    return hessian(theta).diagonal();
  }
};

template <typename Scalar = double>
std::shared_ptr<const Objective<Scalar>> make_sinc() {
  return std::make_shared<SincObjective<Scalar>>();
}

template <typename Scalar = double>
std::shared_ptr<const Objective<Scalar>> make_sinc_escape() {
  return std::make_shared<SincEscapeObjective<Scalar>>();
}

}  // namespace van
