#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <van/objectives/lasso.hpp>
#include <van/objectives/logistic.hpp>
#include <van/objectives/quadratic.hpp>
#include <van/objectives/sinc.hpp>
#include <van/objectives/vi.hpp>
#include <van/quadrature.hpp>

#include "oracles.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

using van::Capability;
using van::GaussianState;
using van::LassoObjective;
using van::LogisticObjective;
using van::Objective;
using van::QuadraticObjective;
using van::SincEscapeObjective;
using van::SincObjective;
using van::ViObjective;

namespace {

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// E_q[g] for a 2-D Gaussian with full covariance by tensor-product
// Gauss-Hermite: exact for polynomial integrands of degree < 2n - 1
// per axis, independent of the expectation engines under test.
template <typename F>
double tensor_gh_expect_2d(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, F&& g,
                           int order = 24) {
  const auto rule = van::gauss_hermite_rule<double>(order);
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
  const double sqrt2 = std::sqrt(2.0);
  double acc = 0.0;
  for (int j = 0; j < order; ++j) {
    for (int k = 0; k < order; ++k) {
      Eigen::VectorXd z(2);
      z << sqrt2 * rule.nodes[j], sqrt2 * rule.nodes[k];
      acc += rule.weights[j] * rule.weights[k] * g(Eigen::VectorXd(mu + chol * z));
    }
  }
  return acc / std::numbers::pi;
}

// Central finite difference of an expectation engine in one mean
// coordinate, holding the covariance fixed.
template <typename Scalar>
double fd_engine_mean(const Objective<Scalar>& obj, const Eigen::VectorXd& mu,
                      const Eigen::MatrixXd& cov, int d, double h = 1e-6) {
  Eigen::VectorXd up = mu, dn = mu;
  up[d] += h;
  dn[d] -= h;
  return (obj.expectation(GaussianState<double>::from_cov(up, cov)) -
          obj.expectation(GaussianState<double>::from_cov(dn, cov))) /
         (2.0 * h);
}

// Central finite difference along the symmetric direction E_ij + E_ji;
// halving recovers the per-entry Sigma-gradient for both i == j and
// i != j (the direction doubles the diagonal perturbation).
template <typename Scalar>
double fd_engine_cov(const Objective<Scalar>& obj, const Eigen::VectorXd& mu,
                     const Eigen::MatrixXd& cov, int i, int j, double h = 1e-6) {
  Eigen::MatrixXd up = cov, dn = cov;
  up(i, j) += h;
  up(j, i) += h;
  dn(i, j) -= h;
  dn(j, i) -= h;
  return (obj.expectation(GaussianState<double>::from_cov(mu, up)) -
          obj.expectation(GaussianState<double>::from_cov(mu, dn))) /
         (4.0 * h);
}

}  // namespace

// ---------------------------------------------------------------------------
// sinc

TEST_CASE("sinc matches its defining values") {
  const SincObjective<double> f;
  CHECK(f.dim() == 1);
  CHECK(f.value(vec1(0.0)) == 1.0);
  // sin(pi/2) / (pi/2) = 2/pi.
  CHECK(f.value(vec1(0.5)) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-14));
  // First negative lobe: sin(3 pi / 2) / (3 pi / 2) = -2 / (3 pi).
  CHECK(f.value(vec1(1.5)) ==
        doctest::Approx(-2.0 / (3.0 * std::numbers::pi)).epsilon(1e-14));
  CHECK(f.value(vec1(-1.5)) == f.value(vec1(1.5)));  // even function
}

TEST_CASE("sinc global minimum sits on the first negative lobe") {
  const SincObjective<double> f;
  const auto scalar_f = [&](double t) { return f.value(vec1(t)); };
  const auto [argmin, fmin] = oracle::grid_min(scalar_f, 0.5, 2.5);
  // The minimizer solves tan(u) = u at u = pi * theta; at the root,
  // f = cos(u). Independent grid + golden refinement pins it down.
  CHECK(argmin == doctest::Approx(1.4302966531).epsilon(1e-8));
  CHECK(fmin == doctest::Approx(-0.2172336282).epsilon(1e-8));
  CHECK(std::abs(f.gradient(vec1(argmin))[0]) < 1e-8);
  CHECK(f.hessian(vec1(argmin))(0, 0) > 0.0);

  // Both lobes are global minima of the even function.
  const auto mins = oracle::grid_global_minimizers(scalar_f, -2.5, 2.5);
  REQUIRE(mins.size() == 2);
  CHECK(mins[0].x == doctest::Approx(-argmin).epsilon(1e-8));
  CHECK(mins[1].x == doctest::Approx(argmin).epsilon(1e-8));
}

TEST_CASE("sinc derivatives agree with finite differences") {
  const SincObjective<double> f;
  CHECK(f.gradient(vec1(0.0))[0] == 0.0);
  // f(theta) = 1 - (pi theta)^2/6 + ... so f''(0) = -pi^2/3.
  CHECK(f.hessian(vec1(0.0))(0, 0) ==
        doctest::Approx(-std::numbers::pi * std::numbers::pi / 3.0).epsilon(1e-12));

  const auto scalar_f = [&](const Eigen::VectorXd& t) { return f.value(t); };
  for (const double t : {0.3, 0.9, 1.4303, 2.2, -0.6, 4.7}) {
    const Eigen::VectorXd g_fd = oracle::fd_gradient(scalar_f, vec1(t));
    const Eigen::MatrixXd h_fd = oracle::fd_hessian(scalar_f, vec1(t));
    CHECK(f.gradient(vec1(t))[0] == doctest::Approx(g_fd[0]).epsilon(1e-6));
    CHECK(f.hessian(vec1(t))(0, 0) == doctest::Approx(h_fd(0, 0)).epsilon(1e-4));
    CHECK(f.hessian_diag(vec1(t))[0] == f.hessian(vec1(t))(0, 0));
  }
}

TEST_CASE("sinc series and closed forms agree across the switchover") {
  const SincObjective<double> f;
  const double boundary = 1e-4 / std::numbers::pi;
  for (const double s : {0.999, 1.001}) {
    const double t = s * boundary;
    // Both branches are exact to machine precision this close to zero,
    // so crossing the threshold must not produce a visible jump.
    const double u = std::numbers::pi * t;
    CHECK(f.value(vec1(t)) == doctest::Approx(std::sin(u) / u).epsilon(1e-15));
    CHECK(f.gradient(vec1(t))[0] ==
          doctest::Approx(std::numbers::pi * (u * std::cos(u) - std::sin(u)) / (u * u))
              .epsilon(1e-10));
  }
}

TEST_CASE("sinc rejects bad input and instantiates for float") {
  const SincObjective<double> f;
  CHECK_THROWS_AS((void)f.value(Eigen::VectorXd::Zero(2)), van::DimensionMismatch);
  CHECK_THROWS_AS((void)f.value(vec1(std::nan(""))), van::NonFiniteValue);

  const SincObjective<float> ff;
  Eigen::VectorXf t(1);
  t << 0.5f;
  CHECK(ff.value(t) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-6));
}

TEST_CASE("sinc escape variant is a shifted negated sinc") {
  const SincEscapeObjective<double> f;
  const SincObjective<double> base;
  CHECK(f.dim() == 1);
  CHECK(f.value(vec1(1.0)) == -1.0);
  CHECK(f.gradient(vec1(1.0))[0] == 0.0);
  // Well-bottom curvature: -f''_sinc(0) = pi^2 / 3.
  CHECK(f.hessian(vec1(1.0))(0, 0) ==
        doctest::Approx(std::numbers::pi * std::numbers::pi / 3.0).epsilon(1e-12));
  // Same kernel as the plain sinc, shifted and negated, so the
  // relation holds bitwise.
  for (const double t : {-3.2, -1.0, 0.25, 1.0 + 1e-5, 2.7, 5.5}) {
    CHECK(f.value(vec1(t)) == -base.value(vec1(t - 1.0)));
    CHECK(f.gradient(vec1(t))[0] == -base.gradient(vec1(t - 1.0))[0]);
    CHECK(f.hessian(vec1(t))(0, 0) == -base.hessian(vec1(t - 1.0))(0, 0));
    CHECK(f.hessian_diag(vec1(t))[0] == f.hessian(vec1(t))(0, 0));
  }
}

TEST_CASE("sinc escape landscape: deep central well, shallow traps") {
  const SincEscapeObjective<double> f;
  const auto scalar_f = [&](double t) { return f.value(vec1(t)); };

  // Unique global minimum at theta = 1 with f = -1.
  const auto mins = oracle::grid_global_minimizers(scalar_f, -10.0, 10.0);
  REQUIRE(mins.size() == 1);
  CHECK(mins[0].x == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(mins[0].fx == doctest::Approx(-1.0).epsilon(1e-12));

  // The trap a descent method falls into from theta = -3.2: the local
  // minimum at 1 - 4.47741..., an order of magnitude shallower than
  // the global well.
  const auto [trap, trap_f] = oracle::grid_min(scalar_f, -4.2, -2.6);
  CHECK(trap == doctest::Approx(-3.4774111).epsilon(1e-6));
  CHECK(trap_f == doctest::Approx(-0.0709135).epsilon(1e-5));
  CHECK(std::abs(f.gradient(vec1(trap))[0]) < 1e-8);
  CHECK(f.hessian(vec1(trap))(0, 0) > 0.0);

  const auto vec_f = [&](const Eigen::VectorXd& t) { return f.value(t); };
  for (const double t : {-3.2, -1.7, 0.4, 1.9, 3.3}) {
    const Eigen::VectorXd g_fd = oracle::fd_gradient(vec_f, vec1(t));
    const Eigen::MatrixXd h_fd = oracle::fd_hessian(vec_f, vec1(t));
    CHECK(f.gradient(vec1(t))[0] == doctest::Approx(g_fd[0]).epsilon(1e-6));
    CHECK(f.hessian(vec1(t))(0, 0) == doctest::Approx(h_fd(0, 0)).epsilon(1e-4));
  }
}

// ---------------------------------------------------------------------------
// quadratic

TEST_CASE("quadratic evaluates by hand") {
  Eigen::MatrixXd a(2, 2);
  a << 2.0, 0.0, 0.0, 4.0;
  const QuadraticObjective<double> f(a, vec2(1.0, -1.0));

  // delta = (2, 1): f = (2*4 + 4*1)/2 = 6, grad = A delta = (4, 4).
  CHECK(f.value(vec2(3.0, 0.0)) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK((f.gradient(vec2(3.0, 0.0)) - vec2(4.0, 4.0)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((f.hessian(vec2(3.0, 0.0)) - a).cwiseAbs().maxCoeff() == 0.0);
  CHECK((f.hessian_diag(vec2(3.0, 0.0)) - a.diagonal()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.value(f.minimizer()) == 0.0);
}

TEST_CASE("quadratic expectation engine matches tensor quadrature") {
  const Eigen::MatrixXd a = oracle::random_spd(2, 71);
  const Eigen::VectorXd center = vec2(0.4, -1.2);
  const QuadraticObjective<double> f(a, center);

  const Eigen::VectorXd mu = vec2(-0.3, 0.8);
  const Eigen::MatrixXd cov = oracle::random_spd(2, 72, 0.2, 1.5);
  const auto q = GaussianState<double>::from_cov(mu, cov);

  const double expected =
      tensor_gh_expect_2d(mu, cov, [&](const Eigen::VectorXd& t) { return f.value(t); });
  CHECK(f.expectation(q) == doctest::Approx(expected).epsilon(1e-12));

  for (int d = 0; d < 2; ++d)
    CHECK(f.expectation_grad_mean(q)[d] ==
          doctest::Approx(fd_engine_mean(f, mu, cov, d)).epsilon(1e-7));
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j)
      CHECK(f.expectation_grad_cov(q)(i, j) ==
            doctest::Approx(fd_engine_cov(f, mu, cov, i, j)).epsilon(1e-6));
}

TEST_CASE("quadratic rejects bad curvature") {
  Eigen::MatrixXd skew(2, 2);
  skew << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(QuadraticObjective<double>(skew, vec2(0, 0)), van::BadParams);

  Eigen::MatrixXd indef(2, 2);
  indef << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(QuadraticObjective<double>(indef, vec2(0, 0)), van::NotPositiveDefinite);

  CHECK_THROWS_AS(QuadraticObjective<double>(Eigen::MatrixXd::Identity(2, 2),
                                             Eigen::VectorXd::Zero(3)),
                  van::DimensionMismatch);
}

// ---------------------------------------------------------------------------
// lasso

TEST_CASE("lasso evaluates by hand") {
  Eigen::MatrixXd x(2, 2);
  x << 1.0, 0.0, 0.0, 2.0;
  const Eigen::VectorXd y = vec2(1.0, 2.0);
  const LassoObjective<double> f(x, y, 0.5);

  // theta = (0.5, -1): residual (0.5, 4), |r|^2 = 16.25, l1 = 1.5.
  const Eigen::VectorXd theta = vec2(0.5, -1.0);
  CHECK(f.value(theta) == doctest::Approx(16.25 + 0.75).epsilon(1e-15));
  // grad = 2 X^T (X theta - y) + lambda sign(theta) = (-1, -16) + (0.5, -0.5).
  CHECK((f.gradient(theta) - vec2(-0.5, -16.5)).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::MatrixXd h_expect(2, 2);
  h_expect << 2.0, 0.0, 0.0, 8.0;
  CHECK((f.hessian(theta) - h_expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("lasso derivatives are undefined on the axes") {
  Eigen::MatrixXd x(2, 2);
  x << 1.0, 0.0, 0.0, 2.0;
  const LassoObjective<double> f(x, vec2(1.0, 2.0), 0.5);

  CHECK(std::isfinite(f.value(vec2(0.0, 1.0))));  // value itself is fine
  CHECK_THROWS_AS((void)f.gradient(vec2(0.0, 1.0)), van::OutOfRange);
  CHECK_THROWS_AS((void)f.hessian(vec2(1.0, 0.0)), van::OutOfRange);
  CHECK(f.has(Capability::NonSmooth));
}

TEST_CASE("lasso rejects negative regularization") {
  Eigen::MatrixXd x(1, 1);
  x << 1.0;
  CHECK_THROWS_AS(LassoObjective<double>(x, vec1(1.0), -0.1),
                  van::NegativeRegularization);
}

TEST_CASE("lasso expectation engine matches direct integration in 1-D") {
  Eigen::MatrixXd x(1, 1);
  x << 1.0;
  const Eigen::VectorXd y = vec1(2.0);

  struct Probe {
    double lambda, mu, var;
  };
  for (const Probe p : {Probe{0.5, 0.7, 0.09}, Probe{1.0, -0.3, 0.25},
                        Probe{2.0, 0.0, 1.0}, Probe{0.25, 1.5, 4.0}}) {
    const LassoObjective<double> f(x, y, p.lambda);
    const auto q = GaussianState<double>::diag_from_variances(vec1(p.mu), vec1(p.var));
    const double expected = oracle::normal_expect(
        [&](double t) { return (2.0 - t) * (2.0 - t) + p.lambda * std::abs(t); }, p.mu,
        p.var);
    CHECK(f.expectation(q) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("lasso expectation engine matches quadrature with full covariance") {
  Eigen::MatrixXd x(3, 2);
  x << 1.0, 0.5, -0.3, 2.0, 0.7, -1.1;
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(3, 1.0, -1.0);
  const double lambda = 0.8;
  const LassoObjective<double> f(x, y, lambda);

  const Eigen::VectorXd mu = vec2(0.6, -0.4);
  const Eigen::MatrixXd cov = oracle::random_spd(2, 91, 0.3, 1.2);
  const auto q = GaussianState<double>::from_cov(mu, cov);

  // Smooth part by (exact) tensor quadrature, each |theta_d| by 1-D
  // integration against its marginal; the two pieces never mix.
  double expected = tensor_gh_expect_2d(
      mu, cov, [&](const Eigen::VectorXd& t) { return (y - x * t).squaredNorm(); });
  for (int d = 0; d < 2; ++d)
    expected += lambda * oracle::normal_expect([](double t) { return std::abs(t); },
                                               mu[d], cov(d, d));
  CHECK(f.expectation(q) == doctest::Approx(expected).epsilon(1e-8));

  for (int d = 0; d < 2; ++d)
    CHECK(f.expectation_grad_mean(q)[d] ==
          doctest::Approx(fd_engine_mean(f, mu, cov, d)).epsilon(1e-6));
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j)
      CHECK(f.expectation_grad_cov(q)(i, j) ==
            doctest::Approx(fd_engine_cov(f, mu, cov, i, j)).epsilon(2e-5));
}

TEST_CASE("lasso absolute-moment closed form is right") {
  // E|t| for t ~ N(0, 1) is sqrt(2/pi); the engine reduces to it when
  // the data term vanishes (X = 0 contributes y^T y only).
  Eigen::MatrixXd x(1, 1);
  x << 0.0;
  const LassoObjective<double> f(x, vec1(0.0), 1.0);
  const auto q = GaussianState<double>::diag_from_variances(vec1(0.0), vec1(1.0));
  CHECK(f.expectation(q) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
  // d E|t| / d mu = erf(mu / (sigma sqrt 2)) -> 0 at mu = 0.
  CHECK(f.expectation_grad_mean(q)[0] == doctest::Approx(0.0));
  // d E|t| / d sigma^2 = N(0 | mu, sigma^2) = 1/sqrt(2 pi) here.
  CHECK(f.expectation_grad_cov(q)(0, 0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("lasso expectation rejects collapsed variance") {
  Eigen::MatrixXd x(1, 1);
  x << 1.0;
  const LassoObjective<double> f(x, vec1(1.0), 0.5);
  const auto q =
      GaussianState<double>::diag_from_variances(vec1(0.5), vec1(1e-14));
  CHECK_THROWS_AS((void)f.expectation(q), van::DegenerateVariance);
}

TEST_CASE("lasso minibatch views recombine to the full objective") {
  const auto made = van::make_synthetic_regression<double>(12, 3, 0.7, 0.1, 404);
  const auto full = std::dynamic_pointer_cast<const LassoObjective<double>>(
      van::make_lasso<double>(made.data, 0.5));
  REQUIRE(full);
  REQUIRE(full->num_examples() == 12);

  const Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(3, 0.4, -0.8);
  Eigen::VectorXd grad_acc = Eigen::VectorXd::Zero(3);
  double value_acc = 0.0;
  for (van::Index start = 0; start < 12; start += 4) {
    std::vector<van::Index> idx{start, start + 1, start + 2, start + 3};
    const auto view = full->minibatch(idx);
    CHECK(view->num_examples() == 4);
    grad_acc += view->gradient(theta);
    value_acc += view->value(theta);
  }
  // Each view rescales its data term by N/M = 3, so the batch average
  // reproduces the full sum exactly; the l1 term rides along in every
  // view and averages to itself.
  grad_acc /= 3.0;
  value_acc /= 3.0;
  CHECK((grad_acc - full->gradient(theta)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(value_acc == doctest::Approx(full->value(theta)).epsilon(1e-12));

  // Scale composes multiplicatively through nested views.
  std::vector<van::Index> half{0, 1, 2, 3, 4, 5};
  const auto outer = std::dynamic_pointer_cast<const LassoObjective<double>>(
      full->minibatch(half));
  REQUIRE(outer);
  CHECK(outer->data_scale() == doctest::Approx(2.0));
  std::vector<van::Index> third{0, 1};
  const auto inner = std::dynamic_pointer_cast<const LassoObjective<double>>(
      outer->minibatch(third));
  REQUIRE(inner);
  CHECK(inner->data_scale() == doctest::Approx(6.0));
  CHECK_THROWS_AS((void)full->minibatch(std::vector<van::Index>{}), van::EmptySplit);
  CHECK_THROWS_AS((void)full->minibatch(std::vector<van::Index>{99}), van::OutOfRange);
}

// ---------------------------------------------------------------------------
// logistic

TEST_CASE("logistic evaluates by hand") {
  Eigen::MatrixXd x(2, 1);
  x << 2.0, -1.0;
  Eigen::VectorXd y(2);
  y << 1.0, -1.0;
  const LogisticObjective<double> f(x, y, 0.25);

  // z = (1, -0.5); margins y z = (1, 0.5).
  const double expected = std::log(1.0 + std::exp(-1.0)) +
                          std::log(1.0 + std::exp(-0.5)) + 0.25 * 0.25;
  CHECK(f.value(vec1(0.5)) == doctest::Approx(expected).epsilon(1e-14));

  // At theta = 0 every example contributes log 2.
  const LogisticObjective<double> f0(x, y, 0.0);
  CHECK(f0.value(vec1(0.0)) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));

  // Gradient: sum_i -y_i sigmoid(-y_i z_i) x_i + 2 lambda theta.
  const double s1 = 1.0 / (1.0 + std::exp(1.0));   // sigmoid(-1)
  const double s2 = 1.0 / (1.0 + std::exp(0.5));   // sigmoid(-0.5)
  const double g_expected = -s1 * 2.0 + s2 * (-1.0) + 2.0 * 0.25 * 0.5;
  CHECK(f.gradient(vec1(0.5))[0] == doctest::Approx(g_expected).epsilon(1e-14));
}

TEST_CASE("logistic stays finite at extreme margins") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, -1.0;
  Eigen::VectorXd y(2);
  y << 1.0, -1.0;
  const LogisticObjective<double> f(x, y, 0.0);
  // Margins +-1000 overflow naive exp; the stable form gives ~0 and ~|z|.
  CHECK(f.value(vec1(1000.0)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.value(vec1(-1000.0)) == doctest::Approx(2000.0).epsilon(1e-12));
  CHECK(std::isfinite(f.gradient(vec1(-1000.0))[0]));
  CHECK(std::isfinite(f.hessian(vec1(1000.0))(0, 0)));
}

TEST_CASE("logistic derivatives agree with finite differences") {
  const auto data = van::make_synthetic_blobs<double>(30, 3, 2.0, 505);
  const auto f = van::make_logistic<double>(data, 0.1);
  const Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(3, -0.5, 0.9);

  const auto scalar_f = [&](const Eigen::VectorXd& t) { return f->value(t); };
  const Eigen::VectorXd g_fd = oracle::fd_gradient(scalar_f, theta);
  const Eigen::MatrixXd h_fd = oracle::fd_hessian(scalar_f, theta);
  CHECK((f->gradient(theta) - g_fd).cwiseAbs().maxCoeff() < 1e-5);
  CHECK((f->hessian(theta) - h_fd).cwiseAbs().maxCoeff() < 1e-4);
  CHECK((f->hessian_diag(theta) - f->hessian(theta).diagonal()).cwiseAbs().maxCoeff() <
        1e-13);

  // Hessian = X^T W X + 2 lambda I with W >= 0, so eigenvalues >= 2 lambda.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f->hessian(theta));
  CHECK(eig.eigenvalues().minCoeff() >= 0.2 - 1e-12);
}

TEST_CASE("logistic rejects bad labels and negative regularization") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, 2.0;
  Eigen::VectorXd zero_one(2), two(2);
  zero_one << 1.0, 0.0;
  two << 1.0, 2.0;
  CHECK_THROWS_AS(LogisticObjective<double>(x, zero_one, 0.1), van::BadLabels);
  CHECK_THROWS_AS(LogisticObjective<double>(x, two, 0.1), van::BadLabels);
  Eigen::VectorXd ok(2);
  ok << 1.0, -1.0;
  CHECK_THROWS_AS(LogisticObjective<double>(x, ok, -0.5), van::NegativeRegularization);
}

TEST_CASE("logistic link derivatives are consistent") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, 1.0;
  Eigen::VectorXd y(2);
  y << 1.0, -1.0;
  const LogisticObjective<double> f(x, y, 0.0);

  const double h = 1e-6;
  for (const double z : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
    for (van::Index i = 0; i < 2; ++i) {
      const double d1_fd = (f.glm_link(0, z + h, i) - f.glm_link(0, z - h, i)) / (2 * h);
      const double d2_fd = (f.glm_link(1, z + h, i) - f.glm_link(1, z - h, i)) / (2 * h);
      CHECK(f.glm_link(1, z, i) == doctest::Approx(d1_fd).epsilon(1e-7));
      CHECK(f.glm_link(2, z, i) == doctest::Approx(d2_fd).epsilon(1e-7));
    }
    // The curvature sigmoid(z) (1 - sigmoid(z)) does not depend on the label.
    CHECK(f.glm_link(2, z, 0) == f.glm_link(2, z, 1));
  }
  CHECK_THROWS_AS((void)f.glm_link(3, 0.0, 0), van::BadParams);
}

TEST_CASE("logistic link structure rebuilds the objective value") {
  const auto data = van::make_synthetic_blobs<double>(20, 2, 2.5, 606);
  const auto f = van::make_logistic<double>(data, 0.3);
  const Eigen::VectorXd theta = vec2(0.7, -0.2);

  const Eigen::VectorXd z = f->glm_features() * theta;
  double acc = 0.0;
  for (van::Index i = 0; i < z.size(); ++i) acc += f->glm_link(0, z[i], i);
  acc = f->glm_scale() * acc + 0.3 * theta.squaredNorm();
  CHECK(acc == doctest::Approx(f->value(theta)).epsilon(1e-14));

  // Regularizer expectations: E[lambda |theta|^2] = lambda (|mu|^2 + tr Sigma).
  const auto q = GaussianState<double>::from_cov(vec2(0.5, -1.0),
                                                 oracle::random_spd(2, 17, 0.2, 1.0));
  CHECK(f->glm_reg_expect_value(q) ==
        doctest::Approx(0.3 * (q.mean().squaredNorm() + q.cov().trace())).epsilon(1e-14));
  CHECK((f->glm_reg_expect_grad(q) - 0.6 * q.mean()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((f->glm_reg_expect_hess(q) - 0.6 * Eigen::MatrixXd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("logistic minibatch views recombine to the full objective") {
  const auto data = van::make_synthetic_blobs<double>(12, 2, 2.0, 707);
  const auto full = van::make_logistic<double>(data, 0.2);
  const Eigen::VectorXd theta = vec2(0.3, -0.6);

  Eigen::VectorXd grad_acc = Eigen::VectorXd::Zero(2);
  for (van::Index start = 0; start < 12; start += 3) {
    std::vector<van::Index> idx{start, start + 1, start + 2};
    grad_acc += full->minibatch(idx)->gradient(theta);
  }
  CHECK((grad_acc / 4.0 - full->gradient(theta)).cwiseAbs().maxCoeff() < 1e-12);

  std::vector<van::Index> idx{0, 5};
  const auto view = full->minibatch(idx);
  CHECK(view->glm_scale() == doctest::Approx(6.0));
  CHECK(view->num_examples() == 2);
}

TEST_CASE("held-out log loss is the plain mean margin loss") {
  auto data = van::make_synthetic_blobs<double>(10, 2, 2.0, 808);
  data.add_split("test", {7, 8, 9});

  CHECK(van::test_log_loss(Eigen::VectorXd::Zero(2).eval(), data, "test") ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));

  const Eigen::VectorXd theta = vec2(0.4, 1.1);
  double acc = 0.0;
  for (const van::Index i : {7, 8, 9}) {
    const double margin = data.labels[i] * data.features.row(i).dot(theta);
    acc += std::log1p(std::exp(-std::abs(margin))) + std::max(-margin, 0.0);
  }
  CHECK(van::test_log_loss(theta, data, "test") == doctest::Approx(acc / 3.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)van::test_log_loss(theta, data, "validation"), van::EmptySplit);
  CHECK_THROWS_AS(
      (void)van::test_log_loss(Eigen::VectorXd::Zero(3).eval(), data, "test"),
      van::DimensionMismatch);
}

// ---------------------------------------------------------------------------
// variational wrapper

namespace {

// Minimal gradient-free objective for capability rejection tests.
struct ValueOnly final : Objective<double> {
  van::Index dim() const override { return 1; }
  unsigned capabilities() const override {
    return static_cast<unsigned>(Capability::Value);
  }
  double value(const Eigen::VectorXd& theta) const override { return theta.squaredNorm(); }
};

}  // namespace

TEST_CASE("variational wrapper delegates and advertises the correction") {
  const auto inner = van::make_quadratic<double>(oracle::random_spd(2, 31), vec2(1.0, 2.0));
  const auto vi = van::make_vi_objective<double>(inner);

  CHECK(vi->has(Capability::VariationalCorrection));
  CHECK(vi->has(Capability::ExactExpectation));
  CHECK(vi->has(Capability::Hess));

  const Eigen::VectorXd theta = vec2(0.3, -0.4);
  CHECK(vi->value(theta) == inner->value(theta));
  CHECK((vi->gradient(theta) - inner->gradient(theta)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((vi->hessian(theta) - inner->hessian(theta)).cwiseAbs().maxCoeff() == 0.0);

  const auto q = GaussianState<double>::from_cov(vec2(0.0, 0.0),
                                                 oracle::random_spd(2, 32, 0.4, 2.0));
  CHECK(vi->expectation(q) == inner->expectation(q));

  CHECK_THROWS_AS(ViObjective<double>(nullptr), van::BadParams);
  CHECK_THROWS_AS(ViObjective<double>(std::make_shared<ValueOnly>()),
                  van::CapabilityMissing);
}

TEST_CASE("variational correction subtracts precision and entropy") {
  const Eigen::MatrixXd a = oracle::random_spd(2, 33);
  const auto vi = van::make_vi_objective<double>(
      van::make_quadratic<double>(a, vec2(0.5, -0.5)));

  const Eigen::MatrixXd cov = oracle::random_spd(2, 34, 0.3, 1.5);
  const auto q = GaussianState<double>::from_cov(vec2(0.2, 0.1), cov);

  van::ExpectationEstimate<double> est;
  est.avg_grad = vec2(1.0, -2.0);
  est.avg_hess = a;
  est.avg_value = 7.0;
  vi->correct_expectation(est, q);

  CHECK((est.avg_hess - (a - q.precision())).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((est.avg_grad - vec2(1.0, -2.0)).cwiseAbs().maxCoeff() == 0.0);  // untouched
  const double entropy =
      0.5 * std::log(std::pow(2.0 * std::numbers::pi * std::numbers::e, 2) *
                     cov.determinant());
  CHECK(est.avg_value == doctest::Approx(7.0 - entropy).epsilon(1e-12));

  // Diagonal estimates are corrected coordinatewise.
  const auto qd = GaussianState<double>::diag_from_variances(vec2(0.0, 0.0),
                                                             vec2(0.5, 2.0));
  van::ExpectationEstimate<double> est_d;
  est_d.avg_grad = vec2(0.0, 0.0);
  est_d.hess_diag = vec2(3.0, 3.0);
  vi->correct_expectation(est_d, qd);
  CHECK((est_d.hess_diag - vec2(3.0 - 2.0, 3.0 - 0.5)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("conjugate case: the posterior is a stationary point of the bound") {
  // For a quadratic negative log joint, the Gaussian posterior has mean
  // at the minimizer and covariance equal to the inverse curvature; the
  // corrected estimate vanishes exactly there.
  const Eigen::MatrixXd a = oracle::random_spd(3, 35);
  const Eigen::VectorXd center = Eigen::VectorXd::LinSpaced(3, -1.0, 1.0);
  const auto vi = van::make_vi_objective<double>(van::make_quadratic<double>(a, center));

  const auto posterior = GaussianState<double>::from_precision(center, a);
  van::ExpectationEstimate<double> est;
  est.avg_grad = vi->expectation_grad_mean(posterior);
  est.avg_hess = 2.0 * vi->expectation_grad_cov(posterior);
  est.avg_value = vi->expectation(posterior);
  vi->correct_expectation(est, posterior);

  CHECK(est.avg_grad.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(est.avg_hess.cwiseAbs().maxCoeff() < 1e-10);
}
