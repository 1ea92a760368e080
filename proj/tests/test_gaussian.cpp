#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <van/gaussian.hpp>

#include "oracles.hpp"

#include <cmath>

using van::GaussianState;
using van::RngStream;

namespace {

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("covariance and precision are mutual inverses") {
  const int d = 5;
  const Eigen::MatrixXd cov = oracle::random_spd(d, 11);
  const Eigen::VectorXd mu = Eigen::VectorXd::LinSpaced(d, -1.0, 2.0);

  const auto q = GaussianState<double>::from_cov(mu, cov);
  const Eigen::MatrixXd prec_oracle = cov.fullPivLu().inverse();
  CHECK(max_abs_diff(q.precision(), prec_oracle) < 1e-10);

  const auto r = GaussianState<double>::from_precision(mu, prec_oracle);
  CHECK(max_abs_diff(r.cov(), cov) < 1e-10);
  CHECK(max_abs_diff(q.cov(), cov) == 0.0);  // primary storage returned verbatim
}

TEST_CASE("diagonal variances and precisions are reciprocal") {
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd v(3);
  v << 0.25, 1.0, 9.0;
  const auto q = GaussianState<double>::diag_from_variances(mu, v);
  const Eigen::VectorXd s = q.precisions();
  for (int i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(1.0 / v[i]).epsilon(1e-14));

  const auto r = GaussianState<double>::diag_from_precisions(mu, s);
  for (int i = 0; i < 3; ++i)
    CHECK(r.variances()[i] == doctest::Approx(v[i]).epsilon(1e-12));
  CHECK(q.is_diagonal());
  CHECK(max_abs_diff(q.cov(), v.asDiagonal().toDenseMatrix()) == 0.0);
}

TEST_CASE("natural parameters match their defining formulas") {
  const int d = 4;
  const Eigen::MatrixXd cov = oracle::random_spd(d, 23);
  const Eigen::VectorXd mu = Eigen::VectorXd::LinSpaced(d, 0.5, -1.5);
  const auto q = GaussianState<double>::from_cov(mu, cov);

  const auto np = van::to_natural_params(q);
  const Eigen::MatrixXd prec_oracle = cov.fullPivLu().inverse();
  CHECK((np.lambda1 - prec_oracle * mu).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(max_abs_diff(np.lambda2, -0.5 * prec_oracle) < 1e-10);

  const auto back = van::from_natural_params(np);
  CHECK((back.mean() - mu).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(max_abs_diff(back.cov(), cov) < 1e-10);
}

TEST_CASE("mean parameters match their defining formulas") {
  const int d = 3;
  const Eigen::MatrixXd cov = oracle::random_spd(d, 31);
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(d, 0.7);
  const auto q = GaussianState<double>::from_cov(mu, cov);

  const auto mp = van::to_mean_params(q);
  CHECK(max_abs_diff(mp.m2, cov + mu * mu.transpose()) < 1e-12);

  const auto back = van::from_mean_params(mp);
  CHECK((back.mean() - mu).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(max_abs_diff(back.cov(), cov) < 1e-10);
  back.validate();  // second moment minus outer product stays PD
}

TEST_CASE("round trips hold at 1e-10 for random SPD instances") {
  for (unsigned seed : {1u, 2u, 3u, 5u, 8u}) {
    const int d = 2 + static_cast<int>(seed % 4);
    const Eigen::MatrixXd cov = oracle::random_spd(d, 100 + seed, 0.05, 20.0);
    Eigen::VectorXd mu(d);
    for (int i = 0; i < d; ++i) mu[i] = std::sin(seed + i * 1.7) * 3;
    const auto q = GaussianState<double>::from_cov(mu, cov);

    const auto via_nat = van::from_natural_params(van::to_natural_params(q));
    CHECK((via_nat.mean() - mu).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(max_abs_diff(via_nat.cov(), cov) < 1e-10);

    const auto via_mean = van::from_mean_params(van::to_mean_params(q));
    CHECK((via_mean.mean() - mu).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(max_abs_diff(via_mean.cov(), cov) < 1e-10);
  }
}

TEST_CASE("samples reproduce mean and covariance") {
  const int d = 3;
  const Eigen::MatrixXd cov = oracle::random_spd(d, 47, 0.3, 2.0);
  Eigen::VectorXd mu(d);
  mu << 1.0, -2.0, 0.5;
  const auto q = GaussianState<double>::from_cov(mu, cov);

  const RngStream stream(123);
  const int n = 200000;
  const auto batch = van::sample(q, stream, n);
  REQUIRE(batch.draws.rows() == n);
  REQUIRE(batch.draws.cols() == d);

  const Eigen::VectorXd emp_mean = batch.draws.colwise().mean();
  CHECK((emp_mean - mu).cwiseAbs().maxCoeff() < 0.02);

  const Eigen::MatrixXd centered = batch.draws.rowwise() - emp_mean.transpose();
  const Eigen::MatrixXd emp_cov = centered.transpose() * centered / (n - 1);
  CHECK(max_abs_diff(emp_cov, cov) < 0.05);

  // Noise is the standard normal that generated each draw.
  const Eigen::MatrixXd chol = q.cov_llt().matrixL();
  const Eigen::MatrixXd rebuilt =
      (batch.noise * chol.transpose()).rowwise() + mu.transpose();
  CHECK(max_abs_diff(rebuilt, batch.draws) < 1e-14);
}

TEST_CASE("sampling is a pure function of the stream") {
  const auto q = GaussianState<double>::diag_from_variances(
      Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 1.0));
  const RngStream a(7), b(7), c(8);
  const auto ba = van::sample(q, a, 16);
  const auto bb = van::sample(q, b, 16);
  const auto bc = van::sample(q, c, 16);
  CHECK(ba.draws == bb.draws);
  CHECK(ba.noise == bb.noise);
  CHECK(ba.draws != bc.draws);

  // A longer batch starts with the short batch: draw s depends only on s.
  const auto longer = van::sample(q, a, 32);
  CHECK(longer.draws.topRows(16) == ba.draws);
}

TEST_CASE("zero variance is representable but not sampleable") {
  Eigen::VectorXd mu(1);
  mu << 5.0;
  Eigen::MatrixXd zero(1, 1);
  zero << 0.0;
  const auto q = GaussianState<double>::from_cov(mu, zero);
  const RngStream stream(1);
  CHECK_THROWS_AS(van::sample(q, stream, 4), van::FactorizationFailure);

  const auto qd = GaussianState<double>::diag_from_variances(mu, Eigen::VectorXd::Zero(1));
  CHECK_THROWS_AS(van::sample(qd, stream, 4), van::FactorizationFailure);
  CHECK_THROWS_AS(qd.precisions(), van::FactorizationFailure);
}

TEST_CASE("precision-to-covariance conversion floors the variance") {
  Eigen::VectorXd mu(1);
  mu << 0.0;
  Eigen::MatrixXd huge(1, 1);
  huge << 1e14;
  const auto q = GaussianState<double>::from_precision(mu, huge);
  CHECK(q.cov()(0, 0) == doctest::Approx(1e-12).epsilon(1e-9));

  const auto qd = GaussianState<double>::diag_from_precisions(mu, Eigen::VectorXd::Constant(1, 1e14));
  CHECK(qd.variances()[0] == doctest::Approx(1e-12).epsilon(1e-9));
}

TEST_CASE("kl divergence matches the closed form and is never negative") {
  // One-dimensional hand value: q = N(0,1), ref = N(1,2).
  const auto q = GaussianState<double>::diag_from_variances(
      Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  Eigen::VectorXd mr(1), vr(1);
  mr << 1.0;
  vr << 2.0;
  const auto ref = GaussianState<double>::diag_from_variances(mr, vr);
  const double expected = 0.5 * (0.5 + 0.5 - 1.0 + std::log(2.0));
  CHECK(van::kl_divergence(q, ref) == doctest::Approx(expected).epsilon(1e-12));

  // Dense and diagonal paths agree on the same distribution.
  const auto qf = GaussianState<double>::from_cov(q.mean(), q.cov());
  const auto rf = GaussianState<double>::from_cov(ref.mean(), ref.cov());
  CHECK(van::kl_divergence(qf, rf) == doctest::Approx(expected).epsilon(1e-12));

  // Identical inputs give exactly zero.
  CHECK(van::kl_divergence(q, q) == 0.0);
  CHECK(van::kl_divergence(qf, qf) == 0.0);

  // Monte-Carlo cross-check of a dense 2-D case.
  const Eigen::MatrixXd cq = oracle::random_spd(2, 3, 0.5, 2.0);
  const Eigen::MatrixXd cr = oracle::random_spd(2, 9, 0.5, 2.0);
  Eigen::VectorXd m2(2);
  m2 << 0.3, -0.2;
  const auto q2 = GaussianState<double>::from_cov(m2, cq);
  const auto r2 = GaussianState<double>::from_cov(Eigen::VectorXd::Zero(2), cr);
  const auto batch = van::sample(q2, RngStream(99), 400000);
  const Eigen::MatrixXd pq = cq.fullPivLu().inverse();
  const Eigen::MatrixXd pr = cr.fullPivLu().inverse();
  const double ldq = std::log(cq.determinant());
  const double ldr = std::log(cr.determinant());
  double acc = 0;
  for (int s = 0; s < batch.draws.rows(); ++s) {
    const Eigen::VectorXd x = batch.draws.row(s);
    const Eigen::VectorXd dq = x - q2.mean();
    const Eigen::VectorXd dr = x - r2.mean();
    acc += 0.5 * (dr.dot(pr * dr) - dq.dot(pq * dq) + ldr - ldq);
  }
  const double mc = acc / batch.draws.rows();
  CHECK(van::kl_divergence(q2, r2) == doctest::Approx(mc).epsilon(0.02));

  // Fuzz: divergence is non-negative for random pairs.
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd ca = oracle::random_spd(3, 200 + seed, 0.2, 3.0);
    const Eigen::MatrixXd cb = oracle::random_spd(3, 300 + seed, 0.2, 3.0);
    Eigen::VectorXd ma(3), mb(3);
    for (int i = 0; i < 3; ++i) {
      ma[i] = std::cos(seed + i);
      mb[i] = ma[i] + (seed % 5 == 0 ? 0.0 : 1e-8 * i);
    }
    const auto a = GaussianState<double>::from_cov(ma, ca);
    const auto b = GaussianState<double>::from_cov(mb, seed % 3 == 0 ? ca : cb);
    CHECK(van::kl_divergence(a, b) >= 0.0);
  }
}

TEST_CASE("construction rejects bad inputs") {
  Eigen::VectorXd mu2 = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd cov3 = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(GaussianState<double>::from_cov(mu2, cov3), van::DimensionMismatch);

  Eigen::MatrixXd skew = Eigen::MatrixXd::Identity(2, 2);
  skew(0, 1) = 1e-6;  // far beyond the 1e-12 relative symmetry tolerance
  CHECK_THROWS_AS(GaussianState<double>::from_cov(mu2, skew), van::BadParams);

  Eigen::MatrixXd tiny_skew = Eigen::MatrixXd::Identity(2, 2);
  tiny_skew(0, 1) = 5e-14;
  tiny_skew(1, 0) = 0.0;
  CHECK_NOTHROW(GaussianState<double>::from_cov(mu2, tiny_skew));

  CHECK_THROWS_AS(
      GaussianState<double>::diag_from_variances(mu2, Eigen::VectorXd::Constant(2, -1.0)),
      van::BadParams);

  Eigen::MatrixXd nan_cov = Eigen::MatrixXd::Identity(2, 2);
  nan_cov(0, 0) = std::nan("");
  CHECK_THROWS_AS(GaussianState<double>::from_cov(mu2, nan_cov), van::NonFiniteValue);

  const auto a = GaussianState<double>::isotropic(Eigen::VectorXd::Zero(2), 1.0);
  const auto b = GaussianState<double>::isotropic(Eigen::VectorXd::Zero(3), 1.0);
  CHECK_THROWS_AS(van::kl_divergence(a, b), van::DimensionMismatch);
}

TEST_CASE("validate flags broken states") {
  Eigen::VectorXd mu(2);
  mu << 0.0, 0.0;
  Eigen::MatrixXd not_pd(2, 2);
  not_pd << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  const auto q = GaussianState<double>::from_cov(mu, not_pd);
  CHECK_THROWS_AS(q.validate(), van::NotPositiveDefinite);
  CHECK_THROWS_AS(q.cov_llt(), van::FactorizationFailure);

  const auto ok = GaussianState<double>::isotropic(mu, 1.5);
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.cov()(0, 0) == doctest::Approx(2.25));
}

TEST_CASE("float instantiation works") {
  Eigen::VectorXf mu(2);
  mu << 1.0f, -1.0f;
  Eigen::MatrixXf cov(2, 2);
  cov << 2.0f, 0.5f, 0.5f, 1.0f;
  const auto q = GaussianState<float>::from_cov(mu, cov);
  const auto np = van::to_natural_params(q);
  const auto back = van::from_natural_params(np);
  CHECK((back.mean() - mu).cwiseAbs().maxCoeff() < 1e-4f);
  CHECK((back.cov() - cov).cwiseAbs().maxCoeff() < 1e-4f);
  const auto batch = van::sample(q, van::RngStream(5), 8);
  CHECK(batch.draws.rows() == 8);
}
