#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Cholesky>

#include "van/errors.hpp"
#include "van/rng.hpp"
#include "van/types.hpp"

namespace van {

namespace detail {

/// SPD inverse via Cholesky. Never forms cofactors; throws on failure.
template <typename Scalar>
Matrix<Scalar> spd_inverse(const Matrix<Scalar>& m, const char* what) {
  Eigen::LLT<Matrix<Scalar>> llt(m);
  if (llt.info() != Eigen::Success) throw FactorizationFailure(what);
  Matrix<Scalar> inv = llt.solve(Matrix<Scalar>::Identity(m.rows(), m.cols()));
  return symmetrized(inv);
}

}  // namespace detail

/// Gaussian search distribution q(theta) = N(mean, cov).
///
/// Storage is either a full matrix or a diagonal, and either the
/// covariance or the precision is primary; conversions happen on demand
/// through Cholesky solves. Construction checks shapes and symmetry;
/// positive-definiteness is enforced where a factorization is actually
/// needed (sampling, precision/covariance conversion), so states that
/// optimizer updates are about to repair can still be represented.
template <typename Scalar>
class GaussianState {
 public:
  static GaussianState from_cov(Vector<Scalar> mean, Matrix<Scalar> cov) {
    check_square(mean, cov, "from_cov");
    return GaussianState(std::move(mean), std::move(cov), /*diagonal=*/false,
                         /*precision_primary=*/false);
  }

  static GaussianState from_precision(Vector<Scalar> mean, Matrix<Scalar> prec) {
    check_square(mean, prec, "from_precision");
    return GaussianState(std::move(mean), std::move(prec), /*diagonal=*/false,
                         /*precision_primary=*/true);
  }

  static GaussianState diag_from_variances(Vector<Scalar> mean, Vector<Scalar> variances) {
    check_diag(mean, variances, "diag_from_variances");
    return GaussianState(std::move(mean), std::move(variances), /*precision_primary=*/false);
  }

  static GaussianState diag_from_precisions(Vector<Scalar> mean, Vector<Scalar> precisions) {
    check_diag(mean, precisions, "diag_from_precisions");
    return GaussianState(std::move(mean), std::move(precisions), /*precision_primary=*/true);
  }

  /// Full-storage isotropic state N(mean, sigma^2 I).
  static GaussianState isotropic(Vector<Scalar> mean, Scalar sigma) {
    const Index d = mean.size();
    if (d < 1) throw DimensionMismatch("isotropic: empty mean");
    if (!(sigma > Scalar(0))) throw BadParams("isotropic: sigma must be positive");
    return from_cov(std::move(mean), Matrix<Scalar>::Identity(d, d) * sigma * sigma);
  }

  Index dim() const { return mean_.size(); }
  bool is_diagonal() const { return diagonal_; }
  bool precision_primary() const { return precision_primary_; }
  const Vector<Scalar>& mean() const { return mean_; }

  /// Dense covariance. Deriving it from a precision floors the diagonal
  /// at kMinVariance so downstream per-coordinate formulas stay finite.
  Matrix<Scalar> cov() const {
    if (diagonal_) return Matrix<Scalar>(variances().asDiagonal());
    if (!precision_primary_) return full_;
    Matrix<Scalar> c = detail::spd_inverse(full_, "precision not positive-definite");
    floor_diagonal(c);
    return c;
  }

  /// Dense precision.
  Matrix<Scalar> precision() const {
    if (diagonal_) return Matrix<Scalar>(precisions().asDiagonal());
    if (precision_primary_) return full_;
    return detail::spd_inverse(full_, "covariance not positive-definite");
  }

  /// Marginal variances (diagonal of the covariance), floored when
  /// derived from a precision.
  Vector<Scalar> variances() const {
    if (diagonal_) {
      if (!precision_primary_) return diag_;
      Vector<Scalar> v(diag_.size());
      for (Index i = 0; i < diag_.size(); ++i) {
        if (!(diag_[i] > Scalar(0)))
          throw FactorizationFailure("diagonal precision not positive");
        v[i] = std::max(Scalar(1) / diag_[i], Scalar(kMinVariance));
      }
      return v;
    }
    if (!precision_primary_) return full_.diagonal();
    return cov().diagonal();
  }

  /// Diagonal of the precision. For full storage this is the diagonal of
  /// the dense precision matrix, not the reciprocal of the variances.
  Vector<Scalar> precisions() const {
    if (diagonal_) {
      if (precision_primary_) return diag_;
      Vector<Scalar> s(diag_.size());
      for (Index i = 0; i < diag_.size(); ++i) {
        if (!(diag_[i] > Scalar(0)))
          throw FactorizationFailure("diagonal variance not positive");
        s[i] = Scalar(1) / diag_[i];
      }
      return s;
    }
    return precision().diagonal();
  }

  /// Cholesky factor of the covariance; the gate every sampling path and
  /// conversion goes through. Throws FactorizationFailure when the
  /// covariance is not numerically positive-definite.
  Eigen::LLT<Matrix<Scalar>> cov_llt() const {
    Eigen::LLT<Matrix<Scalar>> llt(cov());
    if (llt.info() != Eigen::Success)
      throw FactorizationFailure("covariance not positive-definite");
    return llt;
  }

  /// Full invariant check: finite entries, symmetric storage, and a
  /// positive-definite covariance. Throws on violation.
  void validate() const {
    if (!mean_.allFinite()) throw NonFiniteValue("state mean has non-finite entries");
    if (diagonal_) {
      if (!diag_.allFinite()) throw NonFiniteValue("state diagonal has non-finite entries");
      for (Index i = 0; i < diag_.size(); ++i)
        if (!(diag_[i] > Scalar(0)))
          throw NotPositiveDefinite("diagonal entry not positive");
      return;
    }
    if (!full_.allFinite()) throw NonFiniteValue("state matrix has non-finite entries");
    if (!is_symmetric(full_)) throw BadParams("state matrix not symmetric");
    Eigen::LLT<Matrix<Scalar>> llt(full_);
    if (llt.info() != Eigen::Success)
      throw NotPositiveDefinite("state matrix not positive-definite");
  }

  /// Exact representation equality (same storage layout and bytes).
  bool storage_equal(const GaussianState& other) const {
    if (diagonal_ != other.diagonal_ || precision_primary_ != other.precision_primary_)
      return false;
    if (mean_.size() != other.mean_.size()) return false;
    if (mean_ != other.mean_) return false;
    if (diagonal_) return diag_ == other.diag_;
    return full_ == other.full_;
  }

 private:
  GaussianState(Vector<Scalar> mean, Matrix<Scalar> full, bool diagonal, bool precision_primary)
      : mean_(std::move(mean)),
        full_(std::move(full)),
        diagonal_(diagonal),
        precision_primary_(precision_primary) {}

  GaussianState(Vector<Scalar> mean, Vector<Scalar> diag, bool precision_primary)
      : mean_(std::move(mean)),
        diag_(std::move(diag)),
        diagonal_(true),
        precision_primary_(precision_primary) {}

  static void check_square(const Vector<Scalar>& mean, const Matrix<Scalar>& m,
                           const char* what) {
    if (mean.size() < 1) throw DimensionMismatch(std::string(what) + ": empty mean");
    if (m.rows() != mean.size() || m.cols() != mean.size())
      throw DimensionMismatch(std::string(what) + ": matrix shape does not match mean");
    if (!mean.allFinite() || !m.allFinite())
      throw NonFiniteValue(std::string(what) + ": non-finite input");
    if (!is_symmetric(m)) throw BadParams(std::string(what) + ": matrix not symmetric");
  }

  static void check_diag(const Vector<Scalar>& mean, const Vector<Scalar>& d,
                         const char* what) {
    if (mean.size() < 1) throw DimensionMismatch(std::string(what) + ": empty mean");
    if (d.size() != mean.size())
      throw DimensionMismatch(std::string(what) + ": diagonal length does not match mean");
    if (!mean.allFinite() || !d.allFinite())
      throw NonFiniteValue(std::string(what) + ": non-finite input");
    for (Index i = 0; i < d.size(); ++i)
      if (d[i] < Scalar(0)) throw BadParams(std::string(what) + ": negative diagonal entry");
  }

  static void floor_diagonal(Matrix<Scalar>& c) {
    for (Index i = 0; i < c.rows(); ++i)
      c(i, i) = std::max(c(i, i), Scalar(kMinVariance));
  }

  Vector<Scalar> mean_;
  Matrix<Scalar> full_;  // covariance or precision when !diagonal_
  Vector<Scalar> diag_;  // variances or precisions when diagonal_
  bool diagonal_ = false;
  bool precision_primary_ = false;
};

/// A batch of draws together with the standard-normal noise that
/// produced them; reusing the noise gives common random numbers across
/// states and objectives.
template <typename Scalar>
struct SampleBatch {
  Matrix<Scalar> draws;  // count x dim, rows are draws
  Matrix<Scalar> noise;  // count x dim, rows are standard normals
};

/// Draws `count` samples theta = mean + L * eps with L the Cholesky
/// factor of the covariance (elementwise sigma for diagonal states).
/// Draw (s, d) reads noise slot s * dim + d of the stream, so the batch
/// is a pure function of the stream identity.
template <typename Scalar>
SampleBatch<Scalar> sample(const GaussianState<Scalar>& state, const RngStream& stream,
                           Index count) {
  if (count < 1) throw BadParams("sample: count must be positive");
  const Index d = state.dim();
  SampleBatch<Scalar> batch;
  batch.noise.resize(count, d);
  for (Index s = 0; s < count; ++s)
    for (Index j = 0; j < d; ++j)
      batch.noise(s, j) = static_cast<Scalar>(
          stream.normal_at(static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(d) +
                           static_cast<std::uint64_t>(j)));

  if (state.is_diagonal()) {
    Vector<Scalar> sigma(d);
    const Vector<Scalar> variances = state.variances();
    for (Index j = 0; j < d; ++j) {
      if (!(variances[j] > Scalar(0)))
        throw FactorizationFailure("sample: zero marginal variance");
      sigma[j] = std::sqrt(variances[j]);
    }
    batch.draws = batch.noise * sigma.asDiagonal();
  } else {
    const Matrix<Scalar> chol = state.cov_llt().matrixL();
    batch.draws = batch.noise * chol.transpose();
  }
  batch.draws.rowwise() += state.mean().transpose();
  return batch;
}

/// Mean parameterization (m1, M2) = (E[theta], E[theta theta^T]).
template <typename Scalar>
struct MeanParams {
  Vector<Scalar> m1;
  Matrix<Scalar> m2;
};

/// Natural parameterization (lambda1, Lambda2) = (P mu, -P / 2) with P
/// the precision.
template <typename Scalar>
struct NaturalParams {
  Vector<Scalar> lambda1;
  Matrix<Scalar> lambda2;
};

template <typename Scalar>
MeanParams<Scalar> to_mean_params(const GaussianState<Scalar>& state) {
  MeanParams<Scalar> mp;
  mp.m1 = state.mean();
  mp.m2 = state.cov() + state.mean() * state.mean().transpose();
  return mp;
}

template <typename Scalar>
GaussianState<Scalar> from_mean_params(const MeanParams<Scalar>& mp) {
  if (mp.m2.rows() != mp.m1.size() || mp.m2.cols() != mp.m1.size())
    throw DimensionMismatch("from_mean_params: second moment shape does not match mean");
  Matrix<Scalar> cov = symmetrized(mp.m2 - mp.m1 * mp.m1.transpose());
  return GaussianState<Scalar>::from_cov(mp.m1, std::move(cov));
}

template <typename Scalar>
NaturalParams<Scalar> to_natural_params(const GaussianState<Scalar>& state) {
  NaturalParams<Scalar> np;
  const Matrix<Scalar> prec = state.precision();
  np.lambda1 = prec * state.mean();
  np.lambda2 = prec * Scalar(-0.5);
  return np;
}

template <typename Scalar>
GaussianState<Scalar> from_natural_params(const NaturalParams<Scalar>& np) {
  if (np.lambda2.rows() != np.lambda1.size() || np.lambda2.cols() != np.lambda1.size())
    throw DimensionMismatch("from_natural_params: lambda2 shape does not match lambda1");
  Matrix<Scalar> prec = symmetrized(Matrix<Scalar>(np.lambda2 * Scalar(-2)));
  Eigen::LLT<Matrix<Scalar>> llt(prec);
  if (llt.info() != Eigen::Success)
    throw FactorizationFailure("from_natural_params: precision not positive-definite");
  Vector<Scalar> mean = llt.solve(np.lambda1);
  return GaussianState<Scalar>::from_precision(std::move(mean), std::move(prec));
}

/// Differential entropy H(q) = (d/2) ln(2 pi e) + (1/2) ln det Sigma.
template <typename Scalar>
Scalar entropy(const GaussianState<Scalar>& state) {
  const Index d = state.dim();
  Scalar half_logdet = Scalar(0);
  if (state.is_diagonal()) {
    const Vector<Scalar> v = state.variances();
    for (Index i = 0; i < d; ++i) {
      if (!(v[i] > Scalar(0))) throw FactorizationFailure("entropy: zero marginal variance");
      half_logdet += std::log(v[i]) / Scalar(2);
    }
  } else {
    const Matrix<Scalar> llt = state.cov_llt().matrixLLT();
    for (Index i = 0; i < d; ++i) half_logdet += std::log(llt(i, i));
  }
  return static_cast<Scalar>(d) / Scalar(2) *
             std::log(Scalar(2) * static_cast<Scalar>(M_PI) * std::exp(Scalar(1))) +
         half_logdet;
}

/// KL(q || ref) between two Gaussians of equal dimension. Clamped at
/// zero so round-off cannot produce a negative divergence; identical
/// representations short-circuit to exactly zero.
template <typename Scalar>
Scalar kl_divergence(const GaussianState<Scalar>& q, const GaussianState<Scalar>& ref) {
  if (q.dim() != ref.dim()) throw DimensionMismatch("kl_divergence: dimension mismatch");
  if (q.storage_equal(ref)) return Scalar(0);
  const Index d = q.dim();

  if (q.is_diagonal() && ref.is_diagonal()) {
    const Vector<Scalar> vq = q.variances();
    const Vector<Scalar> vr = ref.variances();
    Scalar acc = Scalar(0);
    for (Index i = 0; i < d; ++i) {
      if (!(vq[i] > Scalar(0)) || !(vr[i] > Scalar(0)))
        throw FactorizationFailure("kl_divergence: zero marginal variance");
      const Scalar delta = q.mean()[i] - ref.mean()[i];
      acc += vq[i] / vr[i] + delta * delta / vr[i] - Scalar(1) + std::log(vr[i] / vq[i]);
    }
    return std::max(Scalar(0), acc / Scalar(2));
  }

  const Eigen::LLT<Matrix<Scalar>> llt_q = q.cov_llt();
  const Eigen::LLT<Matrix<Scalar>> llt_r = ref.cov_llt();
  const Matrix<Scalar> cov_q = q.cov();
  const Vector<Scalar> delta = ref.mean() - q.mean();

  const Scalar trace_term = llt_r.solve(cov_q).trace();
  const Scalar quad_term = delta.dot(llt_r.solve(delta));
  Scalar logdet_r = Scalar(0);
  Scalar logdet_q = Scalar(0);
  const Matrix<Scalar> lr = llt_r.matrixLLT();
  const Matrix<Scalar> lq = llt_q.matrixLLT();
  for (Index i = 0; i < d; ++i) {
    logdet_r += Scalar(2) * std::log(lr(i, i));
    logdet_q += Scalar(2) * std::log(lq(i, i));
  }
  const Scalar kl =
      (trace_term + quad_term - Scalar(d) + logdet_r - logdet_q) / Scalar(2);
  return std::max(Scalar(0), kl);
}

}  // namespace van
