#pragma once

#include <cstdint>

#include "van/types.hpp"

namespace van {

enum class EstimatorMethod { Exact, Quadrature, MonteCarlo, GaussNewton };

/// The averaged first- and second-order information a variational step
/// consumes: E_q[grad f] plus either a full averaged Hessian, a Hessian
/// diagonal, or neither. `avg_value` carries the matching estimate of
/// E_q[f] for trace reporting.
template <typename Scalar>
struct ExpectationEstimate {
  Vector<Scalar> avg_grad;
  Matrix<Scalar> avg_hess;  // 0x0 when absent; symmetric when present
  Vector<Scalar> hess_diag;  // empty when absent
  Scalar avg_value = Scalar(0);
  EstimatorMethod method = EstimatorMethod::MonteCarlo;
  Index samples_used = 0;
  std::uint64_t seed = 0;

  bool has_full_hess() const { return avg_hess.size() > 0; }
  bool has_hess_diag() const { return hess_diag.size() > 0; }
};

}  // namespace van
