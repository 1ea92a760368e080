#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "van/data.hpp"
#include "van/gaussian.hpp"
#include "van/objectives/logistic.hpp"
#include "van/optim.hpp"
#include "van/rng.hpp"

namespace van {

enum class Acquisition { Entropy, Random };

/// Pool scoring output: per-row predictive probabilities and entropy
/// scores, plus the chosen row indices (highest entropy first, ties
/// broken by ascending pool index).
template <typename Scalar>
struct AcquisitionResult {
  Vector<Scalar> scores;            // binary entropy per pool row, nats
  Vector<Scalar> predictive_probs;  // p(y = +1 | x) per pool row
  std::vector<Index> selected_indices;
};

namespace detail {

template <typename Scalar>
Scalar stable_sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

}  // namespace detail

/// Monte-Carlo predictive probability of the positive class under the
/// search distribution: average of sigmoid(x.theta) over draws from q.
/// Deterministic given the stream.
template <typename Scalar>
Scalar predictive_prob(const Vector<Scalar>& x, const GaussianState<Scalar>& q, Index samples,
                       const RngStream& stream) {
  if (samples < 1) throw BadParams("predictive_prob: need at least one sample");
  if (x.size() != q.dim()) throw DimensionMismatch("predictive_prob: feature size mismatch");
  const SampleBatch<Scalar> batch = sample(q, stream, samples);
  const Vector<Scalar> margins = batch.draws * x;
  Scalar acc = Scalar(0);
  for (Index s = 0; s < samples; ++s) acc += detail::stable_sigmoid(margins[s]);
  return acc / static_cast<Scalar>(samples);
}

/// Binary entropy in nats with the 0 log 0 = 0 convention. Folding
/// onto min(p, 1-p) makes H(p) and H(1-p) take the same computation
/// path, so the symmetry holds exactly, not just to rounding.
template <typename Scalar>
Scalar entropy_score(Scalar p) {
  if (!(p >= Scalar(0) && p <= Scalar(1)))
    throw OutOfRange("entropy_score: probability outside [0, 1]");
  const Scalar lo = std::min(p, Scalar(1) - p);
  if (lo == Scalar(0)) return Scalar(0);
  return -lo * std::log(lo) - (Scalar(1) - lo) * std::log1p(-lo);
}

/// Score every pool row under q and pick the M most uncertain ones.
template <typename Scalar>
AcquisitionResult<Scalar> select_batch(const Dataset<Scalar>& pool,
                                       const GaussianState<Scalar>& q, Index m, Index samples,
                                       const RngStream& stream) {
  const Index n = pool.features.rows();
  if (m < 1) throw BadParams("select_batch: need at least one selection");
  if (m > n) throw PoolTooSmall("select_batch: batch larger than the pool");
  if (pool.features.cols() != q.dim())
    throw DimensionMismatch("select_batch: pool features do not match the state");

  if (samples < 1) throw BadParams("select_batch: need at least one sample");

  // One shared parameter batch scores the whole pool: identical rows
  // then tie exactly, and the pool needs a single set of draws.
  const SampleBatch<Scalar> batch = sample(q, stream, samples);
  const Matrix<Scalar> margins = pool.features * batch.draws.transpose();  // n x samples

  AcquisitionResult<Scalar> out;
  out.predictive_probs.resize(n);
  out.scores.resize(n);
  for (Index i = 0; i < n; ++i) {
    Scalar acc = Scalar(0);
    for (Index s = 0; s < samples; ++s) acc += detail::stable_sigmoid(margins(i, s));
    out.predictive_probs[i] = acc / static_cast<Scalar>(samples);
    out.scores[i] = entropy_score(out.predictive_probs[i]);
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (out.scores[a] != out.scores[b]) return out.scores[a] > out.scores[b];
    return a < b;
  });
  out.selected_indices.assign(order.begin(), order.begin() + m);
  return out;
}

template <typename Scalar>
struct ActiveConfig {
  OptimizerConfig<Scalar> optimizer;  // a distribution method; max_iters = steps per round
  Index batch_per_round = 10;
  Index rounds = 10;
  Index predictive_samples = 100;
  Acquisition acquisition = Acquisition::Entropy;
  bool remove_selected = true;  // false = sample the pool with replacement
  Scalar reg_strength = Scalar(0.01);
};

/// One learning-curve point; round 0 is the untrained initial state.
template <typename Scalar>
struct ActiveRecord {
  Index round = 0;
  Index examples_seen = 0;
  Scalar test_log_loss = Scalar(0);
};

/// Pool-based loop: score the pool under the current q, pick a batch,
/// run the configured optimizer on just that batch (warm-started from
/// q), and record the test log loss at the updated mean. Deterministic
/// given the optimizer seed.
template <typename Scalar>
std::vector<ActiveRecord<Scalar>> active_loop(const Dataset<Scalar>& pool,
                                              const Dataset<Scalar>& test,
                                              const ActiveConfig<Scalar>& config) {
  const Index n = pool.features.rows();
  const Index d = pool.features.cols();
  const Index m = config.batch_per_round;
  if (!detail::is_distribution_method(config.optimizer.method))
    throw BadParams("active_loop: needs a distribution method");
  if (m < 1) throw BadParams("active_loop: batch_per_round must be positive");
  if (config.rounds < 0) throw BadParams("active_loop: rounds must be nonnegative");
  if (config.predictive_samples < 1)
    throw BadParams("active_loop: predictive_samples must be positive");
  if (test.features.cols() != d)
    throw DimensionMismatch("active_loop: test features do not match the pool");
  const Index needed = config.remove_selected ? config.rounds * m : m;
  if (config.rounds > 0 && needed > n)
    throw PoolTooSmall("active_loop: pool cannot supply the requested batches");

  const RngStream root(config.optimizer.seed);

  // Initial state exactly as run() would build it.
  Vector<Scalar> mean0 = config.optimizer.init_mean;
  if (mean0.size() == 0) mean0 = Vector<Scalar>::Zero(d);
  if (mean0.size() != d) throw DimensionMismatch("active_loop: init_mean does not match pool");
  const Scalar var = config.optimizer.init_sigma * config.optimizer.init_sigma;
  GaussianState<Scalar> q =
      detail::is_diagonal_method(config.optimizer.method)
          ? GaussianState<Scalar>::diag_from_variances(mean0, Vector<Scalar>::Constant(d, var))
          : GaussianState<Scalar>::from_cov(
                mean0, Matrix<Scalar>(var * Matrix<Scalar>::Identity(d, d)));
  if (config.optimizer.init_state.has_value()) q = *config.optimizer.init_state;

  std::vector<ActiveRecord<Scalar>> curve;
  curve.push_back({0, 0, test_log_loss<Scalar>(q.mean(), test.features, test.labels)});

  std::vector<Index> available(static_cast<std::size_t>(n));
  std::iota(available.begin(), available.end(), Index{0});

  for (Index r = 1; r <= config.rounds; ++r) {
    const auto pool_rows = static_cast<Index>(available.size());
    std::vector<Index> chosen;
    if (config.acquisition == Acquisition::Entropy) {
      Dataset<Scalar> view;
      view.features.resize(pool_rows, d);
      view.labels.resize(pool_rows);
      for (Index i = 0; i < pool_rows; ++i) {
        view.features.row(i) = pool.features.row(available[static_cast<std::size_t>(i)]);
        view.labels[i] = pool.labels[available[static_cast<std::size_t>(i)]];
      }
      const AcquisitionResult<Scalar> picked =
          select_batch(view, q, m, config.predictive_samples,
                       root.substream(7, static_cast<std::uint64_t>(r)));
      for (const Index i : picked.selected_indices)
        chosen.push_back(available[static_cast<std::size_t>(i)]);
    } else {
      std::vector<Index> shuffled = available;
      RngStream pick_stream = root.substream(8, static_cast<std::uint64_t>(r));
      deterministic_shuffle(shuffled, pick_stream);
      chosen.assign(shuffled.begin(), shuffled.begin() + m);
    }
    // Canonical data order: the objective must not depend on ranking.
    std::sort(chosen.begin(), chosen.end());

    Matrix<Scalar> bx(m, d);
    Vector<Scalar> by(m);
    for (Index i = 0; i < m; ++i) {
      bx.row(i) = pool.features.row(chosen[static_cast<std::size_t>(i)]);
      by[i] = pool.labels[chosen[static_cast<std::size_t>(i)]];
    }
    const LogisticObjective<Scalar> round_objective(bx, by, config.reg_strength);

    OptimizerConfig<Scalar> step_config = config.optimizer;
    step_config.init_state = q;
    step_config.minibatch_size = 0;
    step_config.seed = root.substream(9, static_cast<std::uint64_t>(r)).id();
    const RunResult<Scalar> stepped = run(round_objective, step_config);
    q = *stepped.final_state;

    if (config.remove_selected) {
      std::vector<Index> rest;
      rest.reserve(available.size() - static_cast<std::size_t>(m));
      std::set_difference(available.begin(), available.end(), chosen.begin(), chosen.end(),
                          std::back_inserter(rest));
      available = std::move(rest);
    }

    curve.push_back({r, curve.back().examples_seen + m,
                     test_log_loss<Scalar>(q.mean(), test.features, test.labels)});
  }
  return curve;
}

}  // namespace van
