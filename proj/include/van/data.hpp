#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "van/errors.hpp"
#include "van/rng.hpp"
#include "van/types.hpp"

namespace van {

enum class LabelKind { Regression, Classification };

/// A dense supervised dataset with named row-index splits.
template <typename Scalar>
struct Dataset {
  Matrix<Scalar> features;  // n x d
  Vector<Scalar> labels;    // n
  std::string name;
  std::vector<std::string> feature_names;  // optional, empty when unnamed
  std::map<std::string, std::vector<Index>> splits;

  Index num_examples() const { return features.rows(); }
  Index dim() const { return features.cols(); }

  void add_split(const std::string& split_name, std::vector<Index> indices) {
    if (indices.empty()) throw EmptySplit("split '" + split_name + "' is empty");
    for (const Index i : indices)
      if (i < 0 || i >= num_examples())
        throw OutOfRange("split '" + split_name + "' index out of range");
    splits[split_name] = std::move(indices);
  }

  const std::vector<Index>& split(const std::string& split_name) const {
    const auto it = splits.find(split_name);
    if (it == splits.end() || it->second.empty())
      throw EmptySplit("no split named '" + split_name + "'");
    return it->second;
  }

  Matrix<Scalar> features_of(const std::string& split_name) const {
    const auto& idx = split(split_name);
    Matrix<Scalar> out(static_cast<Index>(idx.size()), dim());
    for (Index r = 0; r < out.rows(); ++r) out.row(r) = features.row(idx[r]);
    return out;
  }

  Vector<Scalar> labels_of(const std::string& split_name) const {
    const auto& idx = split(split_name);
    Vector<Scalar> out(static_cast<Index>(idx.size()));
    for (Index r = 0; r < out.rows(); ++r) out[r] = labels[idx[r]];
    return out;
  }
};

namespace detail {

inline bool parse_double_token(const std::string& tok, double& out) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size() && tok.size() > 0;
}

}  // namespace detail

/// Reads sparse text rows of the form `label index:value ...` with
/// 1-based, strictly increasing indices. The feature dimension is the
/// largest index seen anywhere in the file. Classification labels may
/// be written as {-1,+1} or as {0,1}; the latter are normalized to
/// {-1,+1}. A file mixing the two conventions (a -1 alongside a 0) is
/// ambiguous and rejected.
template <typename Scalar = double>
Dataset<Scalar> read_libsvm(const std::string& path, LabelKind kind) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");

  struct Row {
    double label;
    std::vector<std::pair<Index, double>> entries;
  };
  std::vector<Row> rows;
  Index max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t pos = 0;
    const auto skip_ws = [&] {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r'))
        ++pos;
    };
    const auto next_token = [&](std::size_t& start) {
      skip_ws();
      start = pos;
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r')
        ++pos;
      return line.substr(start, pos - start);
    };

    std::size_t col = 0;
    std::string tok = next_token(col);
    if (tok.empty()) continue;  // blank line

    Row row;
    if (!detail::parse_double_token(tok, row.label))
      throw ParseError(line_no, col + 1, "label is not a number");
    if (!std::isfinite(row.label))
      throw ParseError(line_no, col + 1, "label is not finite");
    if (kind == LabelKind::Classification && row.label != 1.0 && row.label != -1.0 &&
        row.label != 0.0)
      throw LabelDomainError("line " + std::to_string(line_no) +
                             ": classification label must be +1, -1, or 0/1");

    Index prev_index = 0;
    while (true) {
      std::size_t tok_col = 0;
      tok = next_token(tok_col);
      if (tok.empty()) break;
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos)
        throw ParseError(line_no, tok_col + 1, "expected index:value");
      double idx_val = 0;
      if (!detail::parse_double_token(tok.substr(0, colon), idx_val) ||
          idx_val != std::floor(idx_val))
        throw ParseError(line_no, tok_col + 1, "feature index is not an integer");
      const Index idx = static_cast<Index>(idx_val);
      if (idx < 1) throw ParseError(line_no, tok_col + 1, "feature index must be >= 1");
      if (idx <= prev_index)
        throw ParseError(line_no, tok_col + 1, "feature indices must be strictly increasing");
      double value = 0;
      if (!detail::parse_double_token(tok.substr(colon + 1), value))
        throw ParseError(line_no, tok_col + static_cast<std::size_t>(colon) + 2,
                         "feature value is not a number");
      if (!std::isfinite(value))
        throw ParseError(line_no, tok_col + static_cast<std::size_t>(colon) + 2,
                         "feature value is not finite");
      prev_index = idx;
      max_index = std::max(max_index, idx);
      row.entries.emplace_back(idx, value);
    }
    rows.push_back(std::move(row));
  }

  if (kind == LabelKind::Classification) {
    bool has_zero = false, has_minus = false;
    for (const Row& row : rows) {
      has_zero |= row.label == 0.0;
      has_minus |= row.label == -1.0;
    }
    if (has_zero && has_minus)
      throw LabelDomainError("file mixes {0,1} and {-1,+1} label conventions");
    if (has_zero)
      for (Row& row : rows)
        if (row.label == 0.0) row.label = -1.0;
  }

  Dataset<Scalar> data;
  data.name = path;
  data.features = Matrix<Scalar>::Zero(static_cast<Index>(rows.size()), max_index);
  data.labels.resize(static_cast<Index>(rows.size()));
  for (Index r = 0; r < data.num_examples(); ++r) {
    data.labels[r] = static_cast<Scalar>(rows[static_cast<std::size_t>(r)].label);
    for (const auto& [idx, value] : rows[static_cast<std::size_t>(r)].entries)
      data.features(r, idx - 1) = static_cast<Scalar>(value);
  }
  return data;
}

/// Writes the dataset in the sparse text format read_libsvm accepts;
/// exact zeros are omitted. Row order is preserved, splits are not
/// serialized.
template <typename Scalar>
void write_libsvm(const Dataset<Scalar>& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  char buf[64];
  for (Index r = 0; r < data.num_examples(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(data.labels[r]));
    out << buf;
    for (Index c = 0; c < data.dim(); ++c) {
      const double v = static_cast<double>(data.features(r, c));
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ' ' << (c + 1) << ':' << buf;
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

template <typename Scalar>
struct StandardizeStats {
  Vector<Scalar> shift;  // per-feature mean of the stats split
  Vector<Scalar> scale;  // per-feature standard deviation (1 where degenerate)
};

/// Centers and scales every row using statistics computed on the named
/// split only, so evaluation splits never leak into the normalization.
/// Zero-variance features are centered but left unscaled.
template <typename Scalar>
StandardizeStats<Scalar> standardize(Dataset<Scalar>& data, const std::string& stats_split) {
  const auto& idx = data.split(stats_split);
  const Index d = data.dim();
  StandardizeStats<Scalar> stats;
  stats.shift = Vector<Scalar>::Zero(d);
  stats.scale = Vector<Scalar>::Ones(d);

  for (const Index r : idx) stats.shift += data.features.row(r).transpose();
  stats.shift /= static_cast<Scalar>(idx.size());

  Vector<Scalar> sq = Vector<Scalar>::Zero(d);
  for (const Index r : idx) {
    const Vector<Scalar> delta = data.features.row(r).transpose() - stats.shift;
    sq += delta.cwiseProduct(delta);
  }
  for (Index c = 0; c < d; ++c) {
    const Scalar sd = std::sqrt(sq[c] / static_cast<Scalar>(idx.size()));
    if (sd > Scalar(1e-12)) stats.scale[c] = sd;
  }

  data.features.rowwise() -= stats.shift.transpose();
  data.features.array().rowwise() /= stats.scale.transpose().array();
  return stats;
}

template <typename Scalar>
struct SyntheticRegression {
  Dataset<Scalar> data;
  Vector<Scalar> coefficients;  // ground-truth sparse weights
};

/// Gaussian design X with a sparse coefficient vector: a `sparsity`
/// fraction of coordinates is active with magnitudes in [1, 2], signs
/// alternating; y = X w + noise.
template <typename Scalar = double>
SyntheticRegression<Scalar> make_synthetic_regression(Index n, Index d, double sparsity,
                                                      double noise_sd, std::uint64_t seed) {
  if (n < 1 || d < 1) throw BadParams("make_synthetic_regression: n and d must be positive");
  if (sparsity < 0.0 || sparsity > 1.0)
    throw BadParams("make_synthetic_regression: sparsity must lie in [0, 1]");
  if (noise_sd < 0.0) throw BadParams("make_synthetic_regression: negative noise");

  const RngStream root(seed);
  const RngStream fx = root.substream(1);
  const RngStream fw = root.substream(2);
  const RngStream fn = root.substream(3);
  RngStream fsupport = root.substream(4);

  SyntheticRegression<Scalar> out;
  out.data.name = "synthetic-regression";
  out.data.features.resize(n, d);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < d; ++c)
      out.data.features(r, c) = static_cast<Scalar>(
          fx.normal_at(static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(d) +
                       static_cast<std::uint64_t>(c)));

  const Index active = std::min<Index>(d, static_cast<Index>(std::ceil(sparsity * d)));
  std::vector<Index> order(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
  deterministic_shuffle(order, fsupport);

  out.coefficients = Vector<Scalar>::Zero(d);
  for (Index k = 0; k < active; ++k) {
    const double magnitude = 1.0 + fw.uniform_at(static_cast<std::uint64_t>(k));
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    out.coefficients[order[static_cast<std::size_t>(k)]] = static_cast<Scalar>(sign * magnitude);
  }

  out.data.labels = out.data.features * out.coefficients;
  for (Index r = 0; r < n; ++r)
    out.data.labels[r] += static_cast<Scalar>(noise_sd * fn.normal_at(static_cast<std::uint64_t>(r)));
  return out;
}

/// Two unit-variance Gaussian clusters with centers `separation` apart
/// along the all-ones direction; labels alternate +1 / -1 by row.
template <typename Scalar = double>
Dataset<Scalar> make_synthetic_blobs(Index n, Index d, double separation, std::uint64_t seed) {
  if (n < 2 || d < 1) throw BadParams("make_synthetic_blobs: need n >= 2 and d >= 1");
  if (separation < 0.0) throw BadParams("make_synthetic_blobs: negative separation");

  const RngStream noise = RngStream(seed).substream(1);
  Vector<Scalar> direction = Vector<Scalar>::Constant(d, Scalar(1) / std::sqrt(Scalar(d)));

  Dataset<Scalar> data;
  data.name = "synthetic-blobs";
  data.features.resize(n, d);
  data.labels.resize(n);
  for (Index r = 0; r < n; ++r) {
    const Scalar label = (r % 2 == 0) ? Scalar(1) : Scalar(-1);
    data.labels[r] = label;
    for (Index c = 0; c < d; ++c)
      data.features(r, c) =
          label * static_cast<Scalar>(separation / 2) * direction[c] +
          static_cast<Scalar>(noise.normal_at(static_cast<std::uint64_t>(r) *
                                                  static_cast<std::uint64_t>(d) +
                                              static_cast<std::uint64_t>(c)));
  }
  return data;
}

/// Adds shuffled train/validation/test splits in a 70/10/20 ratio.
/// Every split receives at least one row; n < 3 cannot be split.
template <typename Scalar>
void make_default_splits(Dataset<Scalar>& data, std::uint64_t seed) {
  const Index n = data.num_examples();
  if (n < 3) throw EmptySplit("make_default_splits: need at least 3 rows");

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  RngStream stream = RngStream(seed).substream(7);
  deterministic_shuffle(order, stream);

  Index n_train = static_cast<Index>(0.7 * static_cast<double>(n));
  Index n_valid = static_cast<Index>(0.1 * static_cast<double>(n));
  n_train = std::max<Index>(1, n_train);
  n_valid = std::max<Index>(1, n_valid);
  if (n_train + n_valid >= n) {
    n_train = n - 2;
    n_valid = 1;
  }
  const auto take = [&](Index begin, Index count) {
    return std::vector<Index>(order.begin() + begin, order.begin() + begin + count);
  };
  data.add_split("train", take(0, n_train));
  data.add_split("validation", take(n_train, n_valid));
  data.add_split("test", take(n_train + n_valid, n - n_train - n_valid));
}

/// New dataset holding only the rows of one split, in split order; the
/// result carries no splits of its own.
template <typename Scalar>
Dataset<Scalar> subset(const Dataset<Scalar>& data, const std::string& split_name) {
  Dataset<Scalar> out;
  out.name = data.name + ":" + split_name;
  out.feature_names = data.feature_names;
  out.features = data.features_of(split_name);
  out.labels = data.labels_of(split_name);
  return out;
}

}  // namespace van
