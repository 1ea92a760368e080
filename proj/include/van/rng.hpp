#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace van {

namespace detail {

/// splitmix64 output mix (Steele, Lea & Flood; public-domain reference
/// constants). Counter-based use: word(i) = mix(state + i * gamma).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/// Deterministic counter-based random stream.
///
/// Every draw is a pure function of (seed, stream id, counter), so a
/// stream can be replayed, split, or accessed by index without shared
/// state. Substreams derived with distinct tags are independent for all
/// practical purposes. Do not interleave the stateful draws with the
/// *_at indexed draws on the same stream; give each consumer its own
/// substream instead.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(detail::mix64(detail::mix64(seed) ^
                            detail::mix64(0xd1342543de82ef95ULL * (stream + 1)))) {}

  /// Derives an independent stream keyed by (tag, index).
  RngStream substream(std::uint64_t tag, std::uint64_t index = 0) const {
    RngStream child(0);
    child.base_ = detail::mix64(base_ ^ detail::mix64(tag * 0xa0761d6478bd642fULL +
                                                      index * 0xe7037ed1a0b428dbULL + 1));
    return child;
  }

  /// Identity of this stream; recorded in estimates for reproducibility.
  std::uint64_t id() const { return base_; }

  /// Raw 64-bit word at an absolute counter position (pure).
  std::uint64_t word_at(std::uint64_t i) const {
    return detail::mix64(base_ + i * detail::kGamma);
  }

  /// Uniform draw in the open interval (0, 1) at counter position i.
  double uniform_at(std::uint64_t i) const {
    return static_cast<double>(word_at(i) >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  /// Standard normal draw number k (pure; consumes word slots 2k, 2k+1).
  double normal_at(std::uint64_t k) const {
    const double u1 = uniform_at(2 * k);
    const double u2 = uniform_at(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  std::uint64_t next_u64() { return word_at(counter_++); }

  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  double normal() {
    const std::uint64_t k = counter_;
    counter_ += 2;
    const double u1 = uniform_at(k);
    const double u2 = uniform_at(k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  /// Uniform integer in [0, n); n must be positive. Lemire-style bounded
  /// draw without rejection bias beyond 2^-64, stable across platforms.
  std::uint64_t uniform_index(std::uint64_t n) {
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
    return static_cast<std::uint64_t>(wide >> 64);
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// In-place Fisher-Yates shuffle. std::shuffle is implementation-defined
/// given the same bits, so traces would not reproduce across standard
/// libraries; this spelling is pinned.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, RngStream& stream) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(stream.uniform_index(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace van
