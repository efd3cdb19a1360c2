#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>

namespace pfmc {

namespace detail {

inline std::uint64_t rotl64(std::uint64_t x, int r) {
  return (x << r) | (x >> (64 - r));
}

// Threefry-2x64, 20 rounds. Counter-based: the output block is a pure
// function of (key, counter), so disjoint counter regions under the same
// key give non-overlapping draw sequences.
inline std::array<std::uint64_t, 2> threefry2x64(std::uint64_t k0, std::uint64_t k1,
                                                 std::uint64_t c0, std::uint64_t c1) {
  static constexpr int kRot[8] = {16, 42, 12, 31, 16, 32, 24, 21};
  const std::uint64_t ks[3] = {k0, k1, 0x1BD11BDAA9FC1A22ull ^ k0 ^ k1};
  std::uint64_t x0 = c0 + ks[0];
  std::uint64_t x1 = c1 + ks[1];
  for (int i = 1; i <= 20; ++i) {
    x0 += x1;
    x1 = rotl64(x1, kRot[(i - 1) % 8]);
    x1 ^= x0;
    if (i % 4 == 0) {
      const int s = i / 4;
      x0 += ks[s % 3];
      x1 += ks[(s + 1) % 3] + static_cast<std::uint64_t>(s);
    }
  }
  return {x0, x1};
}

}  // namespace detail

/// Deterministic random stream keyed by (seed, stream id).
///
/// Identical (seed, stream) always replays the identical sequence. Distinct
/// stream ids index statistically independent sequences, as do forks: a fork
/// owns one 2^64-block counter region of the parent's key, so no two forks
/// (and no fork and its root) ever consume the same counters. Forks can only
/// be taken from a root stream; they are intended for per-particle and
/// per-worker substreams.
///
/// Not thread safe; each stream is single-owner while in use.
class RandomStream {
 public:
  RandomStream() : RandomStream(0, 0) {}
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : key_{seed, stream}, ctr_hi_(0), ctr_lo_(0), buf_pos_(2) {}

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t stream() const { return key_[1]; }

  /// Substream over counter region `domain`. Only valid on a root stream.
  RandomStream fork(std::uint64_t domain) const {
    assert(ctr_hi_ == 0 && "fork() must be taken from a root stream");
    RandomStream s(key_[0], key_[1]);
    s.ctr_hi_ = domain + 1;  // region 0 belongs to the root
    return s;
  }

  std::uint64_t next_u64() {
    if (buf_pos_ >= 2) {
      const auto block = detail::threefry2x64(key_[0], key_[1], ctr_lo_++, ctr_hi_);
      buf_[0] = block[0];
      buf_[1] = block[1];
      buf_pos_ = 0;
    }
    return buf_[buf_pos_++];
  }

  /// Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (Box-Muller; consumes exactly two uniforms).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  std::uint64_t key_[2];
  std::uint64_t ctr_hi_;
  std::uint64_t ctr_lo_;
  std::uint64_t buf_[2] = {0, 0};
  int buf_pos_;
};

}  // namespace pfmc
