#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>

namespace onoff {

namespace detail {

// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  // FNV-1a, then finalized
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return mix64(h);
}

}  // namespace detail

/// Counter-based random stream. The n-th output is a pure function of
/// (key, n), so a stream can be re-created anywhere and produce the same
/// draws regardless of which thread or in which order it is consumed.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  constexpr explicit RandomStream(std::uint64_t key = 0) noexcept
      : key_(detail::mix64(key ^ 0x6A09E667F3BCC909ULL)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    // Two rounds of mixing decorrelate nearby keys as well as nearby counters.
    return detail::mix64(detail::mix64(key_ + counter_++ * detail::kGolden) ^ key_);
  }

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  constexpr double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t position() const noexcept { return counter_; }
  constexpr void seek(std::uint64_t position) noexcept { counter_ = position; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// One label in a stream derivation tuple: either a string tag or an integer.
class StreamLabel {
 public:
  constexpr StreamLabel(std::string_view s) noexcept  // NOLINT(implicit)
      : value_(detail::hash_string(s)) {}
  constexpr StreamLabel(const char* s) noexcept  // NOLINT(implicit)
      : StreamLabel(std::string_view(s)) {}
  StreamLabel(const std::string& s) noexcept  // NOLINT(implicit)
      : StreamLabel(std::string_view(s)) {}
  template <typename Int>
    requires std::is_integral_v<Int>
  constexpr StreamLabel(Int v) noexcept  // NOLINT(implicit)
      : value_(detail::mix64(static_cast<std::uint64_t>(v) + 0x243F6A8885A308D3ULL)) {}

  constexpr std::uint64_t value() const noexcept { return value_; }

 private:
  std::uint64_t value_;
};

/// Derive an independent stream from a root seed and a tuple of labels,
/// e.g. derive_stream(seed, {"theorem1", N, replication, "service"}).
/// Identical tuples give identical streams; the derivation is order
/// sensitive so (a, b) and (b, a) differ.
constexpr RandomStream derive_stream(std::uint64_t root,
                                     std::initializer_list<StreamLabel> labels) noexcept {
  std::uint64_t h = detail::mix64(root);
  std::uint64_t position = 1;
  for (const auto& label : labels) {
    h = detail::mix64(h ^ detail::mix64(label.value() + position * detail::kGolden));
    ++position;
  }
  return RandomStream(h);
}

}  // namespace onoff
