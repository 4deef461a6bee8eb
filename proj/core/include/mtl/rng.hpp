#pragma once

#include <cstdint>
#include <limits>

namespace mtl {

/// Identifies an independent random stream. Streams are derived from the
/// full tuple, so two keys that differ in any field never share state.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::uint64_t tag = 0;
  std::uint64_t index = 0;
};

namespace stream_tag {
inline constexpr std::uint64_t shared_vector = 0x5348'4152'4544ull;
inline constexpr std::uint64_t task_vector = 0x5441'534bull;
inline constexpr std::uint64_t features = 0x4645'4154ull;
inline constexpr std::uint64_t test_points = 0x5445'5354ull;
}  // namespace stream_tag

/// Counter-based generator: output i is a bijective mix of (key, i).
/// Copying the generator forks the stream; there is no hidden shared state.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(const StreamKey& key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }
  void discard(std::uint64_t n) noexcept { counter_ += n; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace mtl
