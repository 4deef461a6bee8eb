#include "mtl/rng.hpp"

namespace mtl {

namespace {
constexpr std::uint64_t kGolden = 0x9E37'79B9'7F4A'7C15ull;
}

// SplitMix64 finalizer (Stafford variant 13).
std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58'476D'1CE4'E5B9ull;
  x ^= x >> 27;
  x *= 0x94D0'49BB'1331'11EBull;
  x ^= x >> 31;
  return x;
}

CounterRng::CounterRng(const StreamKey& key) {
  std::uint64_t h = mix64(key.seed + kGolden);
  h = mix64(h ^ (key.trial + 2 * kGolden));
  h = mix64(h ^ (key.tag + 3 * kGolden));
  h = mix64(h ^ (key.index + 4 * kGolden));
  key_ = h;
}

CounterRng::result_type CounterRng::operator()() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

}  // namespace mtl
