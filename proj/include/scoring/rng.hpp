#pragma once

#include <cstdint>

namespace scoring {

namespace detail {
// SplitMix64 step: increment by the golden-ratio constant, then finalize.
// Used both as the per-draw output function and for key derivation.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

double normal_quantile(double p);  // defined in numerics.cpp

// Counter-based uniform stream. Draw i of stream (root_seed, stream_id) is a
// pure function of (root_seed, stream_id, i), so replicates and observations
// can be given their own streams and produce identical output regardless of
// evaluation order or thread schedule. Gaussian variates come from the
// inverse CDF, one uniform per draw.
class RngStream {
public:
  explicit RngStream(std::uint64_t root_seed, std::uint64_t stream_id = 0)
      : key_(derive_key(root_seed, stream_id)) {}

  // Child stream; keyed mixing keeps substreams of distinct ids independent.
  RngStream substream(std::uint64_t id) const {
    RngStream s(*this);
    s.key_ = detail::splitmix64(key_ ^ detail::splitmix64(id ^ 0xA3EC4E93C0A1B2C5ULL));
    s.counter_ = 0;
    return s;
  }

  std::uint64_t next_u64() {
    return detail::splitmix64(key_ ^ detail::splitmix64(counter_++));
  }

  // Uniform on the open interval (0, 1); safe to feed into quantiles.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_quantile(uniform()); }

  std::uint64_t key() const { return key_; }

private:
  static std::uint64_t derive_key(std::uint64_t root_seed, std::uint64_t stream_id) {
    std::uint64_t k = detail::splitmix64(root_seed);
    return detail::splitmix64(k ^ detail::splitmix64(stream_id ^ 0x9D2C5680E4F1D3A7ULL));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace scoring
