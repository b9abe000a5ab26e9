#pragma once

// Counter-based pseudo-random generator (Philox 4x32, 10 rounds).
//
// Every random decision in the sampler is addressed by (seed, phase, stream):
// the o-th order draw reads stream o of the "order" phase, the DAG completing
// that order reads stream o of the "dag" phase, and so on.  Because a stream
// is a pure function of its address, results are bit-identical regardless of
// worker count, processing order, or cache state — no generator state is
// shared or advanced across logical draws.
//
// Uniform doubles are produced by the canonical 53-bit mapping
// (u64 >> 11) * 2^-53, giving values in [0, 1) that are reproducible across
// platforms (std::uniform_real_distribution is not pinned down by the
// standard and differs between library implementations).

#include <array>
#include <cstdint>

namespace dagsample {

enum class RngPhase : std::uint32_t {
  kOrder = 1,    // order draws, one stream per order index
  kDag = 2,      // DAG completion, one stream per original order index
  kSynthetic = 3, // synthetic dataset generation
  kHarness = 4,  // validation-harness auxiliary draws
};

class PhiloxRng {
 public:
  PhiloxRng(std::uint64_t seed, RngPhase phase, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        base_{0u,
              static_cast<std::uint32_t>(stream),
              static_cast<std::uint32_t>(stream >> 32),
              static_cast<std::uint32_t>(phase)} {}

  std::uint32_t next_u32() {
    if (index_ == 4) {
      block_ = generate(base_, key_);
      ++base_[0];
      index_ = 0;
    }
    return block_[index_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static std::array<std::uint32_t, 4> generate(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> base_;
  std::array<std::uint32_t, 4> block_{};
  int index_ = 4;  // forces generation on first use
};

}  // namespace dagsample
