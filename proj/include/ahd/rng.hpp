// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace ahd {

// Seed value carried through configs and instance files. All randomness in
// the engine flows from one of these through SplitMix64 streams, so runs
// replay bit-identically on any platform.
struct RngSeed {
    std::uint64_t value = 0;
};

// SplitMix64 (Steele, Lea, Flood 2014). Chosen over std::mt19937_64 because
// the bounded-draw helpers below are pinned here too; std::uniform_*
// distributions are not bit-portable across standard libraries.
class Rng {
  public:
    explicit Rng(RngSeed seed) : state_(seed.value) {}
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Unbiased via rejection sampling.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1)
            return 0;
        const std::uint64_t threshold = (0ULL - n) % n; // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold)
                return r % n;
        }
    }

    // Uniform double in [0, 1) from the top 53 bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool next_coin() { return (next_u64() & 1ULL) != 0; }

    // Inverse-transform Weibull draw; always >= 0.
    double next_weibull(double shape, double scale) {
        const double u = next_double();
        return scale * std::pow(-std::log(1.0 - u), 1.0 / shape);
    }

  private:
    std::uint64_t state_;
};

// FNV-1a over a label string; used to key derived streams by purpose.
inline std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Derived stream: mixes a master seed with a label and an index through the
// SplitMix64 finalizer. Train/test suites pass distinct labels so the same
// user seed never yields overlapping instance streams.
inline RngSeed derive_seed(RngSeed master, std::string_view label, std::uint64_t index = 0) {
    Rng mix(master.value ^ hash_label(label) ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
    return RngSeed{mix.next_u64()};
}

} // namespace ahd
