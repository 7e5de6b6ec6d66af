#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace m3g {

uint64_t fnv1a64(const void* data, std::size_t n, uint64_t state = 0xcbf29ce484222325ULL);
uint64_t fnv1a64(std::string_view s, uint64_t state = 0xcbf29ce484222325ULL);

// Derives an independent stream seed from (seed, tag). Used so that e.g. the
// epoch-shuffle stream does not depend on whether variant sampling is enabled.
uint64_t mix_seed(uint64_t seed, std::string_view tag);

// Deterministic random source. std::mt19937_64 is fully specified by the
// standard; the distribution mappings below are hand-rolled because the
// std::*_distribution classes are implementation-defined and would break
// bit-reproducibility across standard libraries.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Unbiased integer in [0, n) via rejection sampling.
    std::size_t uniform_index(std::size_t n);

    // Double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal draw (Box-Muller, no cached spare).
    double gaussian();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 gen_;
};

} // namespace m3g
