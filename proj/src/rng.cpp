#include "m3g/rng.hpp"

#include <cmath>
#include <cstring>

namespace m3g {

uint64_t fnv1a64(const void* data, std::size_t n, uint64_t state) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        state ^= p[i];
        state *= 0x00000100000001b3ULL;
    }
    return state;
}

uint64_t fnv1a64(std::string_view s, uint64_t state) {
    return fnv1a64(s.data(), s.size(), state);
}

uint64_t mix_seed(uint64_t seed, std::string_view tag) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(seed >> (8 * i));
    uint64_t h = fnv1a64(bytes, 8);
    return fnv1a64(tag, h);
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n <= 1) return 0;
    const uint64_t bound = n;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
        x = gen_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

double Rng::gaussian() {
    // 1 - uniform() keeps u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace m3g
