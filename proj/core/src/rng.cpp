#include "dbmatch/rng.hpp"

#include <cmath>

namespace dbmatch {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(root) ^ fnv1a64(stream)) ^ index);
}

std::uint64_t SeededRng::uniform_below(std::uint64_t bound) {
    // Lemire multiply-shift with rejection; exact uniformity.
    while (true) {
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        std::uint64_t lo = static_cast<std::uint64_t>(m);
        if (lo >= bound || lo >= (0 - bound) % bound) {
            return static_cast<std::uint64_t>(m >> 64);
        }
    }
}

std::pair<double, double> SeededRng::normal_pair() {
    double u1 = uniform_pos();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

std::size_t SeededRng::categorical(std::span<const double> pmf) {
    double u = uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pmf.size(); ++i) {
        acc += pmf[i];
        if (u < acc) return i;
    }
    return pmf.empty() ? 0 : pmf.size() - 1;
}

}  // namespace dbmatch
