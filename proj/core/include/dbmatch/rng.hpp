#pragma once
// Deterministic randomness. Every stochastic routine in the library takes an
// explicit SeededRng (or a root seed from which child seeds are derived), so
// results are reproducible bit-for-bit and independent of worker count.
//
// All sampling primitives are implemented on top of the raw 64-bit stream:
// the standard library's distribution objects are implementation-defined and
// would not pin outputs, so they are not used.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace dbmatch {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

// Child-seed derivation: hash(root, stream tag, index). Streams with distinct
// tags or indices are statistically independent, and generation order does
// not matter.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index);

class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1), 53 bits of mantissa.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() { return 1.0 - uniform01(); }

    // Unbiased integer in [0, bound). bound >= 1.
    std::uint64_t uniform_below(std::uint64_t bound);

    // Two independent standard normals per call (Box-Muller). Consumes
    // exactly two raw draws, keeping per-step stream usage fixed.
    std::pair<double, double> normal_pair();

    // Index sampled from an (unnormalized tolerated) pmf; one raw draw.
    std::size_t categorical(std::span<const double> pmf);

    // In-place Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace dbmatch
