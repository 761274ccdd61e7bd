#pragma once
// Sampling and exact log-density evaluation for the joint process models.
// All log values are base 2 (bits). Zero-probability observations yield
// -infinity rather than an error: the matcher legitimately evaluates
// cross-pair densities that can land on zero-mass cells.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "dbmatch/rng.hpp"
#include "dbmatch/spec.hpp"

namespace dbmatch {

// One sampled entry pair; discrete variants fill the u32 vectors, the
// Gaussian variant fills the f64 vectors.
struct PairSample {
    std::vector<std::uint32_t> u1_sym;
    std::vector<std::uint32_t> u2_sym;
    std::vector<double> u1_real;
    std::vector<double> u2_real;
};

// Draws the first m coordinates of one matching entry pair. Stream usage per
// step is fixed, so a longer draw from the same rng state extends a shorter
// one without resampling the prefix. Markov requires m >= order_l.
PairSample sample_pair(const JointProcessSpec& spec, std::size_t m, SeededRng& rng);

// log2 of the joint density/pmf of (u1, u2); lengths must match.
double log_joint_density(const JointProcessSpec& spec,
                         std::span<const std::uint32_t> u1,
                         std::span<const std::uint32_t> u2);
double log_joint_density(const JointProcessSpec& spec,
                         std::span<const double> u1,
                         std::span<const double> u2);

// log2 of the marginal density/pmf of one side (side is 1 or 2). For Markov
// specs the hidden coordinate is summed out exactly with a scaled forward
// recursion, which is valid whether or not the marginal is itself Markov.
double log_marginal_density(const JointProcessSpec& spec, int side,
                            std::span<const std::uint32_t> u);
double log_marginal_density(const JointProcessSpec& spec, int side,
                            std::span<const double> u);

// Convenience dispatch over either payload type.
using EntryRef = std::variant<std::span<const std::uint32_t>, std::span<const double>>;
double log_joint_density(const JointProcessSpec& spec, EntryRef u1, EntryRef u2);
double log_marginal_density(const JointProcessSpec& spec, int side, EntryRef u);

}  // namespace dbmatch
