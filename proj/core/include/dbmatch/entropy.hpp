#pragma once
// Entropy rates and mutual information of the joint process models, both in
// closed form and by Monte-Carlo estimation. Everything is in bits per
// symbol so the database growth rate R = log2(n)/m compares directly.

#include <cstdint>
#include <vector>

#include "dbmatch/rng.hpp"
#include "dbmatch/spec.hpp"

namespace dbmatch {

enum class EntropyMode { analytic, monte_carlo };

struct EntropyReport {
    double h1 = 0.0;   // per-symbol rate of side 1
    double h2 = 0.0;   // per-symbol rate of side 2
    double h12 = 0.0;  // per-symbol joint rate
    double mi = 0.0;   // h1 + h2 - h12
    EntropyMode mode = EntropyMode::analytic;
    double stderr_mi = 0.0;  // standard error of mi (0 for analytic)
    // Per-component standard errors (0 for analytic).
    double stderr_h1 = 0.0;
    double stderr_h2 = 0.0;
    double stderr_h12 = 0.0;
};

// Closed-form rates.
//   IidDiscrete: Shannon entropies of the marginal and joint pmfs.
//   IidGaussian: differential entropies; h12 = log2(2*pi*e*sqrt(1-rho^2)),
//                mi = -0.5*log2(1-rho^2).
//   MarkovDiscrete: conditional rates given the previous order_l pairs under
//                the stationary block distribution, so mi is the conditional
//                mutual information between the next two coordinates.
// Markov chains whose block chain is reducible or periodic are rejected.
EntropyReport entropy_rates(const JointProcessSpec& spec);

// Monte-Carlo estimate: averages of -(1/m) log2 f_m over `trials` sampled
// blocks of length m, for both marginals and the joint. Deterministic given
// the rng state.
EntropyReport estimate_entropy_rates(const JointProcessSpec& spec, std::size_t m,
                                     std::size_t trials, SeededRng& rng);

// Unique stationary distribution of the chain on order_l-blocks of pairs,
// by power iteration to max-norm residual <= 1e-12 (at most 1e6 sweeps).
// The kernel must be row-stochastic and induce an irreducible, aperiodic
// block chain; violations raise ValidationError naming the failure.
std::vector<double> stationary_block_distribution(const std::vector<double>& kernel,
                                                  std::size_t order_l,
                                                  std::size_t alphabet_size_1,
                                                  std::size_t alphabet_size_2);

}  // namespace dbmatch
