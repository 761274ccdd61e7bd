#include "dbmatch/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dbmatch/errors.hpp"
#include "dbmatch/model.hpp"

namespace dbmatch {

namespace {

constexpr double kLog2TwoPiE = 4.0941911703612822412128223927364;  // log2(2*pi*e)

double shannon_entropy_bits(std::span<const double> pmf) {
    double h = 0.0;
    for (double p : pmf) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

struct BlockChain {
    std::size_t n_pair = 0;
    std::size_t n_block = 0;
    std::size_t shift_mod = 0;
    const std::vector<double>* kernel = nullptr;

    std::size_t shift(std::size_t block, std::size_t p) const {
        return (block % shift_mod) * n_pair + p;
    }
};

BlockChain make_block_chain(const std::vector<double>& kernel, std::size_t order_l,
                            std::size_t k1, std::size_t k2) {
    if (order_l == 0 || k1 == 0 || k2 == 0) {
        throw ValidationError("stationary_block_distribution: sizes must be positive");
    }
    BlockChain c;
    c.n_pair = k1 * k2;
    c.n_block = 1;
    for (std::size_t i = 0; i < order_l; ++i) {
        if (c.n_block > kMaxBlockStates / c.n_pair) {
            throw ValidationError("stationary_block_distribution: state space exceeds cap");
        }
        c.n_block *= c.n_pair;
    }
    c.shift_mod = std::max<std::size_t>(1, c.n_block / c.n_pair);
    if (kernel.size() != c.n_block * c.n_pair) {
        throw ValidationError("stationary_block_distribution: kernel has " +
                              std::to_string(kernel.size()) + " entries, expected " +
                              std::to_string(c.n_block * c.n_pair));
    }
    for (std::size_t s = 0; s < c.n_block; ++s) {
        double sum = 0.0;
        for (std::size_t p = 0; p < c.n_pair; ++p) {
            double v = kernel[s * c.n_pair + p];
            if (!(v >= 0.0)) {
                throw ValidationError("stationary_block_distribution: negative kernel entry");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kPmfSumTol) {
            throw ValidationError("stationary_block_distribution: kernel row " +
                                  std::to_string(s) + " is not stochastic");
        }
    }
    c.kernel = &kernel;
    return c;
}

// Strong connectivity + aperiodicity of the block chain's support graph.
// Reducible or periodic chains have no unique attracting stationary
// distribution, so they are rejected before iterating.
void check_irreducible_aperiodic(const BlockChain& c) {
    const auto& kernel = *c.kernel;
    auto successors = [&](std::size_t s, auto&& fn) {
        for (std::size_t p = 0; p < c.n_pair; ++p) {
            if (kernel[s * c.n_pair + p] > 0.0) fn(c.shift(s, p));
        }
    };

    std::vector<std::vector<std::size_t>> reverse(c.n_block);
    for (std::size_t s = 0; s < c.n_block; ++s) {
        successors(s, [&](std::size_t t) { reverse[t].push_back(s); });
    }

    auto bfs = [&](bool forward, std::vector<int>& level) {
        level.assign(c.n_block, -1);
        std::vector<std::size_t> queue{0};
        level[0] = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            std::size_t s = queue[head];
            auto visit = [&](std::size_t t) {
                if (level[t] < 0) {
                    level[t] = level[s] + 1;
                    queue.push_back(t);
                }
            };
            if (forward) {
                successors(s, visit);
            } else {
                for (std::size_t t : reverse[s]) visit(t);
            }
        }
        return queue.size();
    };

    std::vector<int> level;
    if (bfs(true, level) != c.n_block) {
        throw ValidationError(
            "stationary distribution is not unique: block chain is reducible "
            "(not all block states reachable from state 0)");
    }
    std::vector<int> back_level;
    if (bfs(false, back_level) != c.n_block) {
        throw ValidationError(
            "stationary distribution is not unique: block chain is reducible "
            "(state 0 not reachable from all block states)");
    }

    // Period = gcd over all edges (u -> v) of level[u] + 1 - level[v].
    std::size_t period = 0;
    for (std::size_t s = 0; s < c.n_block; ++s) {
        successors(s, [&](std::size_t t) {
            long d = static_cast<long>(level[s]) + 1 - static_cast<long>(level[t]);
            period = std::gcd(period, static_cast<std::size_t>(std::abs(d)));
        });
    }
    if (period != 1) {
        throw ValidationError("stationary distribution computation failed: block chain is "
                              "periodic with period " + std::to_string(period));
    }
}

}  // namespace

std::vector<double> stationary_block_distribution(const std::vector<double>& kernel,
                                                  std::size_t order_l,
                                                  std::size_t alphabet_size_1,
                                                  std::size_t alphabet_size_2) {
    BlockChain c = make_block_chain(kernel, order_l, alphabet_size_1, alphabet_size_2);
    check_irreducible_aperiodic(c);

    std::vector<double> pi(c.n_block, 1.0 / static_cast<double>(c.n_block));
    std::vector<double> next(c.n_block);
    constexpr double kResidualTol = 1e-12;
    constexpr std::size_t kMaxIters = 1000000;

    double residual = 1.0;
    for (std::size_t iter = 0; iter < kMaxIters; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s < c.n_block; ++s) {
            double ps = pi[s];
            if (ps == 0.0) continue;
            const double* row = kernel.data() + s * c.n_pair;
            for (std::size_t p = 0; p < c.n_pair; ++p) {
                if (row[p] > 0.0) next[c.shift(s, p)] += ps * row[p];
            }
        }
        residual = 0.0;
        for (std::size_t s = 0; s < c.n_block; ++s) {
            residual = std::max(residual, std::abs(next[s] - pi[s]));
        }
        pi.swap(next);
        if (residual <= kResidualTol) {
            // Exact renormalization guards against drift over many sweeps.
            double total = std::accumulate(pi.begin(), pi.end(), 0.0);
            for (double& v : pi) v /= total;
            return pi;
        }
    }
    std::ostringstream os;
    os << "stationary distribution power iteration did not converge within " << kMaxIters
       << " sweeps (final residual " << residual << ", tolerance " << kResidualTol << ")";
    throw ValidationError(os.str());
}

EntropyReport entropy_rates(const JointProcessSpec& spec) {
    EntropyReport r;
    r.mode = EntropyMode::analytic;

    if (std::holds_alternative<IidDiscrete>(spec.model())) {
        const auto& d = std::get<IidDiscrete>(spec.model());
        const auto& t = spec.discrete_tables();
        r.h1 = shannon_entropy_bits(t.marginal1);
        r.h2 = shannon_entropy_bits(t.marginal2);
        r.h12 = shannon_entropy_bits(d.joint_pmf);
        r.mi = r.h1 + r.h2 - r.h12;
        return r;
    }

    if (const auto* g = std::get_if<IidGaussian>(&spec.model())) {
        double one_minus_r2 = 1.0 - g->rho * g->rho;
        r.h1 = 0.5 * kLog2TwoPiE;
        r.h2 = 0.5 * kLog2TwoPiE;
        r.h12 = kLog2TwoPiE + 0.5 * std::log2(one_minus_r2);
        r.mi = -0.5 * std::log2(one_minus_r2);
        return r;
    }

    const auto& mk = std::get<MarkovDiscrete>(spec.model());
    const auto& t = spec.markov_tables();
    std::vector<double> pi = stationary_block_distribution(mk.kernel, mk.order_l,
                                                           mk.alphabet_size_1,
                                                           mk.alphabet_size_2);
    // Conditional rates of the next coordinate pair given the stationary
    // previous block: h12 from the full kernel row, h1/h2 from the row
    // marginalized onto one coordinate. mi = h1 + h2 - h12 is then the
    // conditional mutual information between the next two coordinates.
    double h1 = 0.0, h2 = 0.0, h12 = 0.0;
    std::vector<double> row1(mk.alphabet_size_1);
    std::vector<double> row2(mk.alphabet_size_2);
    for (std::size_t s = 0; s < t.n_block; ++s) {
        double ps = pi[s];
        if (ps == 0.0) continue;
        const double* row = mk.kernel.data() + s * t.n_pair;
        std::fill(row1.begin(), row1.end(), 0.0);
        std::fill(row2.begin(), row2.end(), 0.0);
        double hrow = 0.0;
        for (std::size_t a = 0; a < mk.alphabet_size_1; ++a) {
            for (std::size_t b = 0; b < mk.alphabet_size_2; ++b) {
                double p = row[a * mk.alphabet_size_2 + b];
                row1[a] += p;
                row2[b] += p;
                if (p > 0.0) hrow -= p * std::log2(p);
            }
        }
        h12 += ps * hrow;
        h1 += ps * shannon_entropy_bits(row1);
        h2 += ps * shannon_entropy_bits(row2);
    }
    r.h1 = h1;
    r.h2 = h2;
    r.h12 = h12;
    r.mi = h1 + h2 - h12;
    return r;
}

EntropyReport estimate_entropy_rates(const JointProcessSpec& spec, std::size_t m,
                                     std::size_t trials, SeededRng& rng) {
    if (m == 0 || trials == 0) {
        throw ValidationError("estimate_entropy_rates: m and trials must be >= 1");
    }
    std::vector<double> r1(trials), r2(trials), r12(trials), rmi(trials);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < trials; ++i) {
        PairSample s = sample_pair(spec, m, rng);
        double a, b, ab;
        if (spec.is_discrete()) {
            std::span<const std::uint32_t> u1(s.u1_sym), u2(s.u2_sym);
            a = -inv_m * log_marginal_density(spec, 1, u1);
            b = -inv_m * log_marginal_density(spec, 2, u2);
            ab = -inv_m * log_joint_density(spec, u1, u2);
        } else {
            std::span<const double> u1(s.u1_real), u2(s.u2_real);
            a = -inv_m * log_marginal_density(spec, 1, u1);
            b = -inv_m * log_marginal_density(spec, 2, u2);
            ab = -inv_m * log_joint_density(spec, u1, u2);
        }
        r1[i] = a;
        r2[i] = b;
        r12[i] = ab;
        rmi[i] = a + b - ab;
    }

    auto mean_stderr = [trials](const std::vector<double>& xs) {
        double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(trials);
        if (trials == 1) return std::pair<double, double>{mean, 0.0};
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        double var = ss / static_cast<double>(trials - 1);
        return std::pair<double, double>{mean, std::sqrt(var / static_cast<double>(trials))};
    };

    EntropyReport r;
    r.mode = EntropyMode::monte_carlo;
    std::tie(r.h1, r.stderr_h1) = mean_stderr(r1);
    std::tie(r.h2, r.stderr_h2) = mean_stderr(r2);
    std::tie(r.h12, r.stderr_h12) = mean_stderr(r12);
    std::tie(r.mi, r.stderr_mi) = mean_stderr(rmi);
    return r;
}

}  // namespace dbmatch
