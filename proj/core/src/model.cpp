#include "dbmatch/model.hpp"

#include <cmath>
#include <limits>

#include "dbmatch/errors.hpp"

namespace dbmatch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2E = 1.4426950408889634073599246810019;  // log2(e)
constexpr double kLog2TwoPi = 2.6514961294723187980432792951080;  // log2(2*pi)

void require_equal_lengths(std::size_t a, std::size_t b) {
    if (a != b) {
        throw ValidationError("log_joint_density: entry lengths differ (" + std::to_string(a) +
                              " vs " + std::to_string(b) + ")");
    }
}

void require_symbol(std::uint32_t v, std::size_t alphabet, const char* what) {
    if (v >= alphabet) {
        throw ValidationError(std::string(what) + ": symbol " + std::to_string(v) +
                              " outside alphabet of size " + std::to_string(alphabet));
    }
}

std::size_t require_markov_length(const MarkovDiscrete& mk, std::size_t m) {
    if (m < mk.order_l) {
        throw ValidationError("markov_discrete: entry length " + std::to_string(m) +
                              " is shorter than order_l = " + std::to_string(mk.order_l));
    }
    return m;
}

}  // namespace

PairSample sample_pair(const JointProcessSpec& spec, std::size_t m, SeededRng& rng) {
    if (m == 0) throw ValidationError("sample_pair: m must be >= 1");
    PairSample out;

    if (const auto* d = std::get_if<IidDiscrete>(&spec.model())) {
        out.u1_sym.resize(m);
        out.u2_sym.resize(m);
        std::span<const double> pmf(d->joint_pmf);
        for (std::size_t t = 0; t < m; ++t) {
            std::size_t cell = rng.categorical(pmf);
            out.u1_sym[t] = static_cast<std::uint32_t>(cell / d->alphabet_size_2);
            out.u2_sym[t] = static_cast<std::uint32_t>(cell % d->alphabet_size_2);
        }
        return out;
    }

    if (const auto* g = std::get_if<IidGaussian>(&spec.model())) {
        out.u1_real.resize(m);
        out.u2_real.resize(m);
        double mix = std::sqrt(1.0 - g->rho * g->rho);
        for (std::size_t t = 0; t < m; ++t) {
            auto [z1, z2] = rng.normal_pair();
            out.u1_real[t] = z1;
            out.u2_real[t] = g->rho * z1 + mix * z2;
        }
        return out;
    }

    const auto& mk = std::get<MarkovDiscrete>(spec.model());
    require_markov_length(mk, m);
    const auto& t = spec.markov_tables();
    out.u1_sym.resize(m);
    out.u2_sym.resize(m);

    std::size_t block = rng.categorical(std::span<const double>(mk.initial_block));
    // Unpack the initial l pairs (oldest pair in the most significant digit).
    for (std::size_t i = 0; i < mk.order_l; ++i) {
        std::size_t digit_scale = 1;
        for (std::size_t j = i + 1; j < mk.order_l; ++j) digit_scale *= t.n_pair;
        std::size_t p = (block / digit_scale) % t.n_pair;
        out.u1_sym[i] = static_cast<std::uint32_t>(p / mk.alphabet_size_2);
        out.u2_sym[i] = static_cast<std::uint32_t>(p % mk.alphabet_size_2);
    }
    for (std::size_t step = mk.order_l; step < m; ++step) {
        std::span<const double> row(mk.kernel.data() + block * t.n_pair, t.n_pair);
        std::size_t p = rng.categorical(row);
        out.u1_sym[step] = static_cast<std::uint32_t>(p / mk.alphabet_size_2);
        out.u2_sym[step] = static_cast<std::uint32_t>(p % mk.alphabet_size_2);
        block = t.shift(block, p);
    }
    return out;
}

double log_joint_density(const JointProcessSpec& spec,
                         std::span<const std::uint32_t> u1,
                         std::span<const std::uint32_t> u2) {
    require_equal_lengths(u1.size(), u2.size());
    const std::size_t m = u1.size();
    if (m == 0) throw ValidationError("log_joint_density: empty entries");

    if (const auto* d = std::get_if<IidDiscrete>(&spec.model())) {
        const auto& tab = spec.discrete_tables();
        double acc = 0.0;
        for (std::size_t t = 0; t < m; ++t) {
            require_symbol(u1[t], d->alphabet_size_1, "log_joint_density side 1");
            require_symbol(u2[t], d->alphabet_size_2, "log_joint_density side 2");
            acc += tab.log2_joint[pair_index(u1[t], u2[t], d->alphabet_size_2)];
        }
        return acc;
    }

    const auto* mk = std::get_if<MarkovDiscrete>(&spec.model());
    if (mk == nullptr) {
        throw ValidationError("log_joint_density: discrete entries given to a gaussian spec");
    }
    require_markov_length(*mk, m);
    const auto& t = spec.markov_tables();
    std::size_t block = 0;
    for (std::size_t i = 0; i < mk->order_l; ++i) {
        require_symbol(u1[i], mk->alphabet_size_1, "log_joint_density side 1");
        require_symbol(u2[i], mk->alphabet_size_2, "log_joint_density side 2");
        block = block * t.n_pair + pair_index(u1[i], u2[i], mk->alphabet_size_2);
    }
    double acc = t.log2_initial[block];
    for (std::size_t step = mk->order_l; step < m; ++step) {
        require_symbol(u1[step], mk->alphabet_size_1, "log_joint_density side 1");
        require_symbol(u2[step], mk->alphabet_size_2, "log_joint_density side 2");
        std::size_t p = pair_index(u1[step], u2[step], mk->alphabet_size_2);
        acc += t.log2_kernel[block * t.n_pair + p];
        if (acc == kNegInf) return kNegInf;
        block = t.shift(block, p);
    }
    return acc;
}

double log_joint_density(const JointProcessSpec& spec,
                         std::span<const double> u1,
                         std::span<const double> u2) {
    require_equal_lengths(u1.size(), u2.size());
    const std::size_t m = u1.size();
    if (m == 0) throw ValidationError("log_joint_density: empty entries");
    const auto* g = std::get_if<IidGaussian>(&spec.model());
    if (g == nullptr) {
        throw ValidationError("log_joint_density: real entries given to a discrete spec");
    }
    const double rho = g->rho;
    const double one_minus_r2 = 1.0 - rho * rho;
    // Per step: log2 f(x,y) = -log2(2*pi*sqrt(1-rho^2))
    //                         - log2(e) * (x^2 - 2*rho*x*y + y^2) / (2*(1-rho^2))
    const double const_term = -(kLog2TwoPi + 0.5 * std::log2(one_minus_r2));
    double quad = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        quad += u1[t] * u1[t] - 2.0 * rho * u1[t] * u2[t] + u2[t] * u2[t];
    }
    return static_cast<double>(m) * const_term - kLog2E * quad / (2.0 * one_minus_r2);
}

namespace {

// Scaled forward recursion over the hidden coordinate of a Markov pair
// process. `observed` is the visible side; hidden blocks enumerate the other
// side's last order_l symbols.
double markov_marginal_log2(const JointProcessSpec& spec, int side,
                            std::span<const std::uint32_t> observed) {
    const auto& mk = std::get<MarkovDiscrete>(spec.model());
    const auto& t = spec.markov_tables();
    const std::size_t m = require_markov_length(mk, observed.size());
    const std::size_t l = mk.order_l;
    const std::size_t k_obs = side == 1 ? mk.alphabet_size_1 : mk.alphabet_size_2;
    const std::size_t k_hid = side == 1 ? mk.alphabet_size_2 : mk.alphabet_size_1;

    for (std::uint32_t v : observed) require_symbol(v, k_obs, "log_marginal_density");

    // Hidden block index: last l hidden symbols, oldest most significant.
    std::size_t n_hidden = 1;
    for (std::size_t i = 0; i < l; ++i) n_hidden *= k_hid;

    auto pair_of = [&](std::uint32_t obs, std::size_t hid) {
        return side == 1 ? pair_index(obs, static_cast<std::uint32_t>(hid), mk.alphabet_size_2)
                         : pair_index(static_cast<std::uint32_t>(hid), obs, mk.alphabet_size_2);
    };
    // Full pair-block index from the observed window ending at position
    // `end` (exclusive) and a hidden block h.
    auto block_of = [&](std::size_t end, std::size_t h) {
        std::size_t blk = 0;
        std::size_t rem = h;
        std::size_t scale = n_hidden / k_hid;
        for (std::size_t i = 0; i < l; ++i) {
            std::size_t hid_sym = scale == 0 ? 0 : (rem / scale) % k_hid;
            blk = blk * t.n_pair + pair_of(observed[end - l + i], hid_sym);
            if (scale > 0) scale /= k_hid;
        }
        return blk;
    };

    std::vector<double> alpha(n_hidden);
    const auto& init = mk.initial_block;
    for (std::size_t h = 0; h < n_hidden; ++h) {
        alpha[h] = init[block_of(l, h)];
    }

    double log2_total = 0.0;
    auto renorm = [&]() -> bool {
        double sum = 0.0;
        for (double a : alpha) sum += a;
        if (sum <= 0.0) return false;
        for (double& a : alpha) a /= sum;
        log2_total += std::log2(sum);
        return true;
    };
    if (!renorm()) return kNegInf;

    std::vector<double> next(n_hidden);
    const std::size_t hid_mod = n_hidden / k_hid == 0 ? 1 : n_hidden / k_hid;
    const auto& kernel = mk.kernel;
    for (std::size_t step = l; step < m; ++step) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t h = 0; h < n_hidden; ++h) {
            if (alpha[h] == 0.0) continue;
            std::size_t blk = block_of(step, h);
            for (std::uint32_t y = 0; y < k_hid; ++y) {
                double p = kernel[blk * t.n_pair + pair_of(observed[step], y)];
                if (p == 0.0) continue;
                next[(h % hid_mod) * k_hid + y] += alpha[h] * p;
            }
        }
        alpha.swap(next);
        if (!renorm()) return kNegInf;
    }
    return log2_total;
}

}  // namespace

double log_marginal_density(const JointProcessSpec& spec, int side,
                            std::span<const std::uint32_t> u) {
    if (side != 1 && side != 2) throw ValidationError("log_marginal_density: side must be 1 or 2");
    if (u.empty()) throw ValidationError("log_marginal_density: empty entry");

    if (const auto* d = std::get_if<IidDiscrete>(&spec.model())) {
        const auto& tab = spec.discrete_tables();
        const auto& logs = side == 1 ? tab.log2_marginal1 : tab.log2_marginal2;
        std::size_t alphabet = side == 1 ? d->alphabet_size_1 : d->alphabet_size_2;
        double acc = 0.0;
        for (std::uint32_t v : u) {
            require_symbol(v, alphabet, "log_marginal_density");
            acc += logs[v];
        }
        return acc;
    }
    if (std::holds_alternative<MarkovDiscrete>(spec.model())) {
        return markov_marginal_log2(spec, side, u);
    }
    throw ValidationError("log_marginal_density: discrete entries given to a gaussian spec");
}

double log_marginal_density(const JointProcessSpec& spec, int side,
                            std::span<const double> u) {
    if (side != 1 && side != 2) throw ValidationError("log_marginal_density: side must be 1 or 2");
    if (u.empty()) throw ValidationError("log_marginal_density: empty entry");
    if (!std::holds_alternative<IidGaussian>(spec.model())) {
        throw ValidationError("log_marginal_density: real entries given to a discrete spec");
    }
    // Standard normal marginal per step: -0.5*log2(2*pi) - log2(e)*x^2/2.
    double quad = 0.0;
    for (double x : u) quad += x * x;
    return -0.5 * kLog2TwoPi * static_cast<double>(u.size()) - 0.5 * kLog2E * quad;
}

double log_joint_density(const JointProcessSpec& spec, EntryRef u1, EntryRef u2) {
    if (auto* a = std::get_if<std::span<const std::uint32_t>>(&u1)) {
        auto* b = std::get_if<std::span<const std::uint32_t>>(&u2);
        if (!b) throw ValidationError("log_joint_density: mixed payload types");
        return log_joint_density(spec, *a, *b);
    }
    auto* a = std::get_if<std::span<const double>>(&u1);
    auto* b = std::get_if<std::span<const double>>(&u2);
    if (!a || !b) throw ValidationError("log_joint_density: mixed payload types");
    return log_joint_density(spec, *a, *b);
}

double log_marginal_density(const JointProcessSpec& spec, int side, EntryRef u) {
    if (auto* a = std::get_if<std::span<const std::uint32_t>>(&u)) {
        return log_marginal_density(spec, side, *a);
    }
    return log_marginal_density(spec, side, std::get<std::span<const double>>(u));
}

}  // namespace dbmatch
