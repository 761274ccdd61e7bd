#include "dbmatch/database.hpp"

#include <algorithm>
#include <numeric>

#include "dbmatch/errors.hpp"

namespace dbmatch {

EntryStore::EntryStore(std::size_t n, std::size_t m, bool discrete) : n_(n), m_(m) {
    if (discrete) {
        data_ = std::vector<std::uint32_t>(n * m, 0);
    } else {
        data_ = std::vector<double>(n * m, 0.0);
    }
}

std::span<const std::uint32_t> EntryStore::row_sym(std::size_t i) const {
    const auto& v = std::get<std::vector<std::uint32_t>>(data_);
    return {v.data() + i * m_, m_};
}

std::span<const double> EntryStore::row_real(std::size_t i) const {
    const auto& v = std::get<std::vector<double>>(data_);
    return {v.data() + i * m_, m_};
}

std::span<std::uint32_t> EntryStore::mutable_row_sym(std::size_t i) {
    auto& v = std::get<std::vector<std::uint32_t>>(data_);
    return {v.data() + i * m_, m_};
}

std::span<double> EntryStore::mutable_row_real(std::size_t i) {
    auto& v = std::get<std::vector<double>>(data_);
    return {v.data() + i * m_, m_};
}

EntryRef EntryStore::row(std::size_t i) const {
    if (discrete()) return row_sym(i);
    return row_real(i);
}

const std::vector<std::uint32_t>& EntryStore::raw_sym() const {
    return std::get<std::vector<std::uint32_t>>(data_);
}

const std::vector<double>& EntryStore::raw_real() const {
    return std::get<std::vector<double>>(data_);
}

void check_permutation(std::span<const std::uint32_t> theta, std::size_t n) {
    if (theta.size() != n) {
        throw ValidationError("labeling: length " + std::to_string(theta.size()) +
                              " does not match database size " + std::to_string(n));
    }
    std::vector<bool> seen(n, false);
    for (std::uint32_t v : theta) {
        if (v >= n || seen[v]) {
            throw ValidationError("labeling is not a bijection on [0, n)");
        }
        seen[v] = true;
    }
}

namespace {

std::vector<std::uint32_t> random_permutation(std::size_t n, SeededRng& rng) {
    std::vector<std::uint32_t> p(n);
    std::iota(p.begin(), p.end(), 0u);
    rng.shuffle(std::span<std::uint32_t>(p));
    return p;
}

}  // namespace

CorrelatedPair generate_correlated_pair(const JointProcessSpec& spec, std::size_t m,
                                        std::size_t n, std::uint64_t seed,
                                        const GenerateOptions& options) {
    if (m == 0 || n == 0) {
        throw ValidationError("generate_correlated_pair: m and n must be >= 1");
    }
    if (n > 0xFFFFFFFFull) {
        throw ValidationError("generate_correlated_pair: n exceeds 2^32 labels");
    }
    const std::uint64_t scalars = 2ULL * static_cast<std::uint64_t>(n) * m;
    if (scalars > options.max_scalars) {
        throw ValidationError("generate_correlated_pair: requested " + std::to_string(scalars) +
                              " scalar values exceeds the cap of " +
                              std::to_string(options.max_scalars) +
                              " (raise the cap explicitly for runs this large)");
    }

    const bool discrete = spec.is_discrete();
    CorrelatedPair pair{
        LabeledDatabase{UnlabeledDatabase{m, n, EntryStore(n, m, discrete), spec.id()}, {}},
        LabeledDatabase{UnlabeledDatabase{m, n, EntryStore(n, m, discrete), spec.id()}, {}},
        spec,
        seed,
    };

    SeededRng theta1_rng(derive_seed(seed, "theta1", 0));
    SeededRng theta2_rng(derive_seed(seed, "theta2", 0));
    pair.db1.theta = options.identity_theta1
                         ? [n] { std::vector<std::uint32_t> p(n);
                                 std::iota(p.begin(), p.end(), 0u);
                                 return p; }()
                         : random_permutation(n, theta1_rng);
    pair.db2.theta = random_permutation(n, theta2_rng);

    // Entry at position i of database j holds the draw of member theta_j[i].
    std::vector<std::uint32_t> pos1(n), pos2(n);
    for (std::size_t i = 0; i < n; ++i) {
        pos1[pair.db1.theta[i]] = static_cast<std::uint32_t>(i);
        pos2[pair.db2.theta[i]] = static_cast<std::uint32_t>(i);
    }

    for (std::size_t member = 0; member < n; ++member) {
        SeededRng member_rng(derive_seed(seed, "member", member));
        PairSample s = sample_pair(spec, m, member_rng);
        if (discrete) {
            auto r1 = pair.db1.base.entries.mutable_row_sym(pos1[member]);
            auto r2 = pair.db2.base.entries.mutable_row_sym(pos2[member]);
            std::copy(s.u1_sym.begin(), s.u1_sym.end(), r1.begin());
            std::copy(s.u2_sym.begin(), s.u2_sym.end(), r2.begin());
        } else {
            auto r1 = pair.db1.base.entries.mutable_row_real(pos1[member]);
            auto r2 = pair.db2.base.entries.mutable_row_real(pos2[member]);
            std::copy(s.u1_real.begin(), s.u1_real.end(), r1.begin());
            std::copy(s.u2_real.begin(), s.u2_real.end(), r2.begin());
        }
    }
    return pair;
}

MatchingInstance to_matching_instance(const CorrelatedPair& pair) {
    return MatchingInstance{pair.db1, pair.db2.base, pair.spec};
}

}  // namespace dbmatch
