#include "dbmatch/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "dbmatch/assignment.hpp"
#include "dbmatch/errors.hpp"
#include "json.hpp"

namespace dbmatch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_compatible(const UnlabeledDatabase& a, const UnlabeledDatabase& b) {
    if (a.n != b.n || a.m != b.m) {
        throw ValidationError("matcher: database shapes differ (" + std::to_string(a.n) + "x" +
                              std::to_string(a.m) + " vs " + std::to_string(b.n) + "x" +
                              std::to_string(b.m) + ")");
    }
}

double joint_rate(const JointProcessSpec& spec, EntryRef u1, EntryRef u2, std::size_t m) {
    double logd = log_joint_density(spec, u1, u2);
    return -logd / static_cast<double>(m);
}

// Runs fn(i) for i in [0, count) across `workers` threads in fixed blocks.
// Results must be written to disjoint slots; the split never changes them.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count == 0 ? 1 : count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

const char* matcher_kind_name(MatcherKind k) {
    switch (k) {
        case MatcherKind::typicality: return "typicality";
        case MatcherKind::map_oracle: return "map_oracle";
        case MatcherKind::random: return "random";
    }
    return "?";
}

MatcherKind matcher_kind_from_name(const std::string& name) {
    if (name == "typicality") return MatcherKind::typicality;
    if (name == "map_oracle") return MatcherKind::map_oracle;
    if (name == "random") return MatcherKind::random;
    throw ValidationError("unknown matcher kind: " + name);
}

bool is_jointly_typical(const JointProcessSpec& spec, double epsilon, EntryRef u1, EntryRef u2,
                        bool strict) {
    if (epsilon <= 0.0) throw ValidationError("is_jointly_typical: epsilon must be > 0");
    std::size_t m = std::visit([](auto s) { return s.size(); }, u1);
    EntropyReport rates = entropy_rates(spec);
    double rate = joint_rate(spec, u1, u2, m);
    if (!(std::abs(rate - rates.h12) <= epsilon)) return false;
    if (strict) {
        double r1 = -log_marginal_density(spec, 1, u1) / static_cast<double>(m);
        double r2 = -log_marginal_density(spec, 2, u2) / static_cast<double>(m);
        if (!(std::abs(r1 - rates.h1) <= epsilon)) return false;
        if (!(std::abs(r2 - rates.h2) <= epsilon)) return false;
    }
    return true;
}

MatchResult typicality_match(const LabeledDatabase& db1, const UnlabeledDatabase& db2,
                             const JointProcessSpec& spec, double epsilon, SeededRng& rng,
                             const TypicalityOptions& options) {
    require_compatible(db1.base, db2);
    if (epsilon <= 0.0) throw ValidationError("typicality_match: epsilon must be > 0");
    const std::size_t n = db2.n;
    const std::size_t m = db2.m;
    const double inv_m = 1.0 / static_cast<double>(m);
    const EntropyReport rates = entropy_rates(spec);

    // Marginal rates are per-entry, so in strict mode they are computed once
    // per row, not once per pair.
    std::vector<double> rate1, rate2;
    if (options.strict) {
        rate1.resize(n);
        rate2.resize(n);
        parallel_for(n, options.workers, [&](std::size_t i) {
            rate1[i] = -inv_m * log_marginal_density(spec, 1, db1.base.entries.row(i));
            rate2[i] = -inv_m * log_marginal_density(spec, 2, db2.entries.row(i));
        });
    }

    // Scan phase: for each unlabeled position, count typical partners.
    std::vector<std::uint32_t> typical_count(n, 0);
    std::vector<std::uint32_t> unique_row(n, 0);
    parallel_for(n, options.workers, [&](std::size_t col) {
        if (options.strict && std::abs(rate2[col] - rates.h2) > epsilon) {
            return;  // no partner can pass the strict test
        }
        EntryRef u2 = db2.entries.row(col);
        std::uint32_t count = 0;
        std::uint32_t hit = 0;
        for (std::size_t row = 0; row < n; ++row) {
            double rate = joint_rate(spec, db1.base.entries.row(row), u2, m);
            if (!(std::abs(rate - rates.h12) <= epsilon)) continue;
            if (options.strict && std::abs(rate1[row] - rates.h1) > epsilon) continue;
            ++count;
            hit = static_cast<std::uint32_t>(row);
            if (count > 1) break;  // only uniqueness matters
        }
        typical_count[col] = count;
        unique_row[col] = hit;
    });

    // Claim labels for uniquely matched positions, then demote every claimant
    // of a contested label: keeping first-come claims would make the result
    // depend on storage order.
    constexpr std::uint32_t kNoClaim = 0xFFFFFFFFu;
    std::vector<std::uint32_t> claimed(n, kNoClaim);
    std::vector<std::uint32_t> claims_per_label(n, 0);
    for (std::size_t col = 0; col < n; ++col) {
        if (typical_count[col] == 1) {
            std::uint32_t label = db1.theta[unique_row[col]];
            claimed[col] = label;
            ++claims_per_label[label];
        }
    }

    MatchResult result;
    result.matcher_kind = MatcherKind::typicality;
    result.epsilon = epsilon;
    result.theta_hat.assign(n, kNoClaim);
    std::vector<bool> label_taken(n, false);
    for (std::size_t col = 0; col < n; ++col) {
        std::uint32_t label = claimed[col];
        if (label != kNoClaim && claims_per_label[label] == 1) {
            result.theta_hat[col] = label;
            label_taken[label] = true;
        } else {
            result.ambiguity_set.push_back(static_cast<std::uint32_t>(col));
        }
    }

    // Leftover labels are dealt uniformly at random, without replacement, to
    // the ambiguity set in ascending position order.
    std::vector<std::uint32_t> leftover;
    for (std::uint32_t label = 0; label < n; ++label) {
        if (!label_taken[label]) leftover.push_back(label);
    }
    rng.shuffle(std::span<std::uint32_t>(leftover));
    for (std::size_t k = 0; k < result.ambiguity_set.size(); ++k) {
        result.theta_hat[result.ambiguity_set[k]] = leftover[k];
    }
    return result;
}

MatchResult map_match(const LabeledDatabase& db1, const UnlabeledDatabase& db2,
                      const JointProcessSpec& spec, std::size_t oracle_cap) {
    require_compatible(db1.base, db2);
    const std::size_t n = db2.n;
    if (n > oracle_cap) {
        throw ValidationError("map_match: n = " + std::to_string(n) +
                              " exceeds the oracle cap of " + std::to_string(oracle_cap) +
                              " (O(n^3) assignment); use the typicality matcher instead");
    }

    std::vector<double> weights(n * n);
    double min_finite = std::numeric_limits<double>::infinity();
    bool any_neg_inf = false;
    for (std::size_t row = 0; row < n; ++row) {
        EntryRef u1 = db1.base.entries.row(row);
        for (std::size_t col = 0; col < n; ++col) {
            double w = log_joint_density(spec, u1, db2.entries.row(col));
            weights[row * n + col] = w;
            if (w == kNegInf) {
                any_neg_inf = true;
            } else {
                min_finite = std::min(min_finite, w);
            }
        }
    }
    // Impossible pairings become finite weights so low that no optimal
    // assignment prefers them over any all-finite alternative.
    if (any_neg_inf) {
        double floor = std::isfinite(min_finite)
                           ? min_finite - static_cast<double>(n) * std::abs(min_finite) - 1.0
                           : -1.0;
        for (double& w : weights) {
            if (w == kNegInf) w = floor;
        }
    }

    std::vector<std::size_t> row_for_col = solve_max_assignment(weights, n);

    MatchResult result;
    result.matcher_kind = MatcherKind::map_oracle;
    result.theta_hat.resize(n);
    for (std::size_t col = 0; col < n; ++col) {
        result.theta_hat[col] = db1.theta[row_for_col[col]];
    }
    return result;
}

MatchResult random_match(std::size_t n, SeededRng& rng) {
    MatchResult result;
    result.matcher_kind = MatcherKind::random;
    result.theta_hat.resize(n);
    std::iota(result.theta_hat.begin(), result.theta_hat.end(), 0u);
    rng.shuffle(std::span<std::uint32_t>(result.theta_hat));
    result.ambiguity_set.resize(n);
    std::iota(result.ambiguity_set.begin(), result.ambiguity_set.end(), 0u);
    return result;
}

double score_against(std::span<const std::uint32_t> truth_theta2, MatchResult& result) {
    if (truth_theta2.size() != result.theta_hat.size()) {
        throw ValidationError("score_against: truth labeling length mismatch");
    }
    const std::size_t n = truth_theta2.size();
    result.per_entry_correct.assign(n, false);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (result.theta_hat[i] == truth_theta2[i]) {
            result.per_entry_correct[i] = true;
            ++correct;
        }
    }
    double fraction = n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
    result.success_fraction = fraction;
    return fraction;
}

std::string match_result_to_json(const MatchResult& result, bool verbose) {
    nlohmann::ordered_json j;
    j["matcher"] = matcher_kind_name(result.matcher_kind);
    if (result.epsilon) j["epsilon"] = *result.epsilon;
    j["n"] = result.theta_hat.size();
    j["theta_hat"] = result.theta_hat;
    j["ambiguity"] = result.ambiguity_set;
    j["ambiguity_fraction"] = result.ambiguity_fraction();
    if (result.success_fraction) j["success_fraction"] = *result.success_fraction;
    if (verbose && !result.per_entry_correct.empty()) {
        j["per_entry_correct"] = result.per_entry_correct;
    }
    return j.dump();
}

}  // namespace dbmatch
