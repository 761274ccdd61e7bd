#pragma once
// Label reconstruction for the second database of a correlated pair.
//
// typicality_match: for each unlabeled entry, scan the labeled database for
// a uniquely jointly-typical partner; entries with zero or several typical
// partners (or whose claimed label is contested) join the ambiguity set and
// receive the leftover labels uniformly at random.
//
// map_match: exact maximum-a-posteriori labeling, solved as a maximum-weight
// assignment over pairwise log joint densities. Exponential certainty about
// optimality, cubic cost; capped by default at n = 512.
//
// random_match: uniform random labeling baseline.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbmatch/database.hpp"
#include "dbmatch/entropy.hpp"

namespace dbmatch {

inline constexpr std::size_t kDefaultOracleCap = 512;

enum class MatcherKind { typicality, map_oracle, random };

const char* matcher_kind_name(MatcherKind k);
MatcherKind matcher_kind_from_name(const std::string& name);

struct MatchResult {
    std::vector<std::uint32_t> theta_hat;       // reconstructed label per db2 position
    std::vector<std::uint32_t> ambiguity_set;   // db2 positions filled randomly, ascending
    std::vector<bool> per_entry_correct;        // filled by score_against
    std::optional<double> success_fraction;     // set once scored
    MatcherKind matcher_kind = MatcherKind::typicality;
    std::optional<double> epsilon;              // typicality only

    double ambiguity_fraction() const {
        return theta_hat.empty() ? 0.0
                                 : static_cast<double>(ambiguity_set.size()) /
                                       static_cast<double>(theta_hat.size());
    }
};

struct TypicalityOptions {
    bool strict = false;      // additionally require both marginal typicality tests
    std::size_t workers = 1;  // scan parallelism; never changes the result
};

// |-(1/m) log2 f_m(u1,u2) - h12| <= epsilon, with h12 the analytic joint
// rate. In strict mode both marginal conditions are required as well.
// A -inf density is simply not typical.
bool is_jointly_typical(const JointProcessSpec& spec, double epsilon, EntryRef u1, EntryRef u2,
                        bool strict = false);

MatchResult typicality_match(const LabeledDatabase& db1, const UnlabeledDatabase& db2,
                             const JointProcessSpec& spec, double epsilon, SeededRng& rng,
                             const TypicalityOptions& options = {});

MatchResult map_match(const LabeledDatabase& db1, const UnlabeledDatabase& db2,
                      const JointProcessSpec& spec, std::size_t oracle_cap = kDefaultOracleCap);

MatchResult random_match(std::size_t n, SeededRng& rng);

// Fraction of positions labeled as in the ground truth; fills
// per_entry_correct and success_fraction on the result.
double score_against(std::span<const std::uint32_t> truth_theta2, MatchResult& result);

// JSON serialization of a result; per_entry_correct emitted only if verbose.
std::string match_result_to_json(const MatchResult& result, bool verbose = false);

}  // namespace dbmatch
