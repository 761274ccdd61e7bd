#pragma once
// Correlated database pairs. A database holds n entries of length m; a
// labeled database additionally carries the labeling permutation theta,
// where theta[i] is the member id of the entry stored at position i.
// Matching entries of the two databases (same member id) are one joint draw
// from the spec; distinct members are independent.
//
// Entries are stored in a flat row-major buffer of either u32 symbols
// (discrete specs) or f64 reals (Gaussian). Databases are immutable after
// generation and safe to share across threads.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dbmatch/model.hpp"
#include "dbmatch/rng.hpp"
#include "dbmatch/spec.hpp"

namespace dbmatch {

// Default guard against accidentally huge generations: n*m scalar values.
inline constexpr std::uint64_t kDefaultMaxScalars = 1000000000ULL;

class EntryStore {
  public:
    EntryStore() = default;
    EntryStore(std::size_t n, std::size_t m, bool discrete);

    std::size_t n() const { return n_; }
    std::size_t m() const { return m_; }
    bool discrete() const { return std::holds_alternative<std::vector<std::uint32_t>>(data_); }

    std::span<const std::uint32_t> row_sym(std::size_t i) const;
    std::span<const double> row_real(std::size_t i) const;
    std::span<std::uint32_t> mutable_row_sym(std::size_t i);
    std::span<double> mutable_row_real(std::size_t i);
    EntryRef row(std::size_t i) const;

    const std::vector<std::uint32_t>& raw_sym() const;
    const std::vector<double>& raw_real() const;

    bool operator==(const EntryStore&) const = default;

  private:
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::variant<std::vector<std::uint32_t>, std::vector<double>> data_;
};

struct UnlabeledDatabase {
    std::size_t m = 0;
    std::size_t n = 0;
    EntryStore entries;
    std::string spec_id;

    bool operator==(const UnlabeledDatabase&) const = default;
};

struct LabeledDatabase {
    UnlabeledDatabase base;
    std::vector<std::uint32_t> theta;  // theta[i] = member id of entry i

    bool operator==(const LabeledDatabase&) const = default;
};

struct CorrelatedPair {
    LabeledDatabase db1;
    LabeledDatabase db2;
    JointProcessSpec spec;
    std::uint64_t seed = 0;
};

// The matcher's input: first database labeled, second unlabeled (truth
// withheld).
struct MatchingInstance {
    LabeledDatabase db1;
    UnlabeledDatabase db2;
    JointProcessSpec spec;
};

struct GenerateOptions {
    std::uint64_t max_scalars = kDefaultMaxScalars;
    bool identity_theta1 = false;  // debugging aid: fix theta1 = identity
};

// Draws n member processes of length m and places them under two independent
// uniform labelings. Each member's symbol stream is keyed by (seed, member
// id) alone, so regenerating with a larger m extends every entry without
// resampling its prefix. Deterministic given the seed.
CorrelatedPair generate_correlated_pair(const JointProcessSpec& spec, std::size_t m,
                                        std::size_t n, std::uint64_t seed,
                                        const GenerateOptions& options = {});

// Throws ValidationError unless theta is a bijection on [0, n).
void check_permutation(std::span<const std::uint32_t> theta, std::size_t n);

MatchingInstance to_matching_instance(const CorrelatedPair& pair);

}  // namespace dbmatch
