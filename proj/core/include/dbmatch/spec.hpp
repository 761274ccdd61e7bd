#pragma once
// Joint process specifications: the generative models for a matching entry
// pair. Three variants are supported:
//
//   IidDiscrete   - entries are iid draws from a joint pmf over a finite
//                   alphabet pair (row = symbol of side 1, col = side 2).
//   IidGaussian   - entries are iid bivariate standard normal pairs with
//                   correlation rho; means 0, variances 1.
//   MarkovDiscrete- the pair sequence is a stationary Markov chain of order
//                   l over the pair alphabet; `kernel` is the conditional
//                   pmf of the next pair given the previous l pairs and
//                   `initial_block` the stationary pmf of an l-block.
//
// Specs are validated on construction and immutable afterwards, so they can
// be shared freely across threads. All randomness is injected by callers.
//
// JSON schema (one object, discriminated by "variant"):
//   {"variant":"iid_discrete","alphabet_size_1":K1,"alphabet_size_2":K2,
//    "joint_pmf":[row-major K1*K2 floats]}
//   {"variant":"iid_gaussian","rho":R}
//   {"variant":"markov_discrete","order_l":L,"alphabet_size_1":K1,
//    "alphabet_size_2":K2,"kernel":[row-major (K1*K2)^L x (K1*K2) floats],
//    "initial_block":[(K1*K2)^L floats]}
// Pmfs are plain row-major arrays of decimal floats; parse/serialize round
// trips are value-identical.

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dbmatch {

inline constexpr double kPmfSumTol = 1e-12;
inline constexpr double kStationaryTol = 1e-9;
inline constexpr std::size_t kMaxBlockStates = 10000;

struct IidDiscrete {
    std::size_t alphabet_size_1 = 0;
    std::size_t alphabet_size_2 = 0;
    std::vector<double> joint_pmf;  // row-major, alphabet_size_1 x alphabet_size_2
};

struct IidGaussian {
    double rho = 0.0;
};

struct MarkovDiscrete {
    std::size_t order_l = 0;
    std::size_t alphabet_size_1 = 0;
    std::size_t alphabet_size_2 = 0;
    std::vector<double> kernel;         // (K1*K2)^order_l rows x (K1*K2) cols
    std::vector<double> initial_block;  // (K1*K2)^order_l entries
};

// Pair symbol (a, b) -> flat index a * k2 + b.
inline std::size_t pair_index(std::uint32_t a, std::uint32_t b, std::size_t k2) {
    return static_cast<std::size_t>(a) * k2 + b;
}

// Precomputed log-domain tables for the discrete iid variant.
struct DiscreteTables {
    std::vector<double> log2_joint;      // -inf where the pmf is 0
    std::vector<double> marginal1;
    std::vector<double> marginal2;
    std::vector<double> log2_marginal1;
    std::vector<double> log2_marginal2;
};

// Precomputed tables and block arithmetic for the Markov variant. Blocks of
// l pairs are flat-indexed with the oldest pair most significant.
struct MarkovTables {
    std::size_t n_pair = 0;   // K = k1*k2
    std::size_t n_block = 0;  // S = K^order_l
    std::size_t shift_mod = 0;  // K^(order_l - 1)
    std::vector<double> log2_kernel;   // S x K
    std::vector<double> log2_initial;  // S

    std::size_t shift(std::size_t block, std::size_t next_pair) const {
        return (block % shift_mod) * n_pair + next_pair;
    }
};

class JointProcessSpec {
  public:
    using Model = std::variant<IidDiscrete, IidGaussian, MarkovDiscrete>;

    explicit JointProcessSpec(IidDiscrete m);
    explicit JointProcessSpec(IidGaussian m);
    explicit JointProcessSpec(MarkovDiscrete m);

    const Model& model() const { return model_; }
    bool is_discrete() const { return !std::holds_alternative<IidGaussian>(model_); }

    // Alphabet size of one side (1 or 2); throws for the Gaussian variant.
    std::size_t alphabet_size(int side) const;

    // Canonical JSON string; stable key order, round-trip exact floats.
    const std::string& json() const { return json_; }
    // Short content hash of the canonical JSON, used to tag outputs.
    const std::string& id() const { return id_; }

    const DiscreteTables& discrete_tables() const;
    const MarkovTables& markov_tables() const;

  private:
    void finalize();

    Model model_;
    DiscreteTables discrete_tables_;
    MarkovTables markov_tables_;
    std::string json_;
    std::string id_;
};

JointProcessSpec parse_spec_json(std::string_view text);
JointProcessSpec load_spec_file(const std::string& path);

// Named example specs used throughout the test and sweep tooling.
const std::vector<std::pair<std::string, JointProcessSpec>>& builtin_specs();
const JointProcessSpec& builtin_spec(std::string_view name);

// Binary symmetric helper: uniform bit on side 1, flipped with the given
// crossover probability on side 2.
IidDiscrete binary_symmetric_pmf(double crossover);

}  // namespace dbmatch
