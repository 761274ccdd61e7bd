#include "dbmatch/spec.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "dbmatch/errors.hpp"
#include "dbmatch/rng.hpp"
#include "json.hpp"

namespace dbmatch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log2_or_neg_inf(double p) {
    return p > 0.0 ? std::log2(p) : kNegInf;
}

void check_pmf(const std::vector<double>& pmf, std::size_t expected_size, const char* what) {
    if (pmf.size() != expected_size) {
        throw ValidationError(std::string(what) + ": expected " + std::to_string(expected_size) +
                              " entries, got " + std::to_string(pmf.size()));
    }
    double sum = 0.0;
    for (double p : pmf) {
        if (!(p >= 0.0)) {
            throw ValidationError(std::string(what) + ": negative or non-finite entry");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kPmfSumTol) {
        std::ostringstream os;
        os << what << ": entries sum to " << sum << ", not 1 within " << kPmfSumTol;
        throw ValidationError(os.str());
    }
}

std::size_t checked_block_count(std::size_t n_pair, std::size_t order_l) {
    std::size_t s = 1;
    for (std::size_t i = 0; i < order_l; ++i) {
        if (s > kMaxBlockStates / n_pair) {
            throw ValidationError("markov state space (pair_count^order_l) exceeds cap of " +
                                  std::to_string(kMaxBlockStates) + " states");
        }
        s *= n_pair;
    }
    if (s > kMaxBlockStates) {
        throw ValidationError("markov state space exceeds cap");
    }
    return s;
}

}  // namespace

JointProcessSpec::JointProcessSpec(IidDiscrete m) : model_(std::move(m)) {
    const auto& d = std::get<IidDiscrete>(model_);
    if (d.alphabet_size_1 == 0 || d.alphabet_size_2 == 0) {
        throw ValidationError("iid_discrete: alphabet sizes must be positive");
    }
    check_pmf(d.joint_pmf, d.alphabet_size_1 * d.alphabet_size_2, "iid_discrete joint_pmf");

    auto& t = discrete_tables_;
    t.log2_joint.resize(d.joint_pmf.size());
    t.marginal1.assign(d.alphabet_size_1, 0.0);
    t.marginal2.assign(d.alphabet_size_2, 0.0);
    for (std::size_t a = 0; a < d.alphabet_size_1; ++a) {
        for (std::size_t b = 0; b < d.alphabet_size_2; ++b) {
            double p = d.joint_pmf[a * d.alphabet_size_2 + b];
            t.log2_joint[a * d.alphabet_size_2 + b] = log2_or_neg_inf(p);
            t.marginal1[a] += p;
            t.marginal2[b] += p;
        }
    }
    t.log2_marginal1.resize(t.marginal1.size());
    t.log2_marginal2.resize(t.marginal2.size());
    for (std::size_t a = 0; a < t.marginal1.size(); ++a) {
        t.log2_marginal1[a] = log2_or_neg_inf(t.marginal1[a]);
    }
    for (std::size_t b = 0; b < t.marginal2.size(); ++b) {
        t.log2_marginal2[b] = log2_or_neg_inf(t.marginal2[b]);
    }
    finalize();
}

JointProcessSpec::JointProcessSpec(IidGaussian m) : model_(m) {
    if (!std::isfinite(m.rho) || std::abs(m.rho) >= 1.0) {
        throw ValidationError("iid_gaussian: rho must be finite with |rho| < 1");
    }
    finalize();
}

JointProcessSpec::JointProcessSpec(MarkovDiscrete m) : model_(std::move(m)) {
    const auto& mk = std::get<MarkovDiscrete>(model_);
    if (mk.order_l == 0) throw ValidationError("markov_discrete: order_l must be positive");
    if (mk.alphabet_size_1 == 0 || mk.alphabet_size_2 == 0) {
        throw ValidationError("markov_discrete: alphabet sizes must be positive");
    }
    std::size_t n_pair = mk.alphabet_size_1 * mk.alphabet_size_2;
    std::size_t n_block = checked_block_count(n_pair, mk.order_l);

    if (mk.kernel.size() != n_block * n_pair) {
        throw ValidationError("markov_discrete kernel: expected " +
                              std::to_string(n_block * n_pair) + " entries, got " +
                              std::to_string(mk.kernel.size()));
    }
    for (std::size_t s = 0; s < n_block; ++s) {
        double sum = 0.0;
        for (std::size_t p = 0; p < n_pair; ++p) {
            double v = mk.kernel[s * n_pair + p];
            if (!(v >= 0.0)) throw ValidationError("markov_discrete kernel: negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kPmfSumTol) {
            throw ValidationError("markov_discrete kernel: row " + std::to_string(s) +
                                  " sums to " + std::to_string(sum) + ", not 1");
        }
    }
    check_pmf(mk.initial_block, n_block, "markov_discrete initial_block");

    auto& t = markov_tables_;
    t.n_pair = n_pair;
    t.n_block = n_block;
    t.shift_mod = n_block / n_pair;
    if (t.shift_mod == 0) t.shift_mod = 1;
    t.log2_kernel.resize(mk.kernel.size());
    for (std::size_t i = 0; i < mk.kernel.size(); ++i) {
        t.log2_kernel[i] = log2_or_neg_inf(mk.kernel[i]);
    }
    t.log2_initial.resize(n_block);
    for (std::size_t i = 0; i < n_block; ++i) {
        t.log2_initial[i] = log2_or_neg_inf(mk.initial_block[i]);
    }

    // initial_block must be stationary: advancing it one step reproduces it.
    std::vector<double> advanced(n_block, 0.0);
    for (std::size_t s = 0; s < n_block; ++s) {
        double ps = mk.initial_block[s];
        if (ps == 0.0) continue;
        for (std::size_t p = 0; p < n_pair; ++p) {
            advanced[t.shift(s, p)] += ps * mk.kernel[s * n_pair + p];
        }
    }
    double worst = 0.0;
    for (std::size_t s = 0; s < n_block; ++s) {
        worst = std::max(worst, std::abs(advanced[s] - mk.initial_block[s]));
    }
    if (worst > kStationaryTol) {
        std::ostringstream os;
        os << "markov_discrete initial_block is not stationary under the kernel "
           << "(one-step advance deviates by " << worst << ", tolerance " << kStationaryTol << ")";
        throw ValidationError(os.str());
    }
    finalize();
}

std::size_t JointProcessSpec::alphabet_size(int side) const {
    if (const auto* d = std::get_if<IidDiscrete>(&model_)) {
        return side == 1 ? d->alphabet_size_1 : d->alphabet_size_2;
    }
    if (const auto* m = std::get_if<MarkovDiscrete>(&model_)) {
        return side == 1 ? m->alphabet_size_1 : m->alphabet_size_2;
    }
    throw ValidationError("alphabet_size: gaussian specs have no finite alphabet");
}

const DiscreteTables& JointProcessSpec::discrete_tables() const {
    return discrete_tables_;
}

const MarkovTables& JointProcessSpec::markov_tables() const {
    return markov_tables_;
}

namespace {

nlohmann::ordered_json spec_to_ordered_json(const JointProcessSpec::Model& model) {
    nlohmann::ordered_json j;
    if (const auto* d = std::get_if<IidDiscrete>(&model)) {
        j["variant"] = "iid_discrete";
        j["alphabet_size_1"] = d->alphabet_size_1;
        j["alphabet_size_2"] = d->alphabet_size_2;
        j["joint_pmf"] = d->joint_pmf;
    } else if (const auto* g = std::get_if<IidGaussian>(&model)) {
        j["variant"] = "iid_gaussian";
        j["rho"] = g->rho;
    } else {
        const auto& m = std::get<MarkovDiscrete>(model);
        j["variant"] = "markov_discrete";
        j["order_l"] = m.order_l;
        j["alphabet_size_1"] = m.alphabet_size_1;
        j["alphabet_size_2"] = m.alphabet_size_2;
        j["kernel"] = m.kernel;
        j["initial_block"] = m.initial_block;
    }
    return j;
}

}  // namespace

void JointProcessSpec::finalize() {
    json_ = spec_to_ordered_json(model_).dump();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(json_)));
    id_.assign(buf);
}

JointProcessSpec parse_spec_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("spec json: parse failure: ") + e.what());
    }
    try {
        const std::string variant = j.at("variant").get<std::string>();
        if (variant == "iid_discrete") {
            IidDiscrete d;
            d.alphabet_size_1 = j.at("alphabet_size_1").get<std::size_t>();
            d.alphabet_size_2 = j.at("alphabet_size_2").get<std::size_t>();
            d.joint_pmf = j.at("joint_pmf").get<std::vector<double>>();
            return JointProcessSpec(std::move(d));
        }
        if (variant == "iid_gaussian") {
            IidGaussian g;
            g.rho = j.at("rho").get<double>();
            return JointProcessSpec(g);
        }
        if (variant == "markov_discrete") {
            MarkovDiscrete m;
            m.order_l = j.at("order_l").get<std::size_t>();
            m.alphabet_size_1 = j.at("alphabet_size_1").get<std::size_t>();
            m.alphabet_size_2 = j.at("alphabet_size_2").get<std::size_t>();
            m.kernel = j.at("kernel").get<std::vector<double>>();
            m.initial_block = j.at("initial_block").get<std::vector<double>>();
            return JointProcessSpec(std::move(m));
        }
        throw ValidationError("spec json: unknown variant \"" + variant + "\"");
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("spec json: ") + e.what());
    }
}

JointProcessSpec load_spec_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec_json(buf.str());
}

IidDiscrete binary_symmetric_pmf(double crossover) {
    IidDiscrete d;
    d.alphabet_size_1 = 2;
    d.alphabet_size_2 = 2;
    double stay = (1.0 - crossover) / 2.0;
    double flip = crossover / 2.0;
    d.joint_pmf = {stay, flip, flip, stay};
    return d;
}

namespace {

// Pair chain that keeps its current pair with probability `hold` and
// otherwise redraws the pair from `fresh` (which is then also the stationary
// pair distribution). Both marginal processes are order-1 Markov on their
// own, so the conditional and process-level information rates coincide.
MarkovDiscrete lazy_pair_chain(double hold, const IidDiscrete& fresh) {
    MarkovDiscrete m;
    m.order_l = 1;
    m.alphabet_size_1 = fresh.alphabet_size_1;
    m.alphabet_size_2 = fresh.alphabet_size_2;
    std::size_t k = fresh.alphabet_size_1 * fresh.alphabet_size_2;
    m.kernel.assign(k * k, 0.0);
    for (std::size_t s = 0; s < k; ++s) {
        for (std::size_t p = 0; p < k; ++p) {
            m.kernel[s * k + p] = (1.0 - hold) * fresh.joint_pmf[p] + (s == p ? hold : 0.0);
        }
    }
    m.initial_block = fresh.joint_pmf;
    return m;
}

std::vector<std::pair<std::string, JointProcessSpec>> make_builtins() {
    std::vector<std::pair<std::string, JointProcessSpec>> v;
    v.emplace_back("point-mass", JointProcessSpec(IidDiscrete{2, 2, {1.0, 0.0, 0.0, 0.0}}));
    v.emplace_back("uniform-2x2", JointProcessSpec(IidDiscrete{2, 2, {0.25, 0.25, 0.25, 0.25}}));
    v.emplace_back("bsc-0.1", JointProcessSpec(binary_symmetric_pmf(0.1)));
    v.emplace_back("bsc-0.05", JointProcessSpec(binary_symmetric_pmf(0.05)));
    v.emplace_back("gauss-0.0", JointProcessSpec(IidGaussian{0.0}));
    v.emplace_back("gauss-0.5", JointProcessSpec(IidGaussian{0.5}));
    v.emplace_back("gauss-0.9", JointProcessSpec(IidGaussian{0.9}));
    v.emplace_back("lazy-0.5-bsc-0.1",
                   JointProcessSpec(lazy_pair_chain(0.5, binary_symmetric_pmf(0.1))));
    // Two pair-states (side-2 alphabet is a singleton); stay probabilities
    // 0.9 / 0.6 give the stationary distribution (0.8, 0.2).
    v.emplace_back("two-state-asym",
                   JointProcessSpec(MarkovDiscrete{1, 2, 1,
                                                   {0.9, 0.1, 0.4, 0.6},
                                                   {0.8, 0.2}}));
    return v;
}

}  // namespace

const std::vector<std::pair<std::string, JointProcessSpec>>& builtin_specs() {
    static const auto specs = make_builtins();
    return specs;
}

const JointProcessSpec& builtin_spec(std::string_view name) {
    for (const auto& [n, s] : builtin_specs()) {
        if (n == name) return s;
    }
    throw ValidationError("unknown builtin spec: " + std::string(name));
}

}  // namespace dbmatch
