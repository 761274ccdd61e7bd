#pragma once
// Seeded experiment grids over (m, n, epsilon, matcher) with success
// statistics, empirical threshold estimation, and report emission.
//
// Determinism contract: a sweep is a pure function of its config. Rows come
// out in grid order, every seed is derived from (root_seed, indices), and
// the worker count never changes a byte of the output.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbmatch/database.hpp"
#include "dbmatch/entropy.hpp"
#include "dbmatch/matcher.hpp"

namespace dbmatch {

struct SweepConfig {
    JointProcessSpec spec;
    std::vector<std::size_t> m_values;
    // Exactly one of n_values / r_values is given. r_values are converted to
    // n = max(2, round(2^(m*R))) per m at load time; the emitted rows always
    // report the realized R = log2(n)/m.
    std::vector<std::size_t> n_values;
    std::vector<double> r_values;
    std::vector<double> epsilons;
    std::vector<MatcherKind> matchers;
    std::size_t trials_per_cell = 1;
    std::uint64_t root_seed = 0;
    std::size_t oracle_cap = kDefaultOracleCap;
    bool strict_typicality = false;
    std::uint64_t max_scalars = kDefaultMaxScalars;
};

SweepConfig parse_sweep_config_json(const std::string& text);
SweepConfig load_sweep_config_file(const std::string& path);
std::string sweep_config_to_json(const SweepConfig& config);

// n grid for one m (identity for n_values configs).
std::vector<std::size_t> sweep_n_grid(const SweepConfig& config, std::size_t m);

struct SweepRow {
    std::string spec_id;
    std::size_t m = 0;
    std::size_t n = 0;
    double r = 0.0;  // log2(n)/m
    double epsilon = 0.0;
    MatcherKind matcher = MatcherKind::typicality;
    std::uint64_t trial_seed = 0;  // seed of the generated pair
    double success_fraction = 0.0;
    double ambiguity_fraction = 0.0;
    double wall_time = 0.0;  // seconds; excluded from reports unless asked
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

using SweepTable = std::vector<SweepRow>;

// Runs every (cell, trial); cell-level failures (for example the MAP oracle
// cap) become error rows, never aborting the sweep.
SweepTable run_sweep(const SweepConfig& config, std::size_t workers = 1);

enum class ThresholdStatus { ok, above_range, below_range };

struct ThresholdEstimate {
    std::size_t m = 0;
    double epsilon = 0.0;
    MatcherKind matcher = MatcherKind::typicality;
    ThresholdStatus status = ThresholdStatus::ok;
    std::string method = "midpoint-crossing";
    double r_star = 0.0;   // meaningful when status == ok
    double r_low = 0.0;    // grid values bracketing the crossing
    double r_high = 0.0;
    double analytic_mi = 0.0;
    std::string warning;   // set when mean success is non-monotone in R
};

// Mean success per R at the fixed (m, epsilon, matcher), interpolated at the
// 0.5 crossing. Needs >= 3 distinct R values with ok rows.
ThresholdEstimate estimate_threshold(const SweepTable& table, const JointProcessSpec& spec,
                                     std::size_t m, double epsilon, MatcherKind matcher);

// Mean success per R for one (m, epsilon, matcher); used by the estimator
// and the plot emitter.
std::vector<std::pair<double, double>> success_curve(const SweepTable& table, std::size_t m,
                                                     double epsilon, MatcherKind matcher);

enum class ReportFormat { csv, json };

struct ReportOptions {
    ReportFormat format = ReportFormat::csv;
    bool include_timings = false;  // wall_time is non-deterministic; opt-in
};

// CSV: header plus one line per row, byte-stable given the same table.
// JSON: config echo, tool version, rows, and threshold estimates.
void emit_report(const SweepTable& table, const std::vector<ThresholdEstimate>& estimates,
                 const SweepConfig& config, const std::string& path,
                 const ReportOptions& options = {});

std::string render_csv(const SweepTable& table, bool include_timings = false);

// gnuplot-friendly blocks: one "R mean_success trials" table per
// (matcher, m, epsilon) group, separated by double blank lines.
void emit_plot_data(const SweepTable& table, const std::string& path);

}  // namespace dbmatch
