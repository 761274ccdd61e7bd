#include "dbmatch/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "dbmatch/errors.hpp"
#include "dbmatch/version.hpp"
#include "json.hpp"

namespace dbmatch {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

void validate_config(const SweepConfig& c) {
    if (c.m_values.empty()) throw ValidationError("sweep config: m_values is empty");
    if (c.epsilons.empty()) throw ValidationError("sweep config: epsilons is empty");
    if (c.matchers.empty()) throw ValidationError("sweep config: matchers is empty");
    if (c.trials_per_cell == 0) throw ValidationError("sweep config: trials_per_cell must be >= 1");
    if (c.n_values.empty() == c.r_values.empty()) {
        throw ValidationError("sweep config: exactly one of n_values / r_values must be given");
    }
    for (std::size_t m : c.m_values) {
        if (m == 0) throw ValidationError("sweep config: m must be >= 1");
    }
    for (double e : c.epsilons) {
        if (!(e > 0.0)) throw ValidationError("sweep config: epsilons must be > 0");
    }
    for (std::size_t n : c.n_values) {
        if (n < 2) {
            throw ValidationError("sweep config: n must be >= 2 so that R = log2(n)/m > 0");
        }
    }
    for (double r : c.r_values) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw ValidationError("sweep config: R values must be finite and > 0");
        }
    }
}

}  // namespace

std::vector<std::size_t> sweep_n_grid(const SweepConfig& config, std::size_t m) {
    if (!config.n_values.empty()) return config.n_values;
    std::vector<std::size_t> grid;
    grid.reserve(config.r_values.size());
    for (double r : config.r_values) {
        double target = std::exp2(r * static_cast<double>(m));
        if (!(target < 9.0e15)) {
            throw ValidationError("sweep config: R = " + format_double(r) + " at m = " +
                                  std::to_string(m) + " implies an astronomically large n");
        }
        grid.push_back(std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(target))));
    }
    return grid;
}

SweepConfig parse_sweep_config_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("sweep config: parse failure: ") + e.what());
    }
    try {
        SweepConfig c{parse_spec_json(j.at("spec").dump())};
        c.m_values = j.at("m_values").get<std::vector<std::size_t>>();
        if (j.contains("n_values")) c.n_values = j["n_values"].get<std::vector<std::size_t>>();
        if (j.contains("r_values")) c.r_values = j["r_values"].get<std::vector<double>>();
        c.epsilons = j.at("epsilons").get<std::vector<double>>();
        for (const auto& name : j.at("matchers").get<std::vector<std::string>>()) {
            c.matchers.push_back(matcher_kind_from_name(name));
        }
        c.trials_per_cell = j.at("trials_per_cell").get<std::size_t>();
        c.root_seed = j.at("root_seed").get<std::uint64_t>();
        if (j.contains("oracle_cap")) c.oracle_cap = j["oracle_cap"].get<std::size_t>();
        if (j.contains("strict_typicality")) {
            c.strict_typicality = j["strict_typicality"].get<bool>();
        }
        if (j.contains("max_scalars")) c.max_scalars = j["max_scalars"].get<std::uint64_t>();
        validate_config(c);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("sweep config: ") + e.what());
    }
}

SweepConfig load_sweep_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open sweep config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_sweep_config_json(buf.str());
}

std::string sweep_config_to_json(const SweepConfig& config) {
    nlohmann::ordered_json j;
    j["spec"] = nlohmann::ordered_json::parse(config.spec.json());
    j["m_values"] = config.m_values;
    if (!config.n_values.empty()) j["n_values"] = config.n_values;
    if (!config.r_values.empty()) j["r_values"] = config.r_values;
    j["epsilons"] = config.epsilons;
    std::vector<std::string> names;
    for (MatcherKind k : config.matchers) names.emplace_back(matcher_kind_name(k));
    j["matchers"] = names;
    j["trials_per_cell"] = config.trials_per_cell;
    j["root_seed"] = config.root_seed;
    j["oracle_cap"] = config.oracle_cap;
    j["strict_typicality"] = config.strict_typicality;
    j["max_scalars"] = config.max_scalars;
    return j.dump();
}

namespace {

// One generated pair serves every (epsilon, matcher) combination of a
// (m, n, trial) task, so matchers are compared on identical data. Row order
// is grid order: (m, n) cells outermost, then epsilon, matcher, trial; the
// task's row for combo c is data_cell_base + c * trials + trial.
struct Task {
    std::size_t m, n;
    std::size_t data_cell;  // index over the (m, n) grid
    std::size_t trial;
    std::vector<std::size_t> row_indices;  // rows this task must fill, combo order
};

}  // namespace

SweepTable run_sweep(const SweepConfig& config, std::size_t workers) {
    validate_config(config);
    const std::size_t trials = config.trials_per_cell;
    const std::size_t combos = config.epsilons.size() * config.matchers.size();
    const std::string spec_id = config.spec.id();

    SweepTable table;
    std::vector<Task> tasks;
    std::size_t data_cell = 0;
    for (std::size_t m : config.m_values) {
        const auto n_grid = sweep_n_grid(config, m);
        for (std::size_t n : n_grid) {
            const std::size_t cell_base = table.size();
            const double r = std::log2(static_cast<double>(n)) / static_cast<double>(m);
            for (double eps : config.epsilons) {
                for (MatcherKind matcher : config.matchers) {
                    for (std::size_t trial = 0; trial < trials; ++trial) {
                        SweepRow row;
                        row.spec_id = spec_id;
                        row.m = m;
                        row.n = n;
                        row.r = r;
                        row.epsilon = eps;
                        row.matcher = matcher;
                        table.push_back(std::move(row));
                    }
                }
            }
            for (std::size_t trial = 0; trial < trials; ++trial) {
                Task task{m, n, data_cell, trial, {}};
                task.row_indices.reserve(combos);
                for (std::size_t c = 0; c < combos; ++c) {
                    task.row_indices.push_back(cell_base + c * trials + trial);
                }
                tasks.push_back(std::move(task));
            }
            ++data_cell;
        }
    }

    auto run_task = [&](const Task& task) {
        const std::uint64_t pair_seed =
            derive_seed(config.root_seed, "pair", task.data_cell * trials + task.trial);
        for (std::size_t idx : task.row_indices) table[idx].trial_seed = pair_seed;

        CorrelatedPair pair = [&]() {
            GenerateOptions opts;
            opts.max_scalars = config.max_scalars;
            return generate_correlated_pair(config.spec, task.m, task.n, pair_seed, opts);
        }();
        const auto truth = std::span<const std::uint32_t>(pair.db2.theta);

        // The MAP oracle ignores epsilon; solve it once per task.
        std::optional<MatchResult> map_result;
        std::string map_error;
        double map_seconds = 0.0;
        if (std::find(config.matchers.begin(), config.matchers.end(), MatcherKind::map_oracle) !=
            config.matchers.end()) {
            auto t0 = std::chrono::steady_clock::now();
            try {
                map_result = map_match(pair.db1, pair.db2.base, config.spec, config.oracle_cap);
                score_against(truth, *map_result);
            } catch (const std::exception& e) {
                map_error = e.what();
            }
            map_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                              .count();
        }

        std::size_t slot = 0;
        for (double eps : config.epsilons) {
            for (MatcherKind matcher : config.matchers) {
                SweepRow& row = table[task.row_indices[slot++]];
                auto t0 = std::chrono::steady_clock::now();
                try {
                    switch (matcher) {
                        case MatcherKind::typicality: {
                            const std::uint64_t fill_seed = derive_seed(
                                pair_seed, "typicality-fill",
                                static_cast<std::uint64_t>(slot));
                            SeededRng fill_rng(fill_seed);
                            TypicalityOptions opts;
                            opts.strict = config.strict_typicality;
                            MatchResult r = typicality_match(pair.db1, pair.db2.base, config.spec,
                                                             eps, fill_rng, opts);
                            row.success_fraction = score_against(truth, r);
                            row.ambiguity_fraction = r.ambiguity_fraction();
                            break;
                        }
                        case MatcherKind::map_oracle: {
                            if (!map_error.empty()) throw ValidationError(map_error);
                            row.success_fraction = *map_result->success_fraction;
                            row.ambiguity_fraction = map_result->ambiguity_fraction();
                            row.wall_time = map_seconds;
                            break;
                        }
                        case MatcherKind::random: {
                            SeededRng rng(derive_seed(pair_seed, "random-fill",
                                                      static_cast<std::uint64_t>(slot)));
                            MatchResult r = random_match(task.n, rng);
                            row.success_fraction = score_against(truth, r);
                            row.ambiguity_fraction = r.ambiguity_fraction();
                            break;
                        }
                    }
                } catch (const std::exception& e) {
                    row.success_fraction = std::nan("");
                    row.ambiguity_fraction = std::nan("");
                    row.status = std::string("error: ") + e.what();
                }
                if (matcher != MatcherKind::map_oracle) {
                    row.wall_time =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
                }
            }
        }
    };

    workers = std::max<std::size_t>(1, workers);
    if (workers == 1 || tasks.size() <= 1) {
        for (const Task& task : tasks) {
            try {
                run_task(task);
            } catch (const std::exception& e) {
                for (std::size_t idx : task.row_indices) {
                    table[idx].success_fraction = std::nan("");
                    table[idx].ambiguity_fraction = std::nan("");
                    table[idx].status = std::string("error: ") + e.what();
                }
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker_loop = [&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                try {
                    run_task(tasks[i]);
                } catch (const std::exception& e) {
                    for (std::size_t idx : tasks[i].row_indices) {
                        table[idx].success_fraction = std::nan("");
                        table[idx].ambiguity_fraction = std::nan("");
                        table[idx].status = std::string("error: ") + e.what();
                    }
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min(workers, tasks.size()); ++w) {
            pool.emplace_back(worker_loop);
        }
        for (auto& t : pool) t.join();
    }
    return table;
}

std::vector<std::pair<double, double>> success_curve(const SweepTable& table, std::size_t m,
                                                     double epsilon, MatcherKind matcher) {
    std::map<double, std::pair<double, std::size_t>> acc;  // R -> (sum, count)
    for (const SweepRow& row : table) {
        if (row.m != m || row.epsilon != epsilon || row.matcher != matcher || !row.ok()) continue;
        auto& slot = acc[row.r];
        slot.first += row.success_fraction;
        slot.second += 1;
    }
    std::vector<std::pair<double, double>> curve;
    curve.reserve(acc.size());
    for (const auto& [r, sum_count] : acc) {
        curve.emplace_back(r, sum_count.first / static_cast<double>(sum_count.second));
    }
    return curve;
}

ThresholdEstimate estimate_threshold(const SweepTable& table, const JointProcessSpec& spec,
                                     std::size_t m, double epsilon, MatcherKind matcher) {
    auto curve = success_curve(table, m, epsilon, matcher);
    if (curve.size() < 3) {
        throw ValidationError("estimate_threshold: needs >= 3 distinct R values at (m=" +
                              std::to_string(m) + ", epsilon=" + format_double(epsilon) +
                              ", matcher=" + matcher_kind_name(matcher) + "), have " +
                              std::to_string(curve.size()));
    }

    ThresholdEstimate est;
    est.m = m;
    est.epsilon = epsilon;
    est.matcher = matcher;
    est.analytic_mi = entropy_rates(spec).mi;

    // Success should fall as R grows; report the worst upward violation.
    double wiggle = 0.0;
    double running_min = curve.front().second;
    for (const auto& [r, mean] : curve) {
        wiggle = std::max(wiggle, mean - running_min);
        running_min = std::min(running_min, mean);
    }
    if (wiggle > 0.15) {
        est.warning = "mean success is non-monotone in R (max upward wiggle " +
                      format_double(wiggle) + " exceeds 0.15)";
    }

    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const auto [r_lo, s_lo] = curve[i];
        const auto [r_hi, s_hi] = curve[i + 1];
        if (s_lo >= 0.5 && s_hi < 0.5) {
            est.status = ThresholdStatus::ok;
            est.r_low = r_lo;
            est.r_high = r_hi;
            est.r_star = r_lo + (s_lo - 0.5) * (r_hi - r_lo) / (s_lo - s_hi);
            return est;
        }
    }
    if (curve.front().second < 0.5) {
        est.status = ThresholdStatus::below_range;
        est.r_low = est.r_star = est.r_high = curve.front().first;
    } else {
        est.status = ThresholdStatus::above_range;
        est.r_low = est.r_star = est.r_high = curve.back().first;
    }
    return est;
}

namespace {

const char* threshold_status_name(ThresholdStatus s) {
    switch (s) {
        case ThresholdStatus::ok: return "ok";
        case ThresholdStatus::above_range: return "above_range";
        case ThresholdStatus::below_range: return "below_range";
    }
    return "?";
}

}  // namespace

std::string render_csv(const SweepTable& table, bool include_timings) {
    std::string out = "spec_id,m,n,R,epsilon,matcher,trial_seed,success_fraction,"
                      "ambiguity_fraction";
    if (include_timings) out += ",wall_time";
    out += ",status\n";
    for (const SweepRow& row : table) {
        out += row.spec_id;
        out += ',';
        out += std::to_string(row.m);
        out += ',';
        out += std::to_string(row.n);
        out += ',';
        out += format_double(row.r);
        out += ',';
        out += format_double(row.epsilon);
        out += ',';
        out += matcher_kind_name(row.matcher);
        out += ',';
        out += std::to_string(row.trial_seed);
        out += ',';
        if (row.ok()) out += format_double(row.success_fraction);
        out += ',';
        if (row.ok()) out += format_double(row.ambiguity_fraction);
        if (include_timings) {
            out += ',';
            out += format_double(row.wall_time);
        }
        out += ',';
        out += row.status;
        out += '\n';
    }
    return out;
}

void emit_report(const SweepTable& table, const std::vector<ThresholdEstimate>& estimates,
                 const SweepConfig& config, const std::string& path,
                 const ReportOptions& options) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open report for writing: " + path);

    if (options.format == ReportFormat::csv) {
        out << render_csv(table, options.include_timings);
    } else {
        nlohmann::ordered_json j;
        j["tool_version"] = kToolVersion;
        j["config"] = nlohmann::ordered_json::parse(sweep_config_to_json(config));
        auto rows = nlohmann::ordered_json::array();
        for (const SweepRow& row : table) {
            nlohmann::ordered_json r;
            r["spec_id"] = row.spec_id;
            r["m"] = row.m;
            r["n"] = row.n;
            r["R"] = row.r;
            r["epsilon"] = row.epsilon;
            r["matcher"] = matcher_kind_name(row.matcher);
            r["trial_seed"] = row.trial_seed;
            if (row.ok()) {
                r["success_fraction"] = row.success_fraction;
                r["ambiguity_fraction"] = row.ambiguity_fraction;
            }
            if (options.include_timings) r["wall_time"] = row.wall_time;
            r["status"] = row.status;
            rows.push_back(std::move(r));
        }
        j["rows"] = std::move(rows);
        auto ests = nlohmann::ordered_json::array();
        for (const ThresholdEstimate& e : estimates) {
            nlohmann::ordered_json t;
            t["m"] = e.m;
            t["epsilon"] = e.epsilon;
            t["matcher"] = matcher_kind_name(e.matcher);
            t["status"] = threshold_status_name(e.status);
            t["method"] = e.method;
            if (e.status == ThresholdStatus::ok) t["r_star"] = e.r_star;
            t["band"] = {e.r_low, e.r_high};
            t["analytic_mi"] = e.analytic_mi;
            if (!e.warning.empty()) t["warning"] = e.warning;
            ests.push_back(std::move(t));
        }
        j["thresholds"] = std::move(ests);
        out << j.dump(2) << "\n";
    }
    if (!out.good()) throw IoError("failed writing report: " + path);
}

void emit_plot_data(const SweepTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open plot data for writing: " + path);

    // Stable grouping: matcher, then m, then epsilon.
    std::map<std::tuple<std::string, std::size_t, double>, bool> groups;
    for (const SweepRow& row : table) {
        groups[{matcher_kind_name(row.matcher), row.m, row.epsilon}] = true;
    }
    bool first = true;
    for (const auto& [key, _] : groups) {
        const auto& [matcher_name, m, epsilon] = key;
        if (!first) out << "\n\n";
        first = false;
        out << "# matcher=" << matcher_name << " m=" << m << " epsilon=" << format_double(epsilon)
            << "\n# R mean_success trials\n";
        std::map<double, std::pair<double, std::size_t>> acc;
        for (const SweepRow& row : table) {
            if (matcher_kind_name(row.matcher) != matcher_name || row.m != m ||
                row.epsilon != epsilon || !row.ok()) {
                continue;
            }
            acc[row.r].first += row.success_fraction;
            acc[row.r].second += 1;
        }
        for (const auto& [r, sum_count] : acc) {
            out << format_double(r) << ' '
                << format_double(sum_count.first / static_cast<double>(sum_count.second)) << ' '
                << sum_count.second << "\n";
        }
    }
    if (!out.good()) throw IoError("failed writing plot data: " + path);
}

}  // namespace dbmatch
