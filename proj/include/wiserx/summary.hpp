#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "wiserx/common.hpp"
#include "wiserx/engine.hpp"

namespace wiserx {

/// Per-trial figures. `label` is the strategy name, suffixed "-ungated" for
/// runs with tau gating disabled.
struct TrialSummary {
    std::string label;
    int trial = 0;
    std::uint64_t seed = 0;
    double noise_bearing_deg = 0.0;
    double noise_range_cm = 0.0;
    double coverage_pct = 0.0;
    Tick term_tick_max = 0;
    double overlap_pct = 0.0;
    double recovered_pct = 0.0;
    std::vector<Tick> termination_ticks;
    bool tick_budget_exceeded = false;
    friend bool operator==(const TrialSummary&, const TrialSummary&) = default;
};

struct Stat {
    double mean = 0.0;
    double std = 0.0;  // n - 1 denominator; 0 when n == 1
};

/// Mean and sample standard deviation.
inline Stat mean_std(std::span<const double> xs) {
    if (xs.empty()) throw EmptyInput("mean_std of nothing");
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    if (xs.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

struct Aggregate {
    std::string label;
    double noise_bearing_deg = 0.0;
    double noise_range_cm = 0.0;
    int n = 0;
    bool single_sample = false;
    Stat coverage_pct;
    Stat term_tick_max;
    Stat overlap_pct;
    Stat recovered_pct;
};

struct Summary {
    std::vector<TrialSummary> trials;
    std::vector<Aggregate> aggregates;  // one per (label, noise), in first-seen order
};

inline std::string run_label(const RunResult& r) {
    std::string label = to_string(r.strategy);
    if (r.config.contains("tau_gating") && !r.config.at("tau_gating").get<bool>()) label += "-ungated";
    return label;
}

inline TrialSummary summarize_run(const RunResult& r, int trial) {
    TrialSummary s;
    s.label = run_label(r);
    s.trial = trial;
    s.seed = r.seed;
    s.noise_bearing_deg = r.noise.bearing_std * 180.0 / std::numbers::pi;
    s.noise_range_cm = r.noise.range_std * 100.0;
    s.coverage_pct = r.final_coverage;
    s.term_tick_max = r.term_tick_max();
    s.overlap_pct = r.final_overlap;
    s.recovered_pct = r.recovered;
    s.termination_ticks = r.termination_ticks;
    s.tick_budget_exceeded = r.tick_budget_exceeded;
    return s;
}

/// Trials are numbered from 0 within each (label, noise) group, in input order.
inline Summary summarize(std::span<const RunResult> results) {
    if (results.empty()) throw EmptyInput("summarize needs at least one result");
    Summary out;
    using Key = std::tuple<std::string, double, double>;
    std::map<Key, std::size_t> group_of;
    std::vector<std::vector<const TrialSummary*>> members;
    out.trials.reserve(results.size());
    std::vector<Key> keys;
    for (const auto& r : results) {
        TrialSummary s = summarize_run(r, 0);
        const Key key{s.label, s.noise_bearing_deg, s.noise_range_cm};
        auto [it, fresh] = group_of.try_emplace(key, keys.size());
        if (fresh) keys.push_back(key);
        s.trial = static_cast<int>(std::count_if(out.trials.begin(), out.trials.end(), [&](const TrialSummary& t) {
            return Key{t.label, t.noise_bearing_deg, t.noise_range_cm} == key;
        }));
        out.trials.push_back(std::move(s));
    }
    for (const auto& key : keys) {
        std::vector<double> cov, term, ovl, rec;
        for (const auto& t : out.trials) {
            if (Key{t.label, t.noise_bearing_deg, t.noise_range_cm} != key) continue;
            cov.push_back(t.coverage_pct);
            term.push_back(static_cast<double>(t.term_tick_max));
            ovl.push_back(t.overlap_pct);
            rec.push_back(t.recovered_pct);
        }
        Aggregate a;
        std::tie(a.label, a.noise_bearing_deg, a.noise_range_cm) = key;
        a.n = static_cast<int>(cov.size());
        a.single_sample = a.n == 1;
        a.coverage_pct = mean_std(cov);
        a.term_tick_max = mean_std(term);
        a.overlap_pct = mean_std(ovl);
        a.recovered_pct = mean_std(rec);
        out.aggregates.push_back(a);
    }
    return out;
}

inline constexpr const char* trial_csv_header =
    "strategy,trial,seed,noise_bearing_deg,noise_range_cm,coverage_pct,term_tick_max,overlap_pct,recovered_pct";

/// Six significant digits, locale-independent.
inline std::string format6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string trials_csv(std::span<const TrialSummary> rows) {
    std::string out = std::string(trial_csv_header) + "\n";
    for (const auto& t : rows) {
        out += t.label + "," + std::to_string(t.trial) + "," + std::to_string(t.seed) + "," + format6(t.noise_bearing_deg) +
               "," + format6(t.noise_range_cm) + "," + format6(t.coverage_pct) + "," + std::to_string(t.term_tick_max) + "," +
               format6(t.overlap_pct) + "," + format6(t.recovered_pct) + "\n";
    }
    return out;
}

inline std::string aggregates_csv(std::span<const Aggregate> rows) {
    std::string out =
        "strategy,noise_bearing_deg,noise_range_cm,n,coverage_mean,coverage_std,term_tick_mean,term_tick_std,"
        "overlap_mean,overlap_std,recovered_mean,recovered_std\n";
    for (const auto& a : rows) {
        out += a.label + "," + format6(a.noise_bearing_deg) + "," + format6(a.noise_range_cm) + "," + std::to_string(a.n) + "," +
               format6(a.coverage_pct.mean) + "," + format6(a.coverage_pct.std) + "," + format6(a.term_tick_max.mean) + "," +
               format6(a.term_tick_max.std) + "," + format6(a.overlap_pct.mean) + "," + format6(a.overlap_pct.std) + "," +
               format6(a.recovered_pct.mean) + "," + format6(a.recovered_pct.std) + "\n";
    }
    return out;
}

/// Per-tick series of every run: strategy,trial,seed,tick,merged_coverage_pct,overlap_pct.
inline std::string series_csv(std::span<const RunResult> results, std::span<const TrialSummary> trials) {
    std::string out = "strategy,trial,seed,tick,merged_coverage_pct,overlap_pct\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const std::string prefix = trials[i].label + "," + std::to_string(trials[i].trial) + "," + std::to_string(trials[i].seed) + ",";
        for (const auto& t : results[i].series) {
            out += prefix + std::to_string(t.tick) + "," + format6(t.merged_coverage) + "," + format6(t.overlap) + "\n";
        }
    }
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << text;
    if (!f) throw Error("write failed: " + path);
}

inline void write_csv(std::span<const TrialSummary> rows, const std::string& path) { write_text(path, trials_csv(rows)); }

}  // namespace wiserx
