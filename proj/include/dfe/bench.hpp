// Copyright 2026 The dfe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * MSE benchmark over a fidelity grid. For every grid point and trial a random state with
 * that fidelity is drawn, the importance-sampling baseline runs first, and the tailored and
 * vanilla estimators then get exactly the baseline's measurement count.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "dfe/baseline.hpp"
#include "dfe/parallel.hpp"
#include "dfe/shadow_dfe.hpp"
#include "dfe/states.hpp"

namespace dfe {

enum class Method : std::uint8_t { Baseline, Shadow, Vanilla };

inline const char *method_name(Method m) {
    switch (m) {
        case Method::Baseline:
            return "baseline";
        case Method::Shadow:
            return "shadow";
        case Method::Vanilla:
            return "vanilla";
    }
    return "?";
}

inline Method parse_method(const std::string &s) {
    if (s == "baseline") {
        return Method::Baseline;
    }
    if (s == "shadow") {
        return Method::Shadow;
    }
    if (s == "vanilla") {
        return Method::Vanilla;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown method '" + s + "'");
}

struct FidelityGrid {
    double start = 0.0;
    double stop = 1.0;
    double step = 0.01;

    /// Grid values rounded to 12 decimals so 0.07 is 0.07 and not 0.07000000000000001.
    std::vector<double> values() const {
        if (!(start >= 0.0 && stop <= 1.0 && start <= stop)) {
            throw Error(ErrorKind::InvalidArgument, "fidelity grid must satisfy 0 <= start <= stop <= 1");
        }
        if (!(step > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "fidelity grid step must be > 0");
        }
        std::vector<double> out;
        const auto count = static_cast<std::uint64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::uint64_t i = 0; i < count; ++i) {
            const double v = std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12;
            out.push_back(std::min(v, 1.0));
        }
        return out;
    }
};

struct BenchConfig {
    /// One target per n; records of different targets are reported separately.
    std::vector<TargetState> targets;
    ErrorBudget budget;
    FidelityGrid grid;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    std::vector<Method> methods = {Method::Baseline, Method::Shadow, Method::Vanilla};
    unsigned threads = 0;
};

struct BenchRecord {
    std::string target;
    int n = 0;
    int k = 0;
    double true_fidelity = 0.0;
    std::string method;
    std::uint64_t measurements = 0;
    double estimate = 0.0;
    double sq_error = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const BenchRecord &) const = default;
};

/// Deterministic output order.
inline bool record_less(const BenchRecord &a, const BenchRecord &b) {
    return std::tie(a.target, a.n, a.k, a.true_fidelity, a.method, a.seed) <
           std::tie(b.target, b.n, b.k, b.true_fidelity, b.method, b.seed);
}

/// Seed of one (grid point, trial) work item. `tag` 0 is the state; methods use 1 + Method.
inline std::uint64_t bench_seed(std::uint64_t master, const TargetState &t, std::uint64_t grid_index,
                                std::uint64_t trial, std::uint64_t tag) {
    std::uint64_t h = 0;
    for (char c : target_name(t)) {
        h = splitmix64(h ^ static_cast<unsigned char>(c));
    }
    return derive_seed(master, {h, static_cast<std::uint64_t>(qubits(t)), static_cast<std::uint64_t>(excitations(t)),
                                grid_index, trial, tag});
}

using BenchProgress = std::function<void(std::uint64_t done, std::uint64_t total)>;

/// Runs every (target, grid point, trial) item and returns the records sorted by record_less.
inline std::vector<BenchRecord> run_bench(const BenchConfig &cfg, const BenchProgress &progress = {}) {
    cfg.budget.validate();
    if (cfg.targets.empty()) {
        throw Error(ErrorKind::InvalidArgument, "bench needs at least one target");
    }
    if (cfg.trials == 0) {
        throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
    }
    if (cfg.methods.empty()) {
        throw Error(ErrorKind::InvalidArgument, "bench needs at least one method");
    }
    const auto grid = cfg.grid.values();
    const bool want_baseline = std::count(cfg.methods.begin(), cfg.methods.end(), Method::Baseline) > 0;
    const bool want_shadow = std::count(cfg.methods.begin(), cfg.methods.end(), Method::Shadow) > 0;
    const bool want_vanilla = std::count(cfg.methods.begin(), cfg.methods.end(), Method::Vanilla) > 0;

    struct TargetInfo {
        TargetState target;
        ProtocolPlan plan;
        BaselineConfig baseline;
        std::shared_ptr<const CharacteristicTable> table;
    };
    std::vector<TargetInfo> infos;
    for (const auto &t : cfg.targets) {
        TargetInfo info{t, plan(t, cfg.budget), baseline_config(t, cfg.budget), nullptr};
        if (want_baseline) {
            info.table = std::make_shared<const CharacteristicTable>(characteristic_table(t));
        }
        infos.push_back(std::move(info));
    }

    const std::uint64_t per_target = grid.size() * cfg.trials;
    const std::uint64_t total = per_target * infos.size();
    std::vector<std::vector<BenchRecord>> slots(total);
    std::mutex progress_mu;
    std::uint64_t done = 0;

    // Work items run serially inside; the pool spreads items, so inner estimators use one thread.
    parallel_for(total, cfg.threads, [&](std::size_t item) {
        const auto &info = infos[item / per_target];
        const std::uint64_t local = item % per_target;
        const std::uint64_t gi = local / cfg.trials;
        const std::uint64_t trial = local % cfg.trials;
        const double f = grid[gi];
        const auto seed_for = [&](std::uint64_t tag) { return bench_seed(cfg.seed, info.target, gi, trial, tag); };
        try {
            const DensityMatrix rho = random_state_with_fidelity({info.target, f, seed_for(0)});
            const double truth = fidelity(rho, info.target);
            const MeasuredState state(rho);
            std::vector<BenchRecord> out;
            const auto emit = [&](Method m, std::uint64_t used, double est, std::uint64_t seed) {
                const double err = est - truth;
                out.push_back(BenchRecord{target_name(info.target), qubits(info.target), excitations(info.target),
                                          truth, method_name(m), used, est, err * err, seed});
            };
            std::uint64_t matched = info.plan.samples;
            if (want_baseline) {
                const std::uint64_t s = seed_for(1 + static_cast<std::uint64_t>(Method::Baseline));
                const auto r = baseline_estimate(state, *info.table, info.baseline, s, 1);
                matched = r.measurements_used;
                emit(Method::Baseline, r.measurements_used, r.estimate, s);
            }
            if (want_shadow) {
                const std::uint64_t s = seed_for(1 + static_cast<std::uint64_t>(Method::Shadow));
                EstimateOptions opts;
                opts.samples = matched;
                opts.threads = 1;
                const auto r = estimate(state, info.plan, s, opts);
                emit(Method::Shadow, r.samples_used, r.estimate, s);
            }
            if (want_vanilla) {
                const std::uint64_t s = seed_for(1 + static_cast<std::uint64_t>(Method::Vanilla));
                const auto r = vanilla_shadow_estimate(state, info.target, matched, s, 1);
                emit(Method::Vanilla, r.measurements_used, r.estimate, s);
            }
            slots[item] = std::move(out);
        } catch (const Error &e) {
            std::ostringstream ctx;
            ctx << e.what() << " (target " << target_name(info.target) << ", n=" << qubits(info.target)
                << ", fidelity " << f << ", trial " << trial << ")";
            throw Error(e.kind(), ctx.str());
        }
        if (progress) {
            std::lock_guard<std::mutex> lock(progress_mu);
            progress(++done, total);
        }
    });

    std::vector<BenchRecord> records;
    for (auto &s : slots) {
        for (auto &r : s) {
            records.push_back(std::move(r));
        }
    }
    std::sort(records.begin(), records.end(), record_less);
    return records;
}

// ---------------------------------------------------------------------------
// Aggregation.

struct MseSummary {
    double mse = 0.0;
    /// Half-width of the normal-approximation 95% interval, 1.96 s / sqrt(T).
    double ci95 = 0.0;
    std::uint64_t count = 0;
};

/// Mean and interval of a set of squared errors. Values are sorted before summing so the
/// result does not depend on input order.
inline MseSummary summarize(std::vector<double> values) {
    if (values.empty()) {
        throw Error(ErrorKind::InvalidArgument, "cannot summarize an empty group");
    }
    std::sort(values.begin(), values.end());
    CompensatedSum sum;
    for (double v : values) {
        sum.add(v);
    }
    const auto t = static_cast<double>(values.size());
    MseSummary s;
    s.count = values.size();
    s.mse = sum.value() / t;
    if (values.size() > 1) {
        CompensatedSum dev;
        for (double v : values) {
            dev.add((v - s.mse) * (v - s.mse));
        }
        s.ci95 = 1.96 * std::sqrt(dev.value() / (t - 1.0)) / std::sqrt(t);
    }
    return s;
}

struct GroupSummary {
    std::string target;
    int n = 0;
    std::string method;
    MseSummary stats;
};

/// One group per (target, n, method), in sorted key order.
inline std::vector<GroupSummary> aggregate(const std::vector<BenchRecord> &records) {
    if (records.empty()) {
        throw Error(ErrorKind::InvalidArgument, "no records to aggregate");
    }
    std::map<std::tuple<std::string, int, std::string>, std::vector<double>> groups;
    for (const auto &r : records) {
        groups[{r.target, r.n, r.method}].push_back(r.sq_error);
    }
    std::vector<GroupSummary> out;
    for (auto &[key, values] : groups) {
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), summarize(std::move(values))});
    }
    return out;
}

struct FidelitySummary {
    std::string target;
    int n = 0;
    std::string method;
    double fidelity = 0.0;
    MseSummary stats;
};

/// Per-fidelity breakdown; true fidelities are grouped after rounding to 1e-9.
inline std::vector<FidelitySummary> aggregate_by_fidelity(const std::vector<BenchRecord> &records) {
    std::map<std::tuple<std::string, int, std::string, double>, std::vector<double>> groups;
    for (const auto &r : records) {
        const double f = std::round(r.true_fidelity * 1e9) / 1e9;
        groups[{r.target, r.n, r.method, f}].push_back(r.sq_error);
    }
    std::vector<FidelitySummary> out;
    for (auto &[key, values] : groups) {
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key),
                       summarize(std::move(values))});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Files.

inline constexpr const char *kCsvHeader = "target,n,k,true_fidelity,method,measurements,estimate,sq_error,seed";

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream &out, const std::vector<BenchRecord> &records) {
    out << kCsvHeader << '\n';
    for (const auto &r : records) {
        out << r.target << ',' << r.n << ',' << r.k << ',' << format_double(r.true_fidelity) << ',' << r.method << ','
            << r.measurements << ',' << format_double(r.estimate) << ',' << format_double(r.sq_error) << ','
            << r.seed << '\n';
    }
}

inline std::vector<BenchRecord> read_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw Error(ErrorKind::Io, "results CSV is missing the expected header");
    }
    std::vector<BenchRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (f.size() != 9) {
            throw Error(ErrorKind::Io, "results CSV line " + std::to_string(line_no) + " has " +
                                           std::to_string(f.size()) + " fields");
        }
        try {
            out.push_back(BenchRecord{f[0], std::stoi(f[1]), std::stoi(f[2]), std::stod(f[3]), f[4],
                                      std::stoull(f[5]), std::stod(f[6]), std::stod(f[7]), std::stoull(f[8])});
        } catch (const std::logic_error &) {
            throw Error(ErrorKind::Io, "results CSV line " + std::to_string(line_no) + " is malformed");
        }
    }
    return out;
}

inline nlohmann::json summary_json(const std::vector<GroupSummary> &groups) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &g : groups) {
        arr.push_back({{"target", g.target},
                       {"n", g.n},
                       {"method", g.method},
                       {"mse", g.stats.mse},
                       {"ci95", g.stats.ci95},
                       {"trials", g.stats.count}});
    }
    return {{"groups", std::move(arr)}};
}

inline void write_by_fidelity_csv(std::ostream &out, const std::vector<FidelitySummary> &rows) {
    out << "target,n,method,fidelity,mse,ci95,count\n";
    for (const auto &r : rows) {
        out << r.target << ',' << r.n << ',' << r.method << ',' << format_double(r.fidelity) << ','
            << format_double(r.stats.mse) << ',' << format_double(r.stats.ci95) << ',' << r.stats.count << '\n';
    }
}

/// Writes results.csv, summary.json and by_fidelity.csv into `dir` (which must exist).
inline void write_bench_outputs(const std::string &dir, const std::vector<BenchRecord> &records) {
    const auto open = [&](const std::string &name) {
        std::ofstream f(dir + "/" + name);
        if (!f) {
            throw Error(ErrorKind::Io, "cannot open " + dir + "/" + name + " for writing");
        }
        return f;
    };
    {
        auto f = open("results.csv");
        write_csv(f, records);
    }
    {
        auto f = open("summary.json");
        f << summary_json(aggregate(records)).dump(2) << '\n';
    }
    {
        auto f = open("by_fidelity.csv");
        write_by_fidelity_csv(f, aggregate_by_fidelity(records));
    }
}

}  // namespace dfe
