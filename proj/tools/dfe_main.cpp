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

// dfe: command-line front end.
//
//   dfe gen-state --target ghz --n 3 --fidelity 0.8 --seed 1 --out r.json
//   dfe estimate  --state r.json --target ghz --epsilon 0.1 --delta 0.1 --method shadow --seed 7
//   dfe bench     --target w --n-range 2..5 --epsilon 0.1 --delta 0.1 --trials 10 --seed 1 --out-dir out
//   dfe coeffs    --n 4 --k 2
//
// Exit codes: 0 success, 2 usage, 3 semantic mismatch, 4 I/O.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "dfe/dfe.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitMismatch = 3;
constexpr int kExitIo = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code_for(dfe::ErrorKind kind) {
    switch (kind) {
        case dfe::ErrorKind::InvalidArgument:
        case dfe::ErrorKind::DimensionOverflow:
            return kExitUsage;
        case dfe::ErrorKind::Io:
        case dfe::ErrorKind::BadDimension:
            return kExitIo;
        default:
            return kExitMismatch;
    }
}

struct TargetFlags {
    std::string kind;
    std::optional<int> n;
    std::optional<int> k;
    std::optional<std::string> bits;

    void add_to(CLI::App *app, bool with_n) {
        app->add_option("--target", kind, "Target state")
            ->required()
            ->check(CLI::IsMember({"ghz", "w", "dicke", "basis"}));
        if (with_n) {
            app->add_option("--n", n, "Number of qubits");
        }
        app->add_option("--k", k, "Dicke excitations");
        app->add_option("--b", bits, "Basis bitstring, e.g. 0101");
    }

    /// Builds the target; `n_default` fills in n when --n was not given.
    dfe::TargetState build(std::optional<int> n_default = std::nullopt) const {
        if (k && kind != "dicke") {
            throw UsageError("--k is only valid with --target dicke");
        }
        if (bits && kind != "basis") {
            throw UsageError("--b is only valid with --target basis");
        }
        std::optional<int> qubits = n ? n : n_default;
        if (kind == "basis") {
            if (!bits) {
                throw UsageError("--target basis requires --b");
            }
            const int len = static_cast<int>(bits->size());
            if (n && *n != len) {
                throw UsageError("--n does not match the length of --b");
            }
            dfe::require_qubits(len, "--b");
            return dfe::BasisState{len, dfe::parse_bitstring(*bits)};
        }
        if (!qubits) {
            throw UsageError("--n is required");
        }
        if (kind == "ghz") {
            return dfe::Ghz{*qubits};
        }
        if (kind == "w") {
            return dfe::WState{*qubits};
        }
        if (!k) {
            throw UsageError("--target dicke requires --k");
        }
        return dfe::Dicke{*qubits, *k};
    }
};

std::string json_number(double v) {
    return dfe::format_double(v);
}

int cmd_gen_state(const TargetFlags &tf, double fidelity, std::uint64_t seed, const std::string &out) {
    const auto target = tf.build();
    dfe::validate_target(target);
    const auto rho = dfe::random_state_with_fidelity({target, fidelity, seed});
    dfe::write_state_file(out, rho);
    return 0;
}

struct EstimateFlags {
    std::string state_path;
    double epsilon = 0.1;
    double delta = 0.1;
    std::string method = "shadow";
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> n_samples;
    std::string count_rule = "derived";
    unsigned threads = 0;
};

int cmd_estimate(const TargetFlags &tf, const EstimateFlags &f) {
    const dfe::ErrorBudget budget{f.epsilon, f.delta};
    budget.validate();
    if (f.n_samples && *f.n_samples == 0) {
        throw UsageError("--n-samples must be >= 1");
    }
    if (f.n_samples && f.method == "baseline") {
        throw UsageError("--n-samples does not apply to the baseline method");
    }
    const auto rho = dfe::read_state_file(f.state_path);
    const auto target = tf.build(rho.qubits());
    dfe::validate_target(target);
    if (dfe::qubits(target) != rho.qubits()) {
        throw dfe::Error(dfe::ErrorKind::DimensionMismatch,
                         "state has " + std::to_string(rho.qubits()) + " qubits but target has " +
                             std::to_string(dfe::qubits(target)));
    }
    const dfe::MeasuredState state(rho);
    const auto rule = f.count_rule == "listing" ? dfe::CountRule::Listing : dfe::CountRule::Derived;
    double value = 0.0;
    std::uint64_t used = 0;
    std::uint64_t plan_n = 0;
    if (f.method == "baseline") {
        const auto cfg = dfe::baseline_config(target, budget);
        const auto r = dfe::baseline_estimate(state, target, cfg, f.seed, f.threads);
        value = r.estimate;
        used = r.measurements_used;
        plan_n = cfg.labels;
    } else {
        const auto p = dfe::plan(target, budget, rule);
        plan_n = p.samples;
        if (f.method == "shadow") {
            dfe::EstimateOptions opts;
            opts.samples = f.n_samples;
            opts.threads = f.threads;
            const auto r = dfe::estimate(state, p, f.seed, opts);
            value = r.estimate;
            used = r.samples_used;
        } else {
            const auto r = dfe::vanilla_shadow_estimate(state, target, f.n_samples.value_or(p.samples), f.seed,
                                                        f.threads);
            value = r.estimate;
            used = r.measurements_used;
        }
    }
    std::cout << "{\"estimate\": " << json_number(value) << ", \"measurements\": " << used << ", \"method\": \""
              << f.method << "\", \"plan_n\": " << plan_n << "}\n";
    return 0;
}

struct BenchFlags {
    std::string n_range;
    double epsilon = 0.1;
    double delta = 0.1;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string methods = "baseline,shadow,vanilla";
    double grid_start = 0.0;
    double grid_stop = 1.0;
    double grid_step = 0.01;
    unsigned threads = 0;
};

std::pair<int, int> parse_range(const std::string &s) {
    const auto dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            const int v = std::stoi(s);
            return {v, v};
        }
        std::size_t used_a = 0, used_b = 0;
        const int a = std::stoi(s.substr(0, dots), &used_a);
        const std::string rest = s.substr(dots + 2);
        const int b = std::stoi(rest, &used_b);
        if (used_a != dots || used_b != rest.size() || a > b) {
            throw UsageError("");
        }
        return {a, b};
    } catch (const std::exception &) {
        throw UsageError("--n-range must look like A..B with A <= B");
    }
}

int cmd_bench(TargetFlags tf, const BenchFlags &f) {
    if (f.trials == 0) {
        throw UsageError("--trials must be >= 1");
    }
    const auto [lo, hi] = parse_range(f.n_range);
    dfe::BenchConfig cfg;
    cfg.budget = {f.epsilon, f.delta};
    cfg.budget.validate();
    cfg.grid = {f.grid_start, f.grid_stop, f.grid_step};
    cfg.trials = f.trials;
    cfg.seed = f.seed;
    cfg.threads = f.threads;
    cfg.methods.clear();
    std::stringstream ms(f.methods);
    std::string m;
    while (std::getline(ms, m, ',')) {
        cfg.methods.push_back(dfe::parse_method(m));
    }
    if (tf.kind == "basis") {
        throw UsageError("bench does not support basis targets");
    }
    for (int n = lo; n <= hi; ++n) {
        tf.n = n;
        const auto t = tf.build();
        dfe::validate_target(t);
        cfg.targets.push_back(t);
    }
    std::error_code ec;
    std::filesystem::create_directories(f.out_dir, ec);
    if (ec) {
        throw dfe::Error(dfe::ErrorKind::Io, "cannot create " + f.out_dir + ": " + ec.message());
    }
    std::uint64_t last_pct = 101;
    const auto records = dfe::run_bench(cfg, [&](std::uint64_t done, std::uint64_t total) {
        const std::uint64_t pct = done * 100 / total;
        if (pct != last_pct && (pct % 5 == 0 || done == total)) {
            last_pct = pct;
            std::cerr << "bench: " << done << "/" << total << " items (" << pct << "%)\n";
        }
    });
    dfe::write_bench_outputs(f.out_dir, records);
    return 0;
}

int cmd_coeffs(int n, int k, std::optional<double> epsilon, std::optional<double> delta) {
    if (epsilon.has_value() != delta.has_value()) {
        throw UsageError("--epsilon and --delta must be given together");
    }
    if (k < 0 || k > n) {
        throw UsageError("--k must satisfy 0 <= k <= n");
    }
    dfe::require_qubits(n, "--n");
    const auto dc = dfe::dicke_coefficients(n, k);
    std::ostringstream out;
    out << "{\"c\": {";
    for (int l = dc.l_min; l <= dc.l_max(); ++l) {
        out << (l == dc.l_min ? "" : ", ") << "\"" << l << "\": " << dc.c(l);
    }
    out << "}, \"S\": " << json_number(dc.S);
    if (epsilon) {
        const auto p = dfe::plan(dfe::Dicke{n, k}, {*epsilon, *delta});
        out << ", \"plan_n_for\": {\"epsilon\": " << json_number(*epsilon) << ", \"delta\": " << json_number(*delta)
            << ", \"n\": " << p.samples << "}";
    }
    out << "}\n";
    std::cout << out.str();
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Direct fidelity estimation with local Pauli measurements"};
    app.require_subcommand(1);

    auto *gen = app.add_subcommand("gen-state", "Write a random state with a given fidelity to a target");
    TargetFlags gen_target;
    gen_target.add_to(gen, true);
    double gen_fidelity = 1.0;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--fidelity", gen_fidelity, "Fidelity with the target")->required()->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", gen_seed, "RNG seed")->required();
    gen->add_option("--out", gen_out, "Output JSON path")->required();

    auto *est = app.add_subcommand("estimate", "Estimate the fidelity of a stored state");
    TargetFlags est_target;
    est_target.add_to(est, true);
    EstimateFlags ef;
    est->add_option("--state", ef.state_path, "State JSON path")->required();
    est->add_option("--epsilon", ef.epsilon, "Additive error")->required();
    est->add_option("--delta", ef.delta, "Failure probability")->required();
    est->add_option("--method", ef.method, "Estimator")->check(CLI::IsMember({"shadow", "baseline", "vanilla"}));
    est->add_option("--seed", ef.seed, "RNG seed")->required();
    est->add_option("--n-samples", ef.n_samples, "Override the planned sample count");
    est->add_option("--count-rule", ef.count_rule, "Sample-count formula for GHZ/W")
        ->check(CLI::IsMember({"derived", "listing"}));
    est->add_option("--threads", ef.threads, "Worker threads (0 = all cores)");

    auto *bench = app.add_subcommand("bench", "Run the MSE benchmark over a fidelity grid");
    TargetFlags bench_target;
    bench_target.add_to(bench, false);
    BenchFlags bf;
    bench->add_option("--n-range", bf.n_range, "Qubit range A..B")->required();
    bench->add_option("--epsilon", bf.epsilon, "Additive error")->required();
    bench->add_option("--delta", bf.delta, "Failure probability")->required();
    bench->add_option("--trials", bf.trials, "Trials per grid point")->required();
    bench->add_option("--seed", bf.seed, "Master seed")->required();
    bench->add_option("--out-dir", bf.out_dir, "Output directory")->required();
    bench->add_option("--methods", bf.methods, "Comma-separated subset of baseline,shadow,vanilla");
    bench->add_option("--grid-start", bf.grid_start, "First fidelity");
    bench->add_option("--grid-stop", bf.grid_stop, "Last fidelity");
    bench->add_option("--grid-step", bf.grid_step, "Fidelity step");
    bench->add_option("--threads", bf.threads, "Worker threads (0 = all cores)");

    auto *coeffs = app.add_subcommand("coeffs", "Print Dicke pair counts and the arm normalization");
    int co_n = 0;
    int co_k = 0;
    std::optional<double> co_eps;
    std::optional<double> co_delta;
    coeffs->add_option("--n", co_n, "Number of qubits")->required();
    coeffs->add_option("--k", co_k, "Excitations")->required();
    coeffs->add_option("--epsilon", co_eps, "Also report the planned sample count for this epsilon");
    coeffs->add_option("--delta", co_delta, "Also report the planned sample count for this delta");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*gen) {
            return cmd_gen_state(gen_target, gen_fidelity, gen_seed, gen_out);
        }
        if (*est) {
            return cmd_estimate(est_target, ef);
        }
        if (*bench) {
            return cmd_bench(bench_target, bf);
        }
        return cmd_coeffs(co_n, co_k, co_eps, co_delta);
    } catch (const UsageError &e) {
        std::cerr << "dfe: " << e.what() << '\n';
        return kExitUsage;
    } catch (const dfe::Error &e) {
        std::cerr << "dfe: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception &e) {
        std::cerr << "dfe: " << e.what() << '\n';
        return kExitMismatch;
    }
}
