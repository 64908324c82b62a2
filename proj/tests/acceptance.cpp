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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero if any fail.
//
//   acceptance            run all criteria
//   acceptance 3 7        run only criteria 3 and 7

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "dfe/dfe.hpp"
#include "enumerate.hpp"
#include "oracles.hpp"

using namespace dfe;

namespace {

struct Outcome_ {
    bool pass;
    std::string detail;
};

using Check = std::function<Outcome_()>;

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

oracle::Matrix dense_target(const TargetState &t) {
    const int n = qubits(t);
    if (std::holds_alternative<Ghz>(t)) {
        return oracle::ghz(n);
    }
    return oracle::dicke(n, excitations(t));
}

// 1. Local traces against the twelve table entries, compared exactly.
Outcome_ table_entries() {
    const Complex i(0.0, 1.0);
    struct Row {
        int bra, outcome, ket;
        Complex x, y, z;
    };
    const Row rows[] = {
        {0, 0, 1, 0.5, -0.5 * i, 0.0},
        {0, 1, 1, -0.5, 0.5 * i, 0.0},
        {1, 0, 0, 0.5, 0.5 * i, 0.0},
        {1, 1, 0, -0.5, -0.5 * i, 0.0},
    };
    int matched = 0;
    for (const auto &r : rows) {
        matched += local_trace_element(LocalUnitary::Hadamard, r.bra, r.outcome, r.ket) == r.x;
        matched += local_trace_element(LocalUnitary::HadamardSdg, r.bra, r.outcome, r.ket) == r.y;
        matched += local_trace_element(LocalUnitary::Identity, r.bra, r.outcome, r.ket) == r.z;
    }
    return {matched == 12, std::to_string(matched) + "/12 entries exact"};
}

// 2. For each basis target b and each outcome, the 3^n-setting average of the diagonal
// snapshot element is the indicator of outcome == b.
Outcome_ basis_identity() {
    double worst = 0.0;
    for (int n = 2; n <= 3; ++n) {
        const std::uint64_t dim = std::uint64_t{1} << n;
        const auto words = oracle::all_words("XYZ", n);
        for (std::uint64_t b = 0; b < dim; ++b) {
            for (std::uint64_t o = 0; o < dim; ++o) {
                CompensatedSum acc;
                for (const auto &w : words) {
                    acc.add(snapshot_matrix_element(b, b, MeasurementSetting::from_letters(w), Outcome{o}).real());
                }
                const double avg = acc.value() / static_cast<double>(words.size());
                worst = std::max(worst, std::abs(avg - (b == o ? 1.0 : 0.0)));
            }
        }
    }
    return {worst <= 1e-12, "max deviation " + fmt(worst) + " (tol 1e-12)"};
}

// 3. Enumerated E[F-hat] + offset equals tr(rho sigma).
Outcome_ exact_unbiasedness() {
    Rng rng(20260301);
    double worst = 0.0;
    int cases = 0;
    for (const TargetState &t : {TargetState{Ghz{2}}, TargetState{Ghz{3}}, TargetState{WState{2}},
                                 TargetState{WState{3}}, TargetState{Dicke{4, 2}}}) {
        const auto sigma = dense_target(t);
        for (int rep = 0; rep < 20; ++rep) {
            const auto rho = random_density_matrix(qubits(t), rng);
            worst = std::max(worst, std::abs(enumerate::expected_estimate(rho, t) - oracle::fidelity(rho, sigma)));
            ++cases;
        }
    }
    return {worst <= 1e-10, std::to_string(cases) + " states, max |E - F| " + fmt(worst) + " (tol 1e-10)"};
}

// 4. No single draw exceeds the almost-sure bound.
Outcome_ estimator_bounds() {
    const std::uint64_t draws = 1'000'000;
    std::ostringstream detail;
    bool pass = true;
    for (const TargetState &t : {TargetState{Ghz{5}}, TargetState{WState{5}}, TargetState{Dicke{5, 2}}}) {
        const auto p = plan(t, {0.1, 0.1});
        const MeasuredState state(random_state_with_fidelity({t, 0.5, 4}));
        Rng rng(5);
        std::uint64_t violations = 0;
        double max_abs = 0.0;
        for (std::uint64_t i = 0; i < draws; ++i) {
            EstimatorSample s;
            if (std::holds_alternative<Ghz>(t)) {
                s = ghz_sample(state, rng);
            } else if (std::holds_alternative<WState>(t)) {
                s = w_sample(state, rng);
            } else {
                s = dicke_sample(state, *p.dicke, rng);
            }
            max_abs = std::max(max_abs, std::abs(s.value));
            violations += std::abs(s.value) > p.bound;
        }
        pass = pass && violations == 0;
        detail << target_name(t) << qubits(t) << ": " << violations << " violations, max " << fmt(max_abs)
               << " <= " << fmt(p.bound) << "; ";
    }
    return {pass, detail.str()};
}

// 5. Closed-form pair counts against brute force.
Outcome_ dicke_counts() {
    int checked = 0;
    int bad = 0;
    for (int n = 1; n <= 8; ++n) {
        for (int k = 0; k <= n; ++k) {
            const auto dc = dicke_coefficients(n, k);
            const auto brute = oracle::dicke_pair_counts(n, k);
            for (int l = 0; l <= k; ++l) {
                const auto it = brute.find(l);
                bad += dc.c(l) != (it == brute.end() ? 0 : it->second);
                ++checked;
            }
            if (k == 1) {
                bad += 2.0 * dc.S != n * n - n + 1.0;
            }
        }
    }
    return {bad == 0, std::to_string(checked) + " (n,k,l) counts, " + std::to_string(bad) + " mismatches"};
}

// 6. Sample counts and the GHZ bound ratio.
Outcome_ sample_counts() {
    const auto ghz = plan(Ghz{3}, {0.05, 0.05}).samples;
    const auto w = plan(WState{2}, {0.1, 0.1}).samples;
    const auto dicke = plan(Dicke{4, 2}, {0.1, 0.1});
    double worst_ratio = 0.0;
    for (double delta : {0.01, 0.05, 0.1, 0.2, 0.5}) {
        const ErrorBudget b{0.05, delta};
        const double ratio = baseline_approx_measurements(Ghz{3}, b) / plan(Ghz{3}, b).raw_samples;
        const double want = 128.0 / 9.0 * (1.0 + std::log(2.0) / std::log(2.0 / delta));
        worst_ratio = std::max(worst_ratio, std::abs(ratio - want));
    }
    const bool pass = ghz == 1660 && w == 338 && dicke.samples == 3998 && worst_ratio <= 1e-9;
    return {pass, "GHZ " + std::to_string(ghz) + " (want 1660), W " + std::to_string(w) + " (want 338), Dicke " +
                      std::to_string(dicke.samples) + " (want 3998; unrounded " + fmt(dicke.raw_samples) +
                      "), ratio err " + fmt(worst_ratio)};
}

// 7. Empirical failure rate of the (epsilon, delta) guarantee.
Outcome_ hoeffding_coverage() {
    const int runs = 500;
    const ErrorBudget budget{0.1, 0.1};
    const double slack = 1.96 * std::sqrt(budget.delta * (1 - budget.delta) / runs);
    std::ostringstream detail;
    bool pass = true;
    for (const TargetState &t : {TargetState{Ghz{4}}, TargetState{WState{4}}}) {
        const auto rho = random_state_with_fidelity({t, 0.6, 2026});
        const double f = fidelity(rho, t);
        const MeasuredState state(rho);
        const auto p = plan(t, budget);
        int failures = 0;
        for (int r = 0; r < runs; ++r) {
            const auto est = estimate(state, p, derive_seed(7, {static_cast<std::uint64_t>(r)}));
            failures += std::abs(est.estimate - f) >= budget.epsilon;
        }
        const double rate = static_cast<double>(failures) / runs;
        pass = pass && rate <= budget.delta + slack;
        detail << target_name(t) << "4: " << failures << "/" << runs << " failures (limit " << fmt(budget.delta + slack)
               << "); ";
    }
    return {pass, detail.str()};
}

// 8. MSE ordering over the fidelity grid with matched measurement counts.
Outcome_ mse_comparison() {
    BenchConfig cfg;
    for (int n = 2; n <= 5; ++n) {
        cfg.targets.push_back(Ghz{n});
        cfg.targets.push_back(WState{n});
    }
    cfg.budget = {0.1, 0.1};
    cfg.trials = 10;  // x 101 grid points = 1010 trials per (target, n)
    cfg.seed = 8;
    cfg.methods = {Method::Baseline, Method::Shadow};
    const auto groups = aggregate(run_bench(cfg));
    std::ostringstream detail;
    bool pass = true;
    for (std::size_t g = 0; g + 1 < groups.size(); g += 2) {
        const auto &base = groups[g];
        const auto &shadow = groups[g + 1];
        const bool ok = base.method == "baseline" && shadow.method == "shadow" && base.n == shadow.n &&
                        shadow.stats.mse + shadow.stats.ci95 < base.stats.mse - base.stats.ci95;
        pass = pass && ok;
        detail << base.target << base.n << (ok ? " ok" : " BAD") << " (" << fmt(shadow.stats.mse) << "+-"
               << fmt(shadow.stats.ci95) << " vs " << fmt(base.stats.mse) << "+-" << fmt(base.stats.ci95) << "); ";
    }
    return {pass, detail.str()};
}

// 9. Byte-identical bench output across worker counts, through the CLI.
Outcome_ bench_determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "dfe_acceptance_det";
    fs::remove_all(dir);
    std::string first;
    bool pass = true;
    for (int threads : {1, 2, 8}) {
        const fs::path out = dir / std::to_string(threads);
        const std::string cmd = std::string(DFE_CLI_PATH) +
                                " bench --target w --n-range 2..4 --epsilon 0.2 --delta 0.2 --trials 2 --seed 9"
                                " --threads " +
                                std::to_string(threads) + " --out-dir " + out.string() + " 2>/dev/null";
        const int status = std::system(cmd.c_str());
        if (status != 0) {
            return {false, "bench exited with status " + std::to_string(status)};
        }
        std::ifstream f(out / "results.csv");
        std::stringstream ss;
        ss << f.rdbuf();
        if (threads == 1) {
            first = ss.str();
        } else {
            pass = pass && ss.str() == first;
        }
    }
    fs::remove_all(dir);
    const auto lines = std::count(first.begin(), first.end(), '\n');
    return {pass && lines > 1, std::to_string(lines) + " CSV lines, identical for 1/2/8 threads: " +
                                   (pass ? "yes" : "no")};
}

// 10. Dicke with one excitation reproduces the W protocol.
Outcome_ dicke_w_reduction() {
    bool same_estimates = true;
    double worst = 0.0;
    Rng rng(10);
    for (int n = 3; n <= 5; ++n) {
        const auto rho = random_state_with_fidelity({WState{n}, 0.45, static_cast<std::uint64_t>(n)});
        const MeasuredState state(rho);
        const auto pw = plan(WState{n}, {0.1, 0.1});
        const auto pd = plan(Dicke{n, 1}, {0.1, 0.1});
        same_estimates = same_estimates && pw.samples == pd.samples && pw.offset == pd.offset;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            same_estimates = same_estimates && estimate(state, pw, seed).estimate == estimate(state, pd, seed).estimate;
        }
        for (int rep = 0; rep < 5; ++rep) {
            const auto m = random_density_matrix(n, rng);
            worst = std::max(worst, std::abs(enumerate::expected_estimate(m, WState{n}) -
                                             enumerate::expected_estimate(m, Dicke{n, 1})));
        }
    }
    return {same_estimates && worst <= 1e-12, std::string("estimates identical: ") +
                                                  (same_estimates ? "yes" : "no") + ", max expectation gap " +
                                                  fmt(worst) + " (tol 1e-12)"};
}

}  // namespace

int main(int argc, char **argv) {
    const std::vector<std::pair<std::string, Check>> criteria = {
        {"table of local traces", table_entries},
        {"computational-basis 3^n average", basis_identity},
        {"exact unbiasedness by enumeration", exact_unbiasedness},
        {"estimator bounds over 10^6 draws", estimator_bounds},
        {"Dicke pair counts", dicke_counts},
        {"sample-count formulas and GHZ ratio", sample_counts},
        {"Hoeffding coverage", hoeffding_coverage},
        {"MSE: shadow below baseline", mse_comparison},
        {"bench determinism across threads", bench_determinism},
        {"Dicke k=1 reduces to W", dicke_w_reduction},
    };
    std::set<int> only;
    for (int a = 1; a < argc; ++a) {
        only.insert(std::atoi(argv[a]));
    }
    int failed = 0;
    for (std::size_t c = 0; c < criteria.size(); ++c) {
        const int id = static_cast<int>(c) + 1;
        if (!only.empty() && !only.count(id)) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome_ r;
        try {
            r = criteria[c].second();
        } catch (const std::exception &e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !r.pass;
        std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << criteria[c].first << " -- "
                  << r.detail << " [" << fmt(secs) << " s]" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
