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
 * Tailored local-Pauli fidelity estimators for basis, GHZ, W and Dicke targets.
 *
 * Every protocol splits tr(rho sigma) into a diagonal part, read off all-Z shots, and an
 * off-diagonal part, estimated from X/Y settings restricted to the pattern the target's
 * off-diagonal entries can actually see. One draw picks an arm, a setting and a single
 * outcome, and returns a bounded value F-hat with E[F-hat] + offset = tr(rho sigma).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dfe/measurement.hpp"
#include "dfe/parallel.hpp"
#include "dfe/rng.hpp"
#include "dfe/snapshot.hpp"
#include "dfe/states.hpp"

namespace dfe {

struct ErrorBudget {
    double epsilon = 0.1;
    double delta = 0.1;

    void validate() const {
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
            throw Error(ErrorKind::InvalidArgument, "epsilon must be > 0");
        }
        if (!(delta > 0.0 && delta < 1.0)) {
            throw Error(ErrorKind::InvalidArgument, "delta must lie in (0, 1)");
        }
    }
};

enum class ArmKind : std::uint8_t { Diagonal, OffDiagonal };

struct Arm {
    ArmKind kind = ArmKind::Diagonal;
    /// Support overlap l of the Dicke pair drawn in an off-diagonal arm; -1 otherwise.
    int overlap = -1;

    bool operator==(const Arm &) const = default;
};

struct EstimatorSample {
    double value = 0.0;
    Arm arm;
    MeasurementSetting setting;
    Outcome outcome;
};

// ---------------------------------------------------------------------------
// Dicke pair counts.

struct DickeCoefficients {
    int n = 0;
    int k = 0;
    int l_min = 0;
    /// counts[l - l_min] = number of unordered pairs {i, j} of weight-k strings with
    /// |s(i) & s(j)| = l, for l in [l_min, k - 1]. Empty when k is 0 or n.
    std::vector<std::uint64_t> counts;
    /// 1/2 + sum of counts.
    double S = 0.5;

    int l_max() const {
        return l_min + static_cast<int>(counts.size()) - 1;
    }
    std::uint64_t c(int l) const {
        if (l < l_min || l > l_max()) {
            return 0;
        }
        return counts[static_cast<std::size_t>(l - l_min)];
    }
};

inline DickeCoefficients dicke_coefficients(int n, int k) {
    if (n < 1 || k < 0 || k > n) {
        throw Error(ErrorKind::InvalidArgument, "Dicke coefficients need 0 <= k <= n and n >= 1");
    }
    DickeCoefficients out;
    out.n = n;
    out.k = k;
    out.l_min = std::max(0, 2 * k - n);
    std::uint64_t total = 0;
    for (int l = out.l_min; l <= k - 1; ++l) {
        const std::uint64_t c = binomial(n, 2 * k - l) * binomial(2 * k - l, l) * binomial(2 * k - 2 * l - 1, k - l - 1);
        out.counts.push_back(c);
        total += c;
    }
    out.S = 0.5 + static_cast<double>(total);
    return out;
}

// ---------------------------------------------------------------------------
// Estimator values for a fixed arm, setting and outcome.

inline double ghz_diagonal_value(int n, Outcome o) {
    const std::uint64_t ones = (std::uint64_t{1} << n) - 1;
    const double hits = (o.bits == 0 ? 1.0 : 0.0) + (o.bits == ones ? 1.0 : 0.0);
    return 3.0 * hits / 2.0 - 3.0 / 4.0;
}

/// 3 (-1)^{#Y/2 + |o|} / 4 for a setting in T_GHZ (all X/Y, even number of Y).
inline double ghz_offdiagonal_value(const MeasurementSetting &s, Outcome o) {
    const int ys = s.count(LocalUnitary::HadamardSdg);
    const int exponent = ys / 2 + popcount(o.bits);
    return (exponent % 2 == 0 ? 3.0 : -3.0) / 4.0;
}

inline double w_scale(int n) {
    return static_cast<double>(n * n - n + 1);
}

inline double w_diagonal_value(int n, Outcome o) {
    const double hit = popcount(o.bits) == 1 ? 1.0 : 0.0;
    return w_scale(n) * (2.0 * hit - 1.0) / (2.0 * n);
}

/// Off-diagonal W value for the measured pair (i, j): sign from b_i == b_j, zero unless
/// every other qubit reads 0.
inline double w_offdiagonal_value(int n, int i, int j, Outcome o) {
    const std::uint64_t pair = qubit_mask(n, i) | qubit_mask(n, j);
    if ((o.bits & ~pair) != 0) {
        return 0.0;
    }
    const double same = qubit_bit(o.bits, n, i) == qubit_bit(o.bits, n, j) ? 1.0 : 0.0;
    return w_scale(n) * (2.0 * same - 1.0) / (2.0 * n);
}

/// Supports s(i), s(j) of a Dicke pair as basis-index masks.
struct DickePair {
    std::uint64_t i = 0;
    std::uint64_t j = 0;
};

inline double dicke_diagonal_value(const DickeCoefficients &dc, Outcome o) {
    const double hit = popcount(o.bits) == dc.k ? 1.0 : 0.0;
    return 2.0 * dc.S * (hit - 0.5) / static_cast<double>(binomial(dc.n, dc.k));
}

/// (-1)^x S delta(o on s(i)&s(j) = 1) delta(o outside s(i)|s(j) = 0) / C(n, k), where
/// x = #Y(s(i)^s(j))/2 + #{m in s(i)-s(j): (U_m, o_m) in {(H,1), (HS^dag,0)}}
///     + #{m in s(j)-s(i): o_m = 1}.
inline double dicke_offdiagonal_value(const DickeCoefficients &dc, DickePair p, const MeasurementSetting &s,
                                      Outcome o) {
    const int n = dc.n;
    const std::uint64_t both = p.i & p.j;
    const std::uint64_t either = p.i | p.j;
    if ((o.bits & both) != both || (o.bits & ~either) != 0) {
        return 0.0;
    }
    int ys = 0;
    int x = 0;
    for (int q = 0; q < n; ++q) {
        const std::uint64_t m = qubit_mask(n, q);
        const bool in_i = (p.i & m) != 0;
        const bool in_j = (p.j & m) != 0;
        if (in_i == in_j) {
            continue;
        }
        const bool bit = (o.bits & m) != 0;
        const LocalUnitary u = s[q];
        if (u == LocalUnitary::HadamardSdg) {
            ++ys;
        }
        if (in_i) {
            if ((u == LocalUnitary::Hadamard && bit) || (u == LocalUnitary::HadamardSdg && !bit)) {
                ++x;
            }
        } else if (bit) {
            ++x;
        }
    }
    x += ys / 2;
    const double mag = dc.S / static_cast<double>(binomial(n, dc.k));
    return x % 2 == 0 ? mag : -mag;
}

// ---------------------------------------------------------------------------
// Setting construction.

/// The unitary among {H, HS^dagger} that makes the HS^dagger count of `units` plus itself even.
inline LocalUnitary parity_completion(std::span<const LocalUnitary> units) {
    const auto ys = std::count(units.begin(), units.end(), LocalUnitary::HadamardSdg);
    return ys % 2 == 0 ? LocalUnitary::Hadamard : LocalUnitary::HadamardSdg;
}

inline LocalUnitary random_xy(Rng &rng) {
    return rng.below(2) == 0 ? LocalUnitary::Hadamard : LocalUnitary::HadamardSdg;
}

/// Uniform m-subset of [0, n) in ascending order (partial Fisher-Yates; m draws).
inline std::vector<int> sample_subset(int n, int m, Rng &rng) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int t = 0; t < m; ++t) {
        const auto pick = t + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - t)));
        std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(pick)]);
    }
    pool.resize(static_cast<std::size_t>(m));
    std::sort(pool.begin(), pool.end());
    return pool;
}

/// Uniform draw from f_l: an unordered pair of weight-k strings whose supports overlap in l
/// positions. The union (2k - l qubits), then the overlap inside it, then the split of the
/// rest are drawn uniformly; the smallest non-overlap qubit always joins s(i), so each
/// unordered pair has exactly one representation.
inline DickePair sample_dicke_pair(int n, int k, int l, Rng &rng) {
    const std::vector<int> uni = sample_subset(n, 2 * k - l, rng);
    const std::vector<int> overlap_pos = sample_subset(2 * k - l, l, rng);
    std::vector<bool> in_overlap(uni.size(), false);
    for (int p : overlap_pos) {
        in_overlap[static_cast<std::size_t>(p)] = true;
    }
    DickePair pair;
    std::vector<int> rest;
    for (std::size_t t = 0; t < uni.size(); ++t) {
        if (in_overlap[t]) {
            pair.i |= qubit_mask(n, uni[t]);
            pair.j |= qubit_mask(n, uni[t]);
        } else {
            rest.push_back(uni[t]);
        }
    }
    const int half = k - l;
    pair.i |= qubit_mask(n, rest[0]);
    const std::vector<int> extra = sample_subset(2 * half - 1, half - 1, rng);
    std::vector<bool> to_i(rest.size(), false);
    to_i[0] = true;
    for (int e : extra) {
        to_i[static_cast<std::size_t>(e) + 1] = true;
    }
    for (std::size_t t = 1; t < rest.size(); ++t) {
        (to_i[t] ? pair.i : pair.j) |= qubit_mask(n, rest[t]);
    }
    return pair;
}

/// Z outside s(i)^s(j); the given X/Y choices on the symmetric difference except its
/// largest qubit, which is completed to an even HS^dagger count.
inline MeasurementSetting dicke_pair_setting(int n, DickePair p, std::span<const LocalUnitary> free_units) {
    auto s = MeasurementSetting::all_z(n);
    const std::uint64_t diff = p.i ^ p.j;
    std::vector<int> qs;
    for (int q = 0; q < n; ++q) {
        if (diff & qubit_mask(n, q)) {
            qs.push_back(q);
        }
    }
    if (qs.empty() || free_units.size() + 1 != qs.size()) {
        throw Error(ErrorKind::InvalidArgument, "free unit count must be |s(i)^s(j)| - 1");
    }
    for (std::size_t t = 0; t + 1 < qs.size(); ++t) {
        s[qs[t]] = free_units[t];
    }
    s[qs.back()] = parity_completion(free_units);
    return s;
}

// ---------------------------------------------------------------------------
// Single draws.

inline double estimator_bound(const TargetState &t, const DickeCoefficients *dc = nullptr) {
    const int n = qubits(t);
    if (std::holds_alternative<Ghz>(t)) {
        return 0.75;
    }
    if (std::holds_alternative<WState>(t)) {
        return w_scale(n) / (2.0 * n);
    }
    if (auto d = std::get_if<Dicke>(&t)) {
        const double S = dc ? dc->S : dicke_coefficients(d->n, d->k).S;
        return S / static_cast<double>(binomial(d->n, d->k));
    }
    return 1.0;
}

inline EstimatorSample basis_sample(const MeasuredState &state, std::uint64_t b, Rng &rng) {
    auto s = MeasurementSetting::all_z(state.qubits());
    const Outcome o = state.measure(s, rng);
    return {basis_dfe_estimator(b, o), Arm{}, std::move(s), o};
}

inline EstimatorSample ghz_sample(const MeasuredState &state, Rng &rng) {
    const int n = state.qubits();
    if (n < 2) {
        throw Error(ErrorKind::InvalidArgument, "the GHZ protocol needs n >= 2");
    }
    if (1.0 / 3.0 > rng.uniform()) {
        auto s = MeasurementSetting::all_z(n);
        const Outcome o = state.measure(s, rng);
        return {ghz_diagonal_value(n, o), Arm{}, std::move(s), o};
    }
    std::vector<LocalUnitary> units(static_cast<std::size_t>(n));
    for (int q = 0; q + 1 < n; ++q) {
        units[static_cast<std::size_t>(q)] = random_xy(rng);
    }
    units.back() = parity_completion(std::span<const LocalUnitary>(units.data(), units.size() - 1));
    MeasurementSetting s(std::move(units));
    const Outcome o = state.measure(s, rng);
    return {ghz_offdiagonal_value(s, o), Arm{ArmKind::OffDiagonal}, std::move(s), o};
}

inline MeasurementSetting w_pair_setting(int n, int i, int j, LocalUnitary u) {
    auto s = MeasurementSetting::all_z(n);
    s[i] = u;
    s[j] = u;
    return s;
}

inline EstimatorSample w_sample(const MeasuredState &state, Rng &rng) {
    const int n = state.qubits();
    if (n < 2) {
        throw Error(ErrorKind::InvalidArgument, "the W protocol needs n >= 2");
    }
    if (1.0 / w_scale(n) > rng.uniform()) {
        auto s = MeasurementSetting::all_z(n);
        const Outcome o = state.measure(s, rng);
        return {w_diagonal_value(n, o), Arm{}, std::move(s), o};
    }
    const auto pair = sample_subset(n, 2, rng);
    const LocalUnitary u = random_xy(rng);
    auto s = w_pair_setting(n, pair[0], pair[1], u);
    const Outcome o = state.measure(s, rng);
    return {w_offdiagonal_value(n, pair[0], pair[1], o), Arm{ArmKind::OffDiagonal, 0}, std::move(s), o};
}

inline EstimatorSample dicke_sample(const MeasuredState &state, const DickeCoefficients &dc, Rng &rng) {
    const int n = dc.n;
    if (state.qubits() != n) {
        throw Error(ErrorKind::DimensionMismatch, "state and Dicke coefficients disagree on n");
    }
    const double x = rng.uniform();
    double acc = 1.0 / (2.0 * dc.S);
    if (dc.counts.empty() || acc > x) {
        auto s = MeasurementSetting::all_z(n);
        const Outcome o = state.measure(s, rng);
        return {dicke_diagonal_value(dc, o), Arm{}, std::move(s), o};
    }
    int l = dc.l_max();
    for (int cand = dc.l_min; cand <= dc.l_max(); ++cand) {
        acc += static_cast<double>(dc.c(cand)) / dc.S;
        if (acc > x) {
            l = cand;
            break;
        }
    }
    const DickePair pair = sample_dicke_pair(n, dc.k, l, rng);
    const int free_count = 2 * (dc.k - l) - 1;
    std::vector<LocalUnitary> free_units(static_cast<std::size_t>(free_count));
    for (auto &u : free_units) {
        u = random_xy(rng);
    }
    auto s = dicke_pair_setting(n, pair, free_units);
    const Outcome o = state.measure(s, rng);
    return {dicke_offdiagonal_value(dc, pair, s, o), Arm{ArmKind::OffDiagonal, l}, std::move(s), o};
}

// ---------------------------------------------------------------------------
// Plans and the estimation loop.

/// Which sample-count formula plan() uses where the derivation and the algorithm listing
/// differ (GHZ and W only).
enum class CountRule { Derived, Listing };

struct PlannedArm {
    double probability;
    Arm arm;
};

struct ProtocolPlan {
    TargetState target;
    ErrorBudget budget;
    std::uint64_t samples = 1;
    /// The sample-count formula before rounding up.
    double raw_samples = 1.0;
    std::vector<PlannedArm> arms;
    double offset = 0.0;
    /// Almost-sure bound on |F-hat|.
    double bound = 1.0;
    std::optional<DickeCoefficients> dicke;
};

inline ProtocolPlan plan(const TargetState &target, ErrorBudget budget, CountRule rule = CountRule::Derived) {
    budget.validate();
    validate_target(target);
    const int n = qubits(target);
    const double log_term = std::log(2.0 / budget.delta);
    const double eps2 = budget.epsilon * budget.epsilon;
    ProtocolPlan p;
    p.target = target;
    p.budget = budget;
    if (std::holds_alternative<Ghz>(target)) {
        if (n < 2) {
            throw Error(ErrorKind::InvalidArgument, "the GHZ protocol needs n >= 2");
        }
        p.arms = {{1.0 / 3.0, Arm{}}, {2.0 / 3.0, Arm{ArmKind::OffDiagonal}}};
        p.offset = 0.25;
        p.bound = 0.75;
        p.raw_samples = rule == CountRule::Derived ? 9.0 * log_term / (8.0 * eps2) : 2.0 * log_term / eps2;
    } else if (std::holds_alternative<WState>(target)) {
        if (n < 2) {
            throw Error(ErrorKind::InvalidArgument, "the W protocol needs n >= 2");
        }
        const double a = w_scale(n);
        p.arms = {{1.0 / a, Arm{}}, {static_cast<double>(n * (n - 1)) / a, Arm{ArmKind::OffDiagonal, 0}}};
        p.offset = 1.0 / (2.0 * n);
        p.bound = a / (2.0 * n);
        const double nn = static_cast<double>(n);
        p.raw_samples = rule == CountRule::Derived ? log_term * a * a / (2.0 * eps2 * nn * nn)
                                                   : 2.0 * log_term * (nn - 1) * (nn - 1) / eps2;
    } else if (auto d = std::get_if<Dicke>(&target)) {
        auto dc = dicke_coefficients(d->n, d->k);
        const double choose = static_cast<double>(binomial(d->n, d->k));
        p.arms.push_back({1.0 / (2.0 * dc.S), Arm{}});
        for (int l = dc.l_min; l <= dc.l_max(); ++l) {
            p.arms.push_back({static_cast<double>(dc.c(l)) / dc.S, Arm{ArmKind::OffDiagonal, l}});
        }
        if (dc.counts.empty()) {
            p.arms = {{1.0, Arm{}}};
        }
        p.offset = 0.5 / choose;
        p.bound = dc.S / choose;
        p.raw_samples = 2.0 * log_term * dc.S * dc.S / (eps2 * choose * choose);
        p.dicke = std::move(dc);
    } else {
        p.arms = {{1.0, Arm{}}};
        p.offset = 0.0;
        p.bound = 1.0;
        p.raw_samples = log_term / (2.0 * eps2);
    }
    p.samples = std::max<std::uint64_t>(static_cast<std::uint64_t>(std::ceil(p.raw_samples)), 1);
    return p;
}

/// One draw of F-hat for the plan's target. Throws if the value breaks the plan's bound.
inline EstimatorSample draw_sample(const MeasuredState &state, const ProtocolPlan &p, Rng &rng) {
    EstimatorSample s;
    if (std::holds_alternative<Ghz>(p.target)) {
        s = ghz_sample(state, rng);
    } else if (std::holds_alternative<WState>(p.target)) {
        s = w_sample(state, rng);
    } else if (std::holds_alternative<Dicke>(p.target)) {
        s = dicke_sample(state, *p.dicke, rng);
    } else {
        s = basis_sample(state, std::get<BasisState>(p.target).bits, rng);
    }
    if (!(std::abs(s.value) <= p.bound * (1.0 + 1e-12))) {
        throw Error(ErrorKind::Overflow, "estimator sample " + std::to_string(s.value) + " exceeds bound " +
                                             std::to_string(p.bound));
    }
    return s;
}

struct EstimateOptions {
    /// Overrides the plan's sample count when set.
    std::optional<std::uint64_t> samples;
    /// Worker threads; 0 means all cores.
    unsigned threads = 0;
};

struct EstimateResult {
    /// Mean of the samples plus the plan offset.
    double estimate = 0.0;
    /// estimate clamped into [0, 1].
    double clamped = 0.0;
    std::uint64_t samples_used = 0;
};

/// Samples are processed in fixed blocks; block b draws from Rng(derive_seed(seed, {b})) and
/// block sums are combined in block order, so the result does not depend on thread count.
inline constexpr std::uint64_t kSampleBlock = 1024;

inline EstimateResult estimate(const MeasuredState &state, const ProtocolPlan &p, std::uint64_t seed,
                               const EstimateOptions &opts = {}) {
    if (state.qubits() != qubits(p.target)) {
        throw Error(ErrorKind::DimensionMismatch, "state has " + std::to_string(state.qubits()) +
                                                      " qubits but the plan targets " + std::to_string(qubits(p.target)));
    }
    const std::uint64_t total = opts.samples.value_or(p.samples);
    if (total == 0) {
        throw Error(ErrorKind::InvalidArgument, "sample count must be >= 1");
    }
    const std::uint64_t blocks = (total + kSampleBlock - 1) / kSampleBlock;
    std::vector<CompensatedSum> partial(blocks);
    parallel_for(blocks, opts.threads, [&](std::size_t b) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
        const std::uint64_t begin = b * kSampleBlock;
        const std::uint64_t end = std::min(total, begin + kSampleBlock);
        CompensatedSum acc;
        for (std::uint64_t i = begin; i < end; ++i) {
            acc.add(draw_sample(state, p, rng).value);
        }
        partial[b] = acc;
    });
    CompensatedSum sum;
    for (const auto &b : partial) {
        sum.add(b);
    }
    EstimateResult r;
    r.estimate = sum.value() / static_cast<double>(total) + p.offset;
    r.clamped = std::clamp(r.estimate, 0.0, 1.0);
    r.samples_used = total;
    return r;
}

}  // namespace dfe
