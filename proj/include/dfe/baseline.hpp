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
 * Reference estimators the tailored protocols are compared against:
 *
 *  - two-stage importance-sampling DFE: draw Pauli labels
 *    k with probability chi_sigma(k)^2, then estimate chi_rho(k) from m_k single shots;
 *  - the vanilla classical-shadow estimator tr(rho-hat sigma) with uniform {X, Y, Z}^n
 *    settings.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "dfe/measurement.hpp"
#include "dfe/parallel.hpp"
#include "dfe/shadow_dfe.hpp"
#include "dfe/snapshot.hpp"
#include "dfe/states.hpp"

namespace dfe {

/// n-qubit Pauli string in symplectic form: qubit q carries X if its bit is set in `x`,
/// Z if set in `z`, Y if set in both (bits follow the basis-index convention).
struct PauliString {
    int n = 0;
    std::uint64_t x = 0;
    std::uint64_t z = 0;

    char letter(int q) const {
        const std::uint64_t m = qubit_mask(n, q);
        const bool hx = (x & m) != 0;
        const bool hz = (z & m) != 0;
        return hx ? (hz ? 'Y' : 'X') : (hz ? 'Z' : 'I');
    }
    std::string letters() const {
        std::string s;
        for (int q = 0; q < n; ++q) {
            s.push_back(letter(q));
        }
        return s;
    }
    static PauliString from_letters(const std::string &s) {
        PauliString p;
        p.n = static_cast<int>(s.size());
        for (int q = 0; q < p.n; ++q) {
            const std::uint64_t m = qubit_mask(p.n, q);
            switch (s[static_cast<std::size_t>(q)]) {
                case 'I':
                    break;
                case 'X':
                    p.x |= m;
                    break;
                case 'Y':
                    p.x |= m;
                    p.z |= m;
                    break;
                case 'Z':
                    p.z |= m;
                    break;
                default:
                    throw Error(ErrorKind::InvalidArgument, "Pauli letters must be I, X, Y or Z");
            }
        }
        return p;
    }
    bool is_identity() const {
        return x == 0 && z == 0;
    }
    std::uint64_t support() const {
        return x | z;
    }
    bool operator==(const PauliString &) const = default;
};

/// tr(M W) using W|a> = i^{#Y} (-1)^{|a & z|} |a ^ x>.
inline Complex pauli_trace(const Matrix &m, const PauliString &p) {
    const std::uint64_t dim = std::uint64_t{1} << p.n;
    CompensatedSum re, im;
    for (std::uint64_t a = 0; a < dim; ++a) {
        Complex v = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a ^ p.x));
        if (popcount(a & p.z) % 2 != 0) {
            v = -v;
        }
        re.add(v.real());
        im.add(v.imag());
    }
    Complex t(re.value(), im.value());
    switch (popcount(p.x & p.z) % 4) {
        case 1:
            t *= Complex(0.0, 1.0);
            break;
        case 2:
            t = -t;
            break;
        case 3:
            t *= Complex(0.0, -1.0);
            break;
        default:
            break;
    }
    return t;
}

/// Local readout for a Pauli label: X via H, Y via HS^dagger, Z and I in the Z basis.
inline MeasurementSetting pauli_setting(const PauliString &p) {
    auto s = MeasurementSetting::all_z(p.n);
    for (int q = 0; q < p.n; ++q) {
        const char c = p.letter(q);
        if (c == 'X') {
            s[q] = LocalUnitary::Hadamard;
        } else if (c == 'Y') {
            s[q] = LocalUnitary::HadamardSdg;
        }
    }
    return s;
}

/// +-1 eigenvalue of W read from one shot taken in pauli_setting(p).
inline int pauli_eigenvalue(const PauliString &p, Outcome o) {
    return popcount(o.bits & p.support()) % 2 == 0 ? 1 : -1;
}

/// Nonzero characteristic-function values chi_sigma(k) = tr(sigma W_k) / sqrt(d).
class CharacteristicTable {
   public:
    struct Entry {
        PauliString label;
        double chi;
    };

    CharacteristicTable(int n, std::vector<Entry> entries) : n_(n), entries_(std::move(entries)) {
        if (entries_.empty()) {
            throw Error(ErrorKind::InvalidArgument, "characteristic table has no support");
        }
        cdf_.resize(entries_.size());
        CompensatedSum acc;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            acc.add(entries_[i].chi * entries_[i].chi);
            cdf_[i] = acc.value();
        }
        total_ = acc.value();
        cdf_.back() = total_;
    }

    int qubits() const noexcept {
        return n_;
    }
    const std::vector<Entry> &entries() const noexcept {
        return entries_;
    }
    /// Sum of chi^2; 1 for a pure target.
    double total_weight() const noexcept {
        return total_;
    }

    /// Index drawn with probability chi^2 / total_weight().
    std::size_t sample(Rng &rng) const {
        const double u = rng.uniform() * total_;
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) {
            --it;
        }
        return static_cast<std::size_t>(it - cdf_.begin());
    }

   private:
    int n_;
    std::vector<Entry> entries_;
    std::vector<double> cdf_;
    double total_ = 0.0;
};

inline constexpr double kChiThreshold = 1e-12;

/// Scans all 4^n Pauli strings against the dense target density.
inline CharacteristicTable characteristic_table(const TargetState &t) {
    const DensityMatrix sigma = target_density(t);
    const int n = sigma.qubits();
    const std::uint64_t dim = sigma.dim();
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));
    std::vector<CharacteristicTable::Entry> entries;
    for (std::uint64_t x = 0; x < dim; ++x) {
        for (std::uint64_t z = 0; z < dim; ++z) {
            const PauliString p{n, x, z};
            const double chi = pauli_trace(sigma.matrix(), p).real() * inv_sqrt_d;
            if (std::abs(chi) > kChiThreshold) {
                entries.push_back({p, chi});
            }
        }
    }
    return CharacteristicTable(n, std::move(entries));
}

/// Importance-sampling parameters. `epsilon` and `delta` are the values the two-stage
/// analysis is run at; baseline_config() halves the user's budget so the end-to-end
/// guarantee is (epsilon, delta).
struct BaselineConfig {
    std::uint64_t labels = 1;
    double alpha = 1.0;
    double epsilon = 0.05;
    double delta = 0.05;
    std::uint64_t max_repetitions = 10'000'000;
};

/// Label counts and variance parameter: (2 log(2/delta)/eps^2, 1) for stabilizer-like
/// targets (GHZ, basis), (1/(eps^2 delta), C(n,k)^2) for W and Dicke, at (eps/2, delta/2).
inline BaselineConfig baseline_config(const TargetState &t, ErrorBudget budget) {
    budget.validate();
    validate_target(t);
    BaselineConfig cfg;
    cfg.epsilon = budget.epsilon / 2.0;
    cfg.delta = budget.delta / 2.0;
    const double eps2 = cfg.epsilon * cfg.epsilon;
    if (std::holds_alternative<Ghz>(t) || std::holds_alternative<BasisState>(t)) {
        cfg.labels = static_cast<std::uint64_t>(std::ceil(2.0 * std::log(2.0 / cfg.delta) / eps2));
        cfg.alpha = 1.0;
    } else {
        const double choose = static_cast<double>(binomial(qubits(t), excitations(t)));
        cfg.labels = static_cast<std::uint64_t>(std::ceil(1.0 / (eps2 * cfg.delta)));
        cfg.alpha = choose * choose;
    }
    return cfg;
}

/// Upper bound on total single-shot measurements: l + 1 + 2 log(2/delta) alpha / eps^2.
inline double baseline_measurement_bound(const BaselineConfig &cfg) {
    return static_cast<double>(cfg.labels) + 1.0 +
           2.0 * std::log(2.0 / cfg.delta) * cfg.alpha / (cfg.epsilon * cfg.epsilon);
}

/// Leading-order total measurements with the (eps/2, delta/2) substitution folded in:
/// 16 log(4/delta)/eps^2 for GHZ and basis targets, 8 log(4/delta) C(n,k)^2/eps^2 otherwise.
inline double baseline_approx_measurements(const TargetState &t, ErrorBudget budget) {
    budget.validate();
    const double log_term = std::log(4.0 / budget.delta);
    const double eps2 = budget.epsilon * budget.epsilon;
    if (std::holds_alternative<Ghz>(t) || std::holds_alternative<BasisState>(t)) {
        return 16.0 * log_term / eps2;
    }
    const double choose = static_cast<double>(binomial(qubits(t), excitations(t)));
    return 8.0 * log_term * choose * choose / eps2;
}

/// m = ceil(2 log(2/delta) / (d chi^2 l eps^2)) shots for a label with coefficient chi.
inline std::uint64_t baseline_repetitions(const BaselineConfig &cfg, double chi, int n) {
    const double d = std::ldexp(1.0, n);
    const double m = std::ceil(2.0 * std::log(2.0 / cfg.delta) /
                               (d * chi * chi * static_cast<double>(cfg.labels) * cfg.epsilon * cfg.epsilon));
    if (!(m <= static_cast<double>(cfg.max_repetitions))) {
        throw Error(ErrorKind::Overflow, "label needs " + std::to_string(m) + " repetitions, above the cap of " +
                                             std::to_string(cfg.max_repetitions));
    }
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(m));
}

struct BaselineResult {
    double estimate = 0.0;
    std::uint64_t measurements_used = 0;
    std::uint64_t labels = 0;
};

inline constexpr std::uint64_t kLabelBlock = 256;

/// Two-stage estimate Y = (1/l) sum_i chi-tilde_rho(k_i) / chi_sigma(k_i), where
/// chi-tilde_rho(k) = (sum of m shot eigenvalues) / (m sqrt(d)). Identity labels need no
/// readout but their m shots are still counted.
inline BaselineResult baseline_estimate(const MeasuredState &state, const CharacteristicTable &table,
                                        const BaselineConfig &cfg, std::uint64_t seed, unsigned threads = 0) {
    const int n = state.qubits();
    if (table.qubits() != n) {
        throw Error(ErrorKind::DimensionMismatch, "state and characteristic table disagree on n");
    }
    if (cfg.labels == 0) {
        throw Error(ErrorKind::InvalidArgument, "label count must be >= 1");
    }
    const double sqrt_d = std::sqrt(std::ldexp(1.0, n));
    const std::uint64_t blocks = (cfg.labels + kLabelBlock - 1) / kLabelBlock;
    std::vector<CompensatedSum> sums(blocks);
    std::vector<std::uint64_t> shots(blocks, 0);
    parallel_for(blocks, threads, [&](std::size_t b) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
        const std::uint64_t begin = b * kLabelBlock;
        const std::uint64_t end = std::min(cfg.labels, begin + kLabelBlock);
        CompensatedSum acc;
        std::uint64_t used = 0;
        for (std::uint64_t i = begin; i < end; ++i) {
            const auto &entry = table.entries()[table.sample(rng)];
            const std::uint64_t m = baseline_repetitions(cfg, entry.chi, n);
            std::int64_t eig_sum = 0;
            if (entry.label.is_identity()) {
                eig_sum = static_cast<std::int64_t>(m);
            } else {
                const auto dist = state.distribution(pauli_setting(entry.label));
                for (std::uint64_t j = 0; j < m; ++j) {
                    eig_sum += pauli_eigenvalue(entry.label, dist->sample(rng));
                }
            }
            used += m;
            const double chi_rho = static_cast<double>(eig_sum) / (static_cast<double>(m) * sqrt_d);
            acc.add(chi_rho / entry.chi);
        }
        sums[b] = acc;
        shots[b] = used;
    });
    CompensatedSum total;
    BaselineResult r;
    for (std::size_t b = 0; b < blocks; ++b) {
        total.add(sums[b]);
        r.measurements_used += shots[b];
    }
    r.estimate = total.value() / static_cast<double>(cfg.labels);
    r.labels = cfg.labels;
    return r;
}

inline BaselineResult baseline_estimate(const MeasuredState &state, const TargetState &t, const BaselineConfig &cfg,
                                        std::uint64_t seed, unsigned threads = 0) {
    return baseline_estimate(state, characteristic_table(t), cfg, seed, threads);
}

// ---------------------------------------------------------------------------
// Vanilla classical shadows.

/// tr(rho-hat sigma) for one snapshot; sigma is uniform with weight 1/|S| on S x S.
inline double vanilla_sample_value(const std::vector<std::uint64_t> &support, const MeasurementSetting &s, Outcome o) {
    CompensatedSum acc;
    for (std::size_t a = 0; a < support.size(); ++a) {
        acc.add(snapshot_matrix_element(support[a], support[a], s, o).real());
        for (std::size_t b = a + 1; b < support.size(); ++b) {
            acc.add(2.0 * snapshot_matrix_element(support[a], support[b], s, o).real());
        }
    }
    return acc.value() / static_cast<double>(support.size());
}

inline MeasurementSetting random_pauli_setting(int n, Rng &rng) {
    auto s = MeasurementSetting::all_z(n);
    for (int q = 0; q < n; ++q) {
        s[q] = kAllLocalUnitaries[rng.below(3)];
    }
    return s;
}

struct VanillaResult {
    double estimate = 0.0;
    std::uint64_t measurements_used = 0;
};

inline VanillaResult vanilla_shadow_estimate(const MeasuredState &state, const TargetState &t, std::uint64_t samples,
                                             std::uint64_t seed, unsigned threads = 0) {
    const int n = state.qubits();
    if (qubits(t) != n) {
        throw Error(ErrorKind::DimensionMismatch, "state and target disagree on n");
    }
    if (samples == 0) {
        throw Error(ErrorKind::InvalidArgument, "sample count must be >= 1");
    }
    const auto support = target_support(t);
    const std::uint64_t blocks = (samples + kSampleBlock - 1) / kSampleBlock;
    std::vector<CompensatedSum> sums(blocks);
    parallel_for(blocks, threads, [&](std::size_t b) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
        const std::uint64_t begin = b * kSampleBlock;
        const std::uint64_t end = std::min(samples, begin + kSampleBlock);
        CompensatedSum acc;
        for (std::uint64_t i = begin; i < end; ++i) {
            const auto s = random_pauli_setting(n, rng);
            const Outcome o = state.measure(s, rng);
            acc.add(vanilla_sample_value(support, s, o));
        }
        sums[b] = acc;
    });
    CompensatedSum total;
    for (const auto &s : sums) {
        total.add(s);
    }
    return {total.value() / static_cast<double>(samples), samples};
}

}  // namespace dfe
