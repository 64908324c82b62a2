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

#pragma once

#include <algorithm>
#include <atomic>
#include <compare>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dfe/linalg.hpp"
#include "dfe/rng.hpp"

namespace dfe {

/// Per-qubit basis choice U = U_0 (x) U_1 (x) ... (x) U_{n-1}.
class MeasurementSetting {
   public:
    MeasurementSetting() = default;
    explicit MeasurementSetting(std::vector<LocalUnitary> units) : units_(std::move(units)) {
    }

    static MeasurementSetting all_z(int n) {
        return MeasurementSetting(std::vector<LocalUnitary>(static_cast<std::size_t>(n), LocalUnitary::Identity));
    }

    /// Parses a string over {X, Y, Z}, e.g. "XZY".
    static MeasurementSetting from_letters(const std::string &letters) {
        std::vector<LocalUnitary> units;
        for (char c : letters) {
            switch (c) {
                case 'X':
                    units.push_back(LocalUnitary::Hadamard);
                    break;
                case 'Y':
                    units.push_back(LocalUnitary::HadamardSdg);
                    break;
                case 'Z':
                    units.push_back(LocalUnitary::Identity);
                    break;
                default:
                    throw Error(ErrorKind::InvalidArgument, std::string("bad basis letter '") + c + "'");
            }
        }
        return MeasurementSetting(std::move(units));
    }

    int size() const noexcept {
        return static_cast<int>(units_.size());
    }
    LocalUnitary operator[](int q) const {
        return units_[static_cast<std::size_t>(q)];
    }
    LocalUnitary &operator[](int q) {
        return units_[static_cast<std::size_t>(q)];
    }
    const std::vector<LocalUnitary> &units() const noexcept {
        return units_;
    }

    int count(LocalUnitary u) const {
        return static_cast<int>(std::count(units_.begin(), units_.end(), u));
    }

    std::string letters() const {
        std::string s;
        for (auto u : units_) {
            s.push_back(basis_letter(u));
        }
        return s;
    }

    auto operator<=>(const MeasurementSetting &) const = default;
    bool operator==(const MeasurementSetting &) const = default;

   private:
    std::vector<LocalUnitary> units_;
};

struct MeasurementSettingHash {
    std::size_t operator()(const MeasurementSetting &s) const noexcept {
        std::uint64_t h = 0x84222325CBF29CE4ULL ^ static_cast<std::uint64_t>(s.size());
        for (auto u : s.units()) {
            h = splitmix64(h ^ static_cast<std::uint64_t>(u));
        }
        return static_cast<std::size_t>(h);
    }
};

/// Measurement result b-hat, stored as a basis index.
struct Outcome {
    std::uint64_t bits = 0;
    auto operator<=>(const Outcome &) const = default;
};

inline constexpr double kProbabilitySumTol = 1e-9;

/// Computational-basis outcome probabilities with a cumulative table for sampling.
class OutcomeDistribution {
   public:
    /// Clamps small negative entries to 0 and renormalizes. Entries below -1e-9 or a sum
    /// further than 1e-9 from one are rejected.
    explicit OutcomeDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
        CompensatedSum total;
        for (double &p : probs_) {
            if (!(p >= -kProbabilitySumTol)) {
                throw Error(ErrorKind::NotPSD, "outcome probability " + std::to_string(p) + " is negative");
            }
            p = std::max(p, 0.0);
            total.add(p);
        }
        const double sum = total.value();
        if (std::abs(sum - 1.0) > kProbabilitySumTol) {
            throw Error(ErrorKind::TraceNotOne, "outcome probabilities sum to " + std::to_string(sum));
        }
        cdf_.resize(probs_.size());
        CompensatedSum running;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            probs_[i] /= sum;
            running.add(probs_[i]);
            cdf_[i] = running.value();
        }
        // Top the table off at exactly 1 from the last nonzero entry onward.
        for (std::size_t i = probs_.size(); i-- > 0;) {
            cdf_[i] = 1.0;
            if (probs_[i] > 0.0) {
                break;
            }
        }
    }

    const std::vector<double> &probs() const noexcept {
        return probs_;
    }
    double operator[](std::uint64_t outcome) const {
        return probs_[outcome];
    }
    std::size_t size() const noexcept {
        return probs_.size();
    }

    /// Inverse-CDF draw using one uniform variate.
    Outcome sample(Rng &rng) const {
        const double u = rng.uniform();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) {
            --it;
        }
        return Outcome{static_cast<std::uint64_t>(it - cdf_.begin())};
    }

   private:
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

/// diag(U rho U^dagger) by contracting one qubit at a time.
///
/// The working tensor is indexed [outcome bits of processed qubits][row bits][col bits] of
/// the unprocessed ones. Contracting the leading qubit fixes its row and column to the
/// same outcome bit, halving the tensor, so the total cost is O(4^n) rather than O(8^n).
inline OutcomeDistribution outcome_distribution(const DensityMatrix &rho, const MeasurementSetting &s) {
    const int n = rho.qubits();
    if (s.size() != n) {
        throw Error(ErrorKind::DimensionMismatch, "setting has " + std::to_string(s.size()) +
                                                      " qubits but state has " + std::to_string(n));
    }
    const std::uint64_t dim = rho.dim();
    std::vector<Complex> work(dim * dim);
    const Matrix &m = rho.matrix();
    for (std::uint64_t r = 0; r < dim; ++r) {
        for (std::uint64_t c = 0; c < dim; ++c) {
            work[r * dim + c] = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
    }
    std::vector<Complex> next;
    for (int q = 0; q < n; ++q) {
        const int rem = n - q;  // unprocessed qubits, including q
        const std::uint64_t side = std::uint64_t{1} << rem;
        const std::uint64_t half = side >> 1;
        const std::uint64_t outer = std::uint64_t{1} << q;
        const Matrix2 &u = unitary_matrix(s[q]);
        next.assign(outer * 2 * half * half, Complex(0.0, 0.0));
        for (std::uint64_t o = 0; o < outer; ++o) {
            const Complex *src = work.data() + o * side * side;
            for (int ob = 0; ob < 2; ++ob) {
                Complex *dst = next.data() + ((o << 1) | static_cast<std::uint64_t>(ob)) * half * half;
                for (int rb = 0; rb < 2; ++rb) {
                    const Complex ur = u(ob, rb);
                    if (ur == Complex(0.0, 0.0)) {
                        continue;
                    }
                    for (int cb = 0; cb < 2; ++cb) {
                        const Complex uc = std::conj(u(ob, cb));
                        if (uc == Complex(0.0, 0.0)) {
                            continue;
                        }
                        const Complex w = ur * uc;
                        for (std::uint64_t r = 0; r < half; ++r) {
                            const Complex *row = src + (static_cast<std::uint64_t>(rb) * half + r) * side +
                                                 static_cast<std::uint64_t>(cb) * half;
                            Complex *out = dst + r * half;
                            for (std::uint64_t c = 0; c < half; ++c) {
                                out[c] += w * row[c];
                            }
                        }
                    }
                }
            }
        }
        work.swap(next);
    }
    std::vector<double> probs(dim);
    for (std::uint64_t b = 0; b < dim; ++b) {
        probs[b] = work[b].real();
    }
    return OutcomeDistribution(std::move(probs));
}

inline Outcome sample_outcome(const OutcomeDistribution &dist, Rng &rng) {
    return dist.sample(rng);
}

/// Thread-safe LRU memo of outcome distributions for one fixed state.
class SettingCache {
   public:
    static constexpr std::size_t kDefaultCapacity = 4096;

    explicit SettingCache(std::size_t capacity = kDefaultCapacity) : capacity_(std::max<std::size_t>(capacity, 1)) {
    }

    using Value = std::shared_ptr<const OutcomeDistribution>;

    /// Returns the cached distribution or computes it with `compute`. The computation
    /// runs outside the lock; if two threads race, the first inserted object wins and
    /// both receive it.
    template <typename Compute>
    Value get_or_compute(const MeasurementSetting &key, Compute &&compute) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (auto hit = lookup_locked(key)) {
                return hit;
            }
        }
        auto fresh = std::make_shared<const OutcomeDistribution>(compute());
        computations_.fetch_add(1, std::memory_order_relaxed);
        std::lock_guard<std::mutex> lock(mu_);
        if (auto hit = lookup_locked(key)) {
            return hit;
        }
        lru_.emplace_front(key, fresh);
        index_.emplace(key, lru_.begin());
        while (lru_.size() > capacity_) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
        return fresh;
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lock(mu_);
        return lru_.size();
    }
    std::size_t capacity() const noexcept {
        return capacity_;
    }
    /// Number of distributions computed so far (cache misses).
    std::size_t computations() const noexcept {
        return computations_.load(std::memory_order_relaxed);
    }

   private:
    Value lookup_locked(const MeasurementSetting &key) {
        auto it = index_.find(key);
        if (it == index_.end()) {
            return nullptr;
        }
        lru_.splice(lru_.begin(), lru_, it->second);
        return it->second->second;
    }

    using Entry = std::pair<MeasurementSetting, Value>;
    std::size_t capacity_;
    mutable std::mutex mu_;
    std::list<Entry> lru_;
    std::unordered_map<MeasurementSetting, std::list<Entry>::iterator, MeasurementSettingHash> index_;
    std::atomic<std::size_t> computations_{0};
};

/// The unknown state as seen by the protocols: a density matrix plus its setting cache.
/// Copies share the same cache.
class MeasuredState {
   public:
    explicit MeasuredState(DensityMatrix rho, std::size_t cache_capacity = SettingCache::kDefaultCapacity)
        : rho_(std::make_shared<const DensityMatrix>(std::move(rho))),
          cache_(std::make_shared<SettingCache>(cache_capacity)) {
    }

    int qubits() const noexcept {
        return rho_->qubits();
    }
    const DensityMatrix &density() const noexcept {
        return *rho_;
    }
    SettingCache &cache() const noexcept {
        return *cache_;
    }

    SettingCache::Value distribution(const MeasurementSetting &s) const {
        return cache_->get_or_compute(s, [&] { return outcome_distribution(*rho_, s); });
    }

    /// One single-shot measurement in setting s.
    Outcome measure(const MeasurementSetting &s, Rng &rng) const {
        return distribution(s)->sample(rng);
    }

   private:
    std::shared_ptr<const DensityMatrix> rho_;
    std::shared_ptr<SettingCache> cache_;
};

}  // namespace dfe
