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

#include <cstdint>
#include <vector>

#include "dfe/linalg.hpp"
#include "dfe/measurement.hpp"

namespace dfe {

/// <b1| rho-hat |b2> for the local-Pauli snapshot
/// rho-hat = (x)_q (3 U_q^dagger |o_q><o_q| U_q - I).
inline Complex snapshot_matrix_element(std::uint64_t b1, std::uint64_t b2, const MeasurementSetting &s,
                                       Outcome o) {
    const int n = s.size();
    Complex acc(1.0, 0.0);
    for (int q = 0; q < n; ++q) {
        const int x = qubit_bit(b1, n, q);
        const int y = qubit_bit(b2, n, q);
        const int ob = qubit_bit(o.bits, n, q);
        const Complex factor = 3.0 * local_trace_element(s[q], x, ob, y) - (x == y ? 1.0 : 0.0);
        if (factor == Complex(0.0, 0.0)) {
            return Complex(0.0, 0.0);
        }
        acc *= factor;
    }
    return acc;
}

/// Fidelity estimator for the basis target |b>: one all-Z shot, indicator of o == b.
inline double basis_dfe_estimator(std::uint64_t b, Outcome o) {
    return o.bits == b ? 1.0 : 0.0;
}

/// Settings allowed by the local basis rule for the pair (b1, b2): Z where the bits agree,
/// X or Y where they differ with an even number of Y. Returned in lexicographic order.
inline std::vector<MeasurementSetting> compatible_settings(std::uint64_t b1, std::uint64_t b2, int n) {
    std::vector<int> differ;
    for (int q = 0; q < n; ++q) {
        if (qubit_bit(b1, n, q) != qubit_bit(b2, n, q)) {
            differ.push_back(q);
        }
    }
    std::vector<MeasurementSetting> out;
    const std::uint64_t combos = std::uint64_t{1} << differ.size();
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
        if (popcount(mask) % 2 != 0) {
            continue;
        }
        auto s = MeasurementSetting::all_z(n);
        for (std::size_t t = 0; t < differ.size(); ++t) {
            const bool y = ((mask >> t) & 1U) != 0;
            s[differ[t]] = y ? LocalUnitary::HadamardSdg : LocalUnitary::Hadamard;
        }
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace dfe
