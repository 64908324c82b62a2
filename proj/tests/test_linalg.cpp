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

#include <gtest/gtest.h>

#include <cstdlib>
#include <limits>
#include <set>

#include "dfe/linalg.hpp"
#include "dfe/rng.hpp"
#include "oracles.hpp"

using namespace dfe;

namespace {

const Complex kI(0.0, 1.0);

// Scoped DFE_MAX_QUBITS override.
struct MaxQubitsGuard {
    explicit MaxQubitsGuard(const char *v) {
        setenv("DFE_MAX_QUBITS", v, 1);
    }
    ~MaxQubitsGuard() {
        unsetenv("DFE_MAX_QUBITS");
    }
};

}  // namespace

TEST(LocalTrace, table_entries_exact) {
    struct Row {
        int bra, outcome, ket;
        Complex x, y;
    };
    const Row rows[] = {
        {0, 0, 1, 0.5, -0.5 * kI},
        {0, 1, 1, -0.5, 0.5 * kI},
        {1, 0, 0, 0.5, 0.5 * kI},
        {1, 1, 0, -0.5, -0.5 * kI},
    };
    for (const auto &r : rows) {
        EXPECT_EQ(local_trace_element(LocalUnitary::Hadamard, r.bra, r.outcome, r.ket), r.x);
        EXPECT_EQ(local_trace_element(LocalUnitary::HadamardSdg, r.bra, r.outcome, r.ket), r.y);
        EXPECT_EQ(local_trace_element(LocalUnitary::Identity, r.bra, r.outcome, r.ket), Complex(0.0, 0.0));
    }
}

TEST(LocalTrace, matches_dense_products) {
    const char letters[] = {'Z', 'X', 'Y'};
    for (int u = 0; u < 3; ++u) {
        const auto m = oracle::letter_unitary(letters[u]);
        for (int bra = 0; bra < 2; ++bra) {
            for (int o = 0; o < 2; ++o) {
                for (int ket = 0; ket < 2; ++ket) {
                    const Complex want = std::conj(m(o, bra)) * m(o, ket);
                    const Complex got = local_trace_element(kAllLocalUnitaries[u], bra, o, ket);
                    EXPECT_NEAR(std::abs(got - want), 0.0, 1e-15) << letters[u] << bra << o << ket;
                }
            }
        }
    }
}

TEST(LocalTrace, unitary_matrices_match_letters) {
    for (auto u : kAllLocalUnitaries) {
        const auto want = oracle::letter_unitary(basis_letter(u));
        EXPECT_LT((Matrix(unitary_matrix(u)) - want).norm(), 1e-15);
    }
}

TEST(Kron, matches_textbook_and_qubit_order) {
    Rng rng(3);
    Matrix a(2, 2), b(4, 4);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        a(i) = Complex(rng.normal(), rng.normal());
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        b(i) = Complex(rng.normal(), rng.normal());
    }
    EXPECT_LT((kron(a, b) - oracle::kron(a, b)).norm(), 1e-14);

    // X on qubit 0 of 2 flips the most significant bit.
    const Matrix x = oracle::pauli('X');
    const Matrix xi = kron(x, Matrix::Identity(2, 2));
    EXPECT_EQ(xi(0b10, 0b00), Complex(1.0, 0.0));
    EXPECT_EQ(qubit_bit(0b10, 2, 0), 1);
    EXPECT_EQ(qubit_bit(0b10, 2, 1), 0);
    EXPECT_EQ(qubit_mask(3, 0), 0b100u);
}

TEST(Kron, refuses_past_cap) {
    MaxQubitsGuard guard("2");
    const Matrix a = Matrix::Identity(4, 4);
    try {
        kron(a, Matrix::Identity(2, 2));
        FAIL() << "expected DimensionOverflow";
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionOverflow);
    }
}

TEST(ValidateDensity, accepts_valid_states) {
    const auto rho = validate_density(oracle::ghz(3));
    EXPECT_EQ(rho.qubits(), 3);
    EXPECT_EQ(rho.dim(), 8u);
}

TEST(ValidateDensity, error_kinds) {
    const auto kind_of = [](Matrix m) {
        try {
            validate_density(std::move(m));
        } catch (const Error &e) {
            return e.kind();
        }
        return ErrorKind::Io;  // sentinel: nothing thrown
    };
    Matrix nonsquare = Matrix::Zero(2, 4);
    EXPECT_EQ(kind_of(nonsquare), ErrorKind::BadDimension);
    Matrix three = Matrix::Identity(3, 3) / 3.0;
    EXPECT_EQ(kind_of(three), ErrorKind::BadDimension);

    Matrix nh = Matrix::Identity(2, 2) / 2.0;
    nh(0, 1) = 0.1;
    EXPECT_EQ(kind_of(nh), ErrorKind::NotHermitian);

    Matrix tr = Matrix::Identity(2, 2);
    EXPECT_EQ(kind_of(tr), ErrorKind::TraceNotOne);

    Matrix neg = Matrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    EXPECT_EQ(kind_of(neg), ErrorKind::NotPSD);

    Matrix nan = Matrix::Identity(2, 2) / 2.0;
    nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_NE(kind_of(nan), ErrorKind::Io);
}

TEST(ValidateDensity, respects_qubit_cap) {
    MaxQubitsGuard guard("2");
    try {
        validate_density(Matrix::Identity(8, 8) / 8.0);
        FAIL() << "expected DimensionOverflow";
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionOverflow);
    }
}

TEST(Common, binomial_and_overflow) {
    EXPECT_EQ(binomial(4, 2), 6u);
    EXPECT_EQ(binomial(10, 0), 1u);
    EXPECT_EQ(binomial(3, 5), 0u);
    EXPECT_EQ(binomial(62, 31), 465428353255261088ULL);
    EXPECT_THROW(binomial(70, 35), Error);
}

TEST(Common, compensated_sum_recovers_small_terms) {
    CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) {
        s.add(1.0);
    }
    s.add(-1e16);
    EXPECT_EQ(s.value(), 1000.0);
}

TEST(Rng, derived_streams_are_distinct) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 20; ++a) {
        for (std::uint64_t b = 0; b < 20; ++b) {
            seen.insert(derive_seed(7, {a, b}));
        }
    }
    EXPECT_EQ(seen.size(), 400u);
    EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
    EXPECT_NE(derive_seed(7, {1}), derive_seed(7, {1, 0}));
}

TEST(Rng, below_and_uniform_ranges) {
    Rng rng(11);
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 30000; ++i) {
        const auto v = rng.below(3);
        ASSERT_LT(v, 3u);
        ++counts[v];
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
    for (int c : counts) {
        EXPECT_NEAR(c, 10000, 5 * std::sqrt(30000 * (1.0 / 3) * (2.0 / 3)));
    }
}
