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
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dfe/linalg.hpp"
#include "dfe/rng.hpp"

namespace dfe {

struct Ghz {
    int n;
};
struct WState {
    int n;
};
struct Dicke {
    int n;
    int k;
};
/// Computational basis state |b>. `bits` uses the basis-index convention of linalg.hpp.
struct BasisState {
    int n;
    std::uint64_t bits;
};

/// Pure target state. Every variant is a uniform superposition over a set of basis states.
using TargetState = std::variant<Ghz, WState, Dicke, BasisState>;

inline int qubits(const TargetState &t) {
    return std::visit([](const auto &s) { return s.n; }, t);
}

/// Dicke excitation count, 1 for W, 0 otherwise.
inline int excitations(const TargetState &t) {
    if (auto d = std::get_if<Dicke>(&t)) {
        return d->k;
    }
    return std::holds_alternative<WState>(t) ? 1 : 0;
}

inline std::string bitstring(std::uint64_t bits, int n) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int q = 0; q < n; ++q) {
        s[static_cast<std::size_t>(q)] = qubit_bit(bits, n, q) ? '1' : '0';
    }
    return s;
}

inline std::uint64_t parse_bitstring(std::string_view s) {
    if (s.empty() || s.size() > 63) {
        throw Error(ErrorKind::InvalidArgument, "bitstring must have 1..63 characters");
    }
    std::uint64_t v = 0;
    for (char c : s) {
        if (c != '0' && c != '1') {
            throw Error(ErrorKind::InvalidArgument, "bitstring may only contain 0 and 1");
        }
        v = (v << 1) | static_cast<std::uint64_t>(c == '1');
    }
    return v;
}

/// Short descriptor used in CSV output: "ghz", "w", "dicke", "basis:0101".
inline std::string target_name(const TargetState &t) {
    struct Visitor {
        std::string operator()(const Ghz &) const {
            return "ghz";
        }
        std::string operator()(const WState &) const {
            return "w";
        }
        std::string operator()(const Dicke &) const {
            return "dicke";
        }
        std::string operator()(const BasisState &b) const {
            return "basis:" + bitstring(b.bits, b.n);
        }
    };
    return std::visit(Visitor{}, t);
}

inline void validate_target(const TargetState &t) {
    require_qubits(qubits(t), "target state");
    if (auto d = std::get_if<Dicke>(&t)) {
        if (d->k < 0 || d->k > d->n) {
            throw Error(ErrorKind::InvalidArgument, "Dicke excitations must satisfy 0 <= k <= n");
        }
    }
    if (auto b = std::get_if<BasisState>(&t)) {
        if (b->n < 64 && (b->bits >> b->n) != 0) {
            throw Error(ErrorKind::InvalidArgument, "basis bitstring longer than n");
        }
    }
}

/// Basis indices carrying equal amplitude in the target, in increasing order.
inline std::vector<std::uint64_t> target_support(const TargetState &t) {
    validate_target(t);
    const int n = qubits(t);
    std::vector<std::uint64_t> out;
    if (std::holds_alternative<Ghz>(t)) {
        out = {0, (std::uint64_t{1} << n) - 1};
    } else if (auto b = std::get_if<BasisState>(&t)) {
        out = {b->bits};
    } else {
        const int k = excitations(t);
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
            if (popcount(x) == k) {
                out.push_back(x);
            }
        }
    }
    return out;
}

/// sigma = |psi><psi| as a dense matrix.
inline DensityMatrix target_density(const TargetState &t) {
    const auto support = target_support(t);
    const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << qubits(t));
    const double w = 1.0 / static_cast<double>(support.size());
    Matrix m = Matrix::Zero(dim, dim);
    for (auto a : support) {
        for (auto b : support) {
            m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = w;
        }
    }
    return DensityMatrix::trusted(std::move(m));
}

/// tr(rho sigma), clamped into [0, 1].
inline double fidelity(const DensityMatrix &rho, const TargetState &t) {
    if (rho.qubits() != qubits(t)) {
        throw Error(ErrorKind::DimensionMismatch, "state has " + std::to_string(rho.qubits()) +
                                                      " qubits but target has " + std::to_string(qubits(t)));
    }
    const auto support = target_support(t);
    CompensatedSum acc;
    for (auto a : support) {
        for (auto b : support) {
            acc.add(rho(a, b).real());
        }
    }
    const double f = acc.value() / static_cast<double>(support.size());
    return std::clamp(f, 0.0, 1.0);
}

struct StateGenConfig {
    TargetState target;
    double fidelity;
    std::uint64_t seed;
};

/// Ginibre-distributed mixed state G G^dagger / tr(G G^dagger).
inline Matrix random_density_matrix(int n, Rng &rng) {
    const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << n);
    Matrix g(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        for (Eigen::Index r = 0; r < dim; ++r) {
            const double re = rng.normal();
            const double im = rng.normal();
            g(r, c) = Complex(re, im);
        }
    }
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return rho;
}

/// Random mixed state with tr(rho sigma) equal to the requested fidelity.
///
/// A Ginibre state is projected onto the complement of |psi>, cleaned up (Hermitian
/// part, negative eigenvalues clipped), rescaled to weight 1 - f, and mixed with f sigma.
inline DensityMatrix random_state_with_fidelity(const StateGenConfig &cfg) {
    validate_target(cfg.target);
    if (!(cfg.fidelity >= 0.0 && cfg.fidelity <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "fidelity must lie in [0, 1]");
    }
    const DensityMatrix sigma = target_density(cfg.target);
    if (cfg.fidelity == 1.0) {
        return sigma;
    }
    const int n = qubits(cfg.target);
    const auto dim = static_cast<Eigen::Index>(sigma.dim());
    Rng rng(cfg.seed);
    const Matrix rho = random_density_matrix(n, rng);

    const auto support = target_support(cfg.target);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    const double amp = 1.0 / std::sqrt(static_cast<double>(support.size()));
    for (auto a : support) {
        psi(static_cast<Eigen::Index>(a)) = amp;
    }
    // P rho P with P = I - |psi><psi|.
    const Eigen::VectorXcd v = rho * psi;
    const Complex overlap = psi.dot(v);
    Matrix projected = rho - psi * v.adjoint() - v * psi.adjoint() + overlap * (psi * psi.adjoint());
    projected = 0.5 * (projected + projected.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> solver(projected);
    Eigen::VectorXd evals = solver.eigenvalues().cwiseMax(0.0);
    Matrix cleaned = solver.eigenvectors() * evals.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint();
    cleaned = 0.5 * (cleaned + cleaned.adjoint()).eval();

    const double tr = cleaned.trace().real();
    Matrix out = cleaned * ((1.0 - cfg.fidelity) / tr) + cfg.fidelity * sigma.matrix();
    return DensityMatrix::trusted(std::move(out));
}

}  // namespace dfe
