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
 * Dense complex linear algebra for small qubit registers.
 *
 * Qubit convention: qubits are numbered 0..n-1 from the left of a bitstring, and
 * qubit q occupies bit (n - 1 - q) of a basis-state index. kron(A, B) therefore
 * places A on the more significant qubits.
 */

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "dfe/common.hpp"

namespace dfe {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Matrix2 = Eigen::Matrix2cd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdFloor = -1e-9;

/// Bit of qubit q (0-based from the left) inside a basis index of an n-qubit register.
inline int qubit_bit(std::uint64_t index, int n, int q) {
    return static_cast<int>((index >> (n - 1 - q)) & 1U);
}

inline std::uint64_t qubit_mask(int n, int q) {
    return std::uint64_t{1} << (n - 1 - q);
}

/// Local rotation applied before a computational-basis readout: the set {I, H, HS^dagger}.
enum class LocalUnitary : std::uint8_t {
    Identity,     // Z basis
    Hadamard,     // X basis
    HadamardSdg,  // Y basis
};

inline constexpr std::array<LocalUnitary, 3> kAllLocalUnitaries = {
    LocalUnitary::Identity, LocalUnitary::Hadamard, LocalUnitary::HadamardSdg};

inline char basis_letter(LocalUnitary u) {
    switch (u) {
        case LocalUnitary::Identity:
            return 'Z';
        case LocalUnitary::Hadamard:
            return 'X';
        case LocalUnitary::HadamardSdg:
            return 'Y';
    }
    return '?';
}

inline const Matrix2 &unitary_matrix(LocalUnitary u) {
    static const Matrix2 identity = Matrix2::Identity();
    static const Matrix2 hadamard = [] {
        Matrix2 m;
        const double r = 1.0 / std::sqrt(2.0);
        m << r, r, r, -r;
        return m;
    }();
    static const Matrix2 hadamard_sdg = [] {
        Matrix2 sdg;
        sdg << 1.0, 0.0, 0.0, Complex(0.0, -1.0);
        return Matrix2(hadamard * sdg);
    }();
    switch (u) {
        case LocalUnitary::Identity:
            return identity;
        case LocalUnitary::Hadamard:
            return hadamard;
        case LocalUnitary::HadamardSdg:
            break;
    }
    return hadamard_sdg;
}

/// <bra| U^dagger |outcome><outcome| U |ket>, evaluated in closed form so the result is exact.
///
/// For H, <o|H|k> = (-1)^{o k} / sqrt(2). For HS^dagger the column k additionally picks
/// up the phase 1 (k = 0) or -i (k = 1).
inline Complex local_trace_element(LocalUnitary u, int bra, int outcome, int ket) {
    if (u == LocalUnitary::Identity) {
        return (bra == outcome && outcome == ket) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
    }
    const double sign = ((outcome & (bra ^ ket)) != 0) ? -1.0 : 1.0;
    Complex v(0.5 * sign, 0.0);
    if (u == LocalUnitary::HadamardSdg) {
        // conj(phase(bra)) * phase(ket) with phase(1) = -i.
        if (bra == 1 && ket == 0) {
            v *= Complex(0.0, 1.0);
        } else if (bra == 0 && ket == 1) {
            v *= Complex(0.0, -1.0);
        }
    }
    return v;
}

inline int log2_dimension(Eigen::Index dim) {
    if (dim < 2 || (dim & (dim - 1)) != 0) {
        return -1;
    }
    return std::countr_zero(static_cast<std::uint64_t>(dim));
}

/// Kronecker product. Throws DimensionOverflow if the result would exceed the qubit cap.
inline Matrix kron(const Matrix &a, const Matrix &b) {
    const double rows = static_cast<double>(a.rows()) * static_cast<double>(b.rows());
    const double cols = static_cast<double>(a.cols()) * static_cast<double>(b.cols());
    const double cap = std::ldexp(1.0, max_qubits());
    if (rows > cap || cols > cap) {
        throw Error(ErrorKind::DimensionOverflow, "kron result exceeds the configured qubit cap");
    }
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Validated n-qubit density matrix. Immutable once built.
class DensityMatrix {
   public:
    int qubits() const noexcept {
        return n_;
    }
    std::uint64_t dim() const noexcept {
        return std::uint64_t{1} << n_;
    }
    const Matrix &matrix() const noexcept {
        return m_;
    }
    Complex operator()(std::uint64_t row, std::uint64_t col) const {
        return m_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }

    /// Wraps a matrix the caller has constructed to be a density matrix (e.g. a target
    /// projector). Only the shape is checked.
    static DensityMatrix trusted(Matrix m) {
        const int n = log2_dimension(m.rows());
        if (n < 1 || m.rows() != m.cols()) {
            throw Error(ErrorKind::BadDimension, "density matrix must be 2^n x 2^n with n >= 1");
        }
        require_qubits(n, "density matrix");
        return DensityMatrix(n, std::move(m));
    }

   private:
    DensityMatrix(int n, Matrix m) : n_(n), m_(std::move(m)) {
    }

    int n_;
    Matrix m_;
};

/// Checks shape, Hermiticity, unit trace and positive semidefiniteness, in that order.
inline DensityMatrix validate_density(Matrix m) {
    if (m.rows() != m.cols() || log2_dimension(m.rows()) < 1) {
        throw Error(ErrorKind::BadDimension, "expected a square 2^n x 2^n matrix, got " +
                                                 std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    require_qubits(log2_dimension(m.rows()), "density matrix");
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        for (Eigen::Index b = 0; b < m.cols(); ++b) {
            const Complex z = m(a, b);
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                throw Error(ErrorKind::NotHermitian, "non-finite entry");
            }
        }
    }
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        for (Eigen::Index b = a; b < m.cols(); ++b) {
            if (std::abs(m(a, b) - std::conj(m(b, a))) > kHermitianTol) {
                throw Error(ErrorKind::NotHermitian, "entry (" + std::to_string(a) + "," + std::to_string(b) +
                                                         ") differs from the conjugate of its transpose");
            }
        }
    }
    const Complex tr = m.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > kTraceTol) {
        throw Error(ErrorKind::TraceNotOne, "trace is " + std::to_string(tr.real()));
    }
    Matrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < kPsdFloor) {
        throw Error(ErrorKind::NotPSD, "minimum eigenvalue " + std::to_string(min_eig));
    }
    return DensityMatrix::trusted(std::move(m));
}

}  // namespace dfe
