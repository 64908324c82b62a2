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

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace dfe {

/// Categories of failure raised by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
    NotHermitian,
    TraceNotOne,
    NotPSD,
    BadDimension,
    DimensionMismatch,
    DimensionOverflow,
    InvalidArgument,
    Overflow,
    Io,
};

inline const char *error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NotHermitian:
            return "NotHermitian";
        case ErrorKind::TraceNotOne:
            return "TraceNotOne";
        case ErrorKind::NotPSD:
            return "NotPSD";
        case ErrorKind::BadDimension:
            return "BadDimension";
        case ErrorKind::DimensionMismatch:
            return "DimensionMismatch";
        case ErrorKind::DimensionOverflow:
            return "DimensionOverflow";
        case ErrorKind::InvalidArgument:
            return "InvalidArgument";
        case ErrorKind::Overflow:
            return "Overflow";
        case ErrorKind::Io:
            return "Io";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
   public:
    Error(ErrorKind kind, const std::string &message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {
    }

    ErrorKind kind() const noexcept {
        return kind_;
    }

   private:
    ErrorKind kind_;
};

inline constexpr int kDefaultMaxQubits = 12;

/// Global qubit cap. Overridable through the DFE_MAX_QUBITS environment variable.
inline int max_qubits() {
    if (const char *env = std::getenv("DFE_MAX_QUBITS")) {
        char *end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 30) {
            return static_cast<int>(v);
        }
    }
    return kDefaultMaxQubits;
}

inline void require_qubits(int n, const char *what) {
    if (n < 1) {
        throw Error(ErrorKind::InvalidArgument, std::string(what) + ": qubit count must be >= 1");
    }
    if (n > max_qubits()) {
        throw Error(ErrorKind::DimensionOverflow,
                    std::string(what) + ": " + std::to_string(n) + " qubits exceeds the cap of " +
                        std::to_string(max_qubits()));
    }
}

/// Exact binomial coefficient; throws on 64-bit overflow.
inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) {
        return 0;
    }
    if (k > n - k) {
        k = n - k;
    }
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (r > std::numeric_limits<std::uint64_t>::max()) {
            throw Error(ErrorKind::Overflow, "binomial coefficient overflows 64 bits");
        }
    }
    return static_cast<std::uint64_t>(r);
}

inline int popcount(std::uint64_t x) {
    return std::popcount(x);
}

/// Neumaier compensated summation.
class CompensatedSum {
   public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    void add(const CompensatedSum &other) {
        add(other.sum_);
        add(other.comp_);
    }

    double value() const {
        return sum_ + comp_;
    }

   private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace dfe
