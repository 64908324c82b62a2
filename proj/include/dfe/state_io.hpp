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

// State file format: {"n": int, "entries": [[re, im], ...]} with 4^n entries, row-major.

#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dfe/linalg.hpp"

namespace dfe {

inline nlohmann::json density_to_json(const DensityMatrix &rho) {
    nlohmann::json entries = nlohmann::json::array();
    const auto dim = static_cast<Eigen::Index>(rho.dim());
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            const Complex z = rho.matrix()(r, c);
            entries.push_back({z.real(), z.imag()});
        }
    }
    return {{"n", rho.qubits()}, {"entries", std::move(entries)}};
}

/// Parses and validates a state document. Shape problems raise BadDimension.
inline DensityMatrix density_from_json(const nlohmann::json &doc) {
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("entries") || !doc["n"].is_number_integer() ||
        !doc["entries"].is_array()) {
        throw Error(ErrorKind::BadDimension, "state document needs integer \"n\" and array \"entries\"");
    }
    const int n = doc["n"].get<int>();
    require_qubits(n, "state file");
    const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << n);
    const auto &entries = doc["entries"];
    if (static_cast<Eigen::Index>(entries.size()) != dim * dim) {
        throw Error(ErrorKind::BadDimension, "expected " + std::to_string(dim * dim) + " entries, found " +
                                                 std::to_string(entries.size()));
    }
    Matrix m(dim, dim);
    std::size_t idx = 0;
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            const auto &e = entries[idx++];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
                throw Error(ErrorKind::BadDimension, "entry " + std::to_string(idx - 1) + " is not [re, im]");
            }
            m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
        }
    }
    return validate_density(std::move(m));
}

inline void write_state_file(const std::string &path, const DensityMatrix &rho) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    }
    out << density_to_json(rho).dump() << '\n';
    if (!out) {
        throw Error(ErrorKind::Io, "failed writing " + path);
    }
}

inline DensityMatrix read_state_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::Io, path + ": " + e.what());
    }
    return density_from_json(doc);
}

}  // namespace dfe
