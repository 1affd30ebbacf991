// Copyright 2026 The lsd-drt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lsd {

constexpr int kMaxQubits = 64;

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline int parity(uint64_t v) { return std::popcount(v) & 1; }

/// Phase-free n-qubit Pauli operator stored as a symplectic bit pair.
/// Bit i of `x` / `z` is the X / Z component on qubit i.
struct PauliOperator {
    uint64_t x = 0;
    uint64_t z = 0;
    int n = 0;

    PauliOperator() = default;
    PauliOperator(int n, uint64_t x, uint64_t z);

    static PauliOperator identity(int n) { return PauliOperator(n, 0, 0); }
    /// Parses a string over {I,X,Y,Z}; the leftmost character is qubit 0.
    static PauliOperator from_string(std::string_view text);

    std::string str() const;
    bool is_identity() const { return x == 0 && z == 0; }
    int weight() const { return std::popcount(x | z); }

    /// Dense index x | z << n, used by the full transforms.
    uint64_t dense_index() const { return x | (z << n); }
    static PauliOperator from_dense_index(int n, uint64_t index);

    auto operator<=>(const PauliOperator &other) const = default;
};

/// omega(a, b): 0 iff a and b commute.
int symplectic_product(const PauliOperator &a, const PauliOperator &b);
PauliOperator pauli_multiply(const PauliOperator &a, const PauliOperator &b);

/// Bit string of length n-k; also used for ancilla flips and detectors.
struct Syndrome {
    uint64_t bits = 0;
    int length = 0;

    Syndrome() = default;
    Syndrome(uint64_t bits, int length);
    static Syndrome from_string(std::string_view text);

    /// Character j is bit j.
    std::string str() const;
    bool is_zero() const { return bits == 0; }
    Syndrome operator^(const Syndrome &other) const;

    auto operator<=>(const Syndrome &other) const = default;
};

std::string bits_to_string(uint64_t bits, int length);
uint64_t bits_from_string(std::string_view text);

}  // namespace lsd
