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

#include "lsd/pauli.h"

namespace lsd {

namespace {

uint64_t low_mask(int n) { return n >= 64 ? ~uint64_t{0} : ((uint64_t{1} << n) - 1); }

}  // namespace

PauliOperator::PauliOperator(int n_, uint64_t x_, uint64_t z_) : x(x_), z(z_), n(n_) {
    if (n < 1 || n > kMaxQubits) {
        throw DimensionError("Pauli qubit count must be in [1, 64], got " + std::to_string(n));
    }
    if ((x | z) & ~low_mask(n)) {
        throw DimensionError("Pauli bits exceed qubit count " + std::to_string(n));
    }
}

PauliOperator PauliOperator::from_string(std::string_view text) {
    if (text.empty() || text.size() > static_cast<size_t>(kMaxQubits)) {
        throw DimensionError("Pauli string length must be in [1, 64]: '" + std::string(text) + "'");
    }
    uint64_t x = 0;
    uint64_t z = 0;
    for (size_t i = 0; i < text.size(); i++) {
        uint64_t bit = uint64_t{1} << i;
        switch (text[i]) {
            case 'I':
            case '_':
                break;
            case 'X':
                x |= bit;
                break;
            case 'Y':
                x |= bit;
                z |= bit;
                break;
            case 'Z':
                z |= bit;
                break;
            default:
                throw std::invalid_argument("Bad Pauli character in '" + std::string(text) + "'");
        }
    }
    return PauliOperator(static_cast<int>(text.size()), x, z);
}

std::string PauliOperator::str() const {
    static constexpr char kChars[4] = {'I', 'X', 'Z', 'Y'};
    std::string out(n, 'I');
    for (int i = 0; i < n; i++) {
        out[i] = kChars[((x >> i) & 1) | (((z >> i) & 1) << 1)];
    }
    return out;
}

PauliOperator PauliOperator::from_dense_index(int n, uint64_t index) {
    uint64_t m = low_mask(n);
    return PauliOperator(n, index & m, (index >> n) & m);
}

int symplectic_product(const PauliOperator &a, const PauliOperator &b) {
    if (a.n != b.n) {
        throw DimensionError("symplectic_product: " + a.str() + " vs " + b.str());
    }
    return parity((a.x & b.z) ^ (a.z & b.x));
}

PauliOperator pauli_multiply(const PauliOperator &a, const PauliOperator &b) {
    if (a.n != b.n) {
        throw DimensionError("pauli_multiply: " + a.str() + " vs " + b.str());
    }
    PauliOperator out;
    out.n = a.n;
    out.x = a.x ^ b.x;
    out.z = a.z ^ b.z;
    return out;
}

Syndrome::Syndrome(uint64_t bits_, int length_) : bits(bits_), length(length_) {
    if (length < 0 || length > 63) {
        throw DimensionError("Syndrome length must be in [0, 63]");
    }
    if (bits & ~low_mask(length)) {
        throw DimensionError("Syndrome bits exceed length " + std::to_string(length));
    }
}

Syndrome Syndrome::from_string(std::string_view text) {
    return Syndrome(bits_from_string(text), static_cast<int>(text.size()));
}

std::string Syndrome::str() const { return bits_to_string(bits, length); }

Syndrome Syndrome::operator^(const Syndrome &other) const {
    if (length != other.length) {
        throw DimensionError("Syndrome length mismatch");
    }
    return Syndrome(bits ^ other.bits, length);
}

std::string bits_to_string(uint64_t bits, int length) {
    std::string out(length, '0');
    for (int i = 0; i < length; i++) {
        if ((bits >> i) & 1) {
            out[i] = '1';
        }
    }
    return out;
}

uint64_t bits_from_string(std::string_view text) {
    if (text.size() > 63) {
        throw DimensionError("bit string too long");
    }
    uint64_t bits = 0;
    for (size_t i = 0; i < text.size(); i++) {
        if (text[i] == '1') {
            bits |= uint64_t{1} << i;
        } else if (text[i] != '0') {
            throw std::invalid_argument("Bad bit character in '" + std::string(text) + "'");
        }
    }
    return bits;
}

}  // namespace lsd
