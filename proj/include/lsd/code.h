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

#include <optional>
#include <string>
#include <vector>

#include "lsd/pauli.h"

namespace lsd {

/// Coset P·S labelled by its pure error E and canonical logical L.
/// `index` packs the syndrome bits in the low n-k bits and the logical
/// bits (X exponents then Z exponents) above them.
struct CosetLabel {
    PauliOperator pure_error;
    PauliOperator logical;
    uint64_t index = 0;

    bool operator==(const CosetLabel &other) const { return index == other.index; }
};

class StabilizerCode {
   public:
    StabilizerCode(
        std::string id,
        int n,
        int k,
        std::vector<PauliOperator> stabilizers,
        std::vector<PauliOperator> logical_x,
        std::vector<PauliOperator> logical_z,
        std::vector<PauliOperator> pure_errors);

    const std::string &id() const { return id_; }
    int n() const { return n_; }
    int k() const { return k_; }
    int num_stabilizers() const { return n_ - k_; }
    int num_syndromes() const { return 1 << (n_ - k_); }
    int num_logicals() const { return 1 << (2 * k_); }
    int num_cosets() const { return 1 << (n_ + k_); }

    const std::vector<PauliOperator> &stabilizer_generators() const { return stabilizers_; }
    const std::vector<PauliOperator> &logical_x() const { return logical_x_; }
    const std::vector<PauliOperator> &logical_z() const { return logical_z_; }
    const std::vector<PauliOperator> &pure_error_generators() const { return pure_errors_; }

    Syndrome syndrome_of(const PauliOperator &p) const;
    uint64_t syndrome_bits(const PauliOperator &p) const;
    CosetLabel decompose(const PauliOperator &p) const;
    uint64_t coset_index(const PauliOperator &p) const;
    PauliOperator coset_representative(uint64_t index) const;

    PauliOperator pure_error_from_syndrome(uint64_t bits) const;
    /// bits i: exponent of logical_x[i]; bits k+i: exponent of logical_z[i].
    PauliOperator logical_from_bits(uint64_t bits) const;
    uint64_t logical_bits(const PauliOperator &normalizer_element) const;
    PauliOperator stabilizer_from_bits(uint64_t bits) const;
    /// Coefficients a with p = prod S_i^{a_i}, or nullopt if p is not in the group.
    std::optional<uint64_t> stabilizer_coefficients(const PauliOperator &p) const;

    /// All L·S, ordered by (logical bits, stabilizer bits); element j has
    /// logical bits j >> (n-k) and stabilizer bits j & (2^{n-k} - 1).
    std::vector<PauliOperator> normalizer_elements() const;

   private:
    void check_width(const PauliOperator &p) const;

    std::string id_;
    int n_;
    int k_;
    std::vector<PauliOperator> stabilizers_;
    std::vector<PauliOperator> logical_x_;
    std::vector<PauliOperator> logical_z_;
    std::vector<PauliOperator> pure_errors_;
    // Row-echelon copy of the stabilizer generators over (x | z << 64).
    std::vector<unsigned __int128> echelon_rows_;
    std::vector<uint64_t> echelon_combos_;
    std::vector<int> echelon_pivots_;
};

StabilizerCode code_2_1_1();
StabilizerCode code_4_2_2();
/// Looks up "2_1_1" or "4_2_2".
StabilizerCode builtin_code(const std::string &id);
std::vector<StabilizerCode> builtin_codes();

}  // namespace lsd
