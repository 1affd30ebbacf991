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

#include "lsd/code.h"

#include <stdexcept>

namespace lsd {

namespace {

using u128 = unsigned __int128;

u128 pack(const PauliOperator &p) { return static_cast<u128>(p.x) | (static_cast<u128>(p.z) << 64); }

int lowest_bit(u128 v) {
    uint64_t lo = static_cast<uint64_t>(v);
    if (lo) {
        return std::countr_zero(lo);
    }
    return 64 + std::countr_zero(static_cast<uint64_t>(v >> 64));
}

std::vector<PauliOperator> parse_all(const std::vector<std::string> &items) {
    std::vector<PauliOperator> out;
    for (const auto &s : items) {
        out.push_back(PauliOperator::from_string(s));
    }
    return out;
}

}  // namespace

StabilizerCode::StabilizerCode(
    std::string id,
    int n,
    int k,
    std::vector<PauliOperator> stabilizers,
    std::vector<PauliOperator> logical_x,
    std::vector<PauliOperator> logical_z,
    std::vector<PauliOperator> pure_errors)
    : id_(std::move(id)),
      n_(n),
      k_(k),
      stabilizers_(std::move(stabilizers)),
      logical_x_(std::move(logical_x)),
      logical_z_(std::move(logical_z)),
      pure_errors_(std::move(pure_errors)) {
    if (n_ < 1 || n_ > kMaxQubits || k_ < 0 || k_ > n_) {
        throw std::invalid_argument("code " + id_ + ": need 1 <= n <= 64 and 0 <= k <= n");
    }
    int r = n_ - k_;
    if (static_cast<int>(stabilizers_.size()) != r || static_cast<int>(pure_errors_.size()) != r) {
        throw std::invalid_argument("code " + id_ + ": need n-k stabilizers and n-k pure errors");
    }
    if (static_cast<int>(logical_x_.size()) != k_ || static_cast<int>(logical_z_.size()) != k_) {
        throw std::invalid_argument("code " + id_ + ": need k logical_x and k logical_z");
    }
    for (const auto *group : {&stabilizers_, &logical_x_, &logical_z_, &pure_errors_}) {
        for (const auto &p : *group) {
            check_width(p);
        }
    }
    for (int i = 0; i < r; i++) {
        for (int j = 0; j < r; j++) {
            if (symplectic_product(stabilizers_[i], stabilizers_[j])) {
                throw std::invalid_argument("code " + id_ + ": stabilizer generators must commute");
            }
        }
    }
    for (int i = 0; i < r; i++) {
        u128 v = pack(stabilizers_[i]);
        uint64_t combo = uint64_t{1} << i;
        for (size_t row = 0; row < echelon_rows_.size(); row++) {
            if ((v >> echelon_pivots_[row]) & 1) {
                v ^= echelon_rows_[row];
                combo ^= echelon_combos_[row];
            }
        }
        if (v == 0) {
            throw std::invalid_argument("code " + id_ + ": stabilizer generators are dependent");
        }
        echelon_rows_.push_back(v);
        echelon_combos_.push_back(combo);
        echelon_pivots_.push_back(lowest_bit(v));
    }
    for (int i = 0; i < k_; i++) {
        for (const auto &s : stabilizers_) {
            if (symplectic_product(logical_x_[i], s) || symplectic_product(logical_z_[i], s)) {
                throw std::invalid_argument("code " + id_ + ": logicals must commute with stabilizers");
            }
        }
        for (int j = 0; j < k_; j++) {
            if (symplectic_product(logical_x_[i], logical_z_[j]) != (i == j ? 1 : 0) ||
                symplectic_product(logical_x_[i], logical_x_[j]) ||
                symplectic_product(logical_z_[i], logical_z_[j])) {
                throw std::invalid_argument("code " + id_ + ": logical pairing is not symplectic");
            }
        }
    }
    for (int i = 0; i < r; i++) {
        if (syndrome_bits(pure_errors_[i]) != (uint64_t{1} << i)) {
            throw std::invalid_argument(
                "code " + id_ + ": pure error " + std::to_string(i) + " must have syndrome e_" +
                std::to_string(i));
        }
    }
}

void StabilizerCode::check_width(const PauliOperator &p) const {
    if (p.n != n_) {
        throw DimensionError(
            "code " + id_ + " has n=" + std::to_string(n_) + " but got " + p.str());
    }
}

uint64_t StabilizerCode::syndrome_bits(const PauliOperator &p) const {
    check_width(p);
    uint64_t bits = 0;
    for (int i = 0; i < n_ - k_; i++) {
        bits |= static_cast<uint64_t>(symplectic_product(p, stabilizers_[i])) << i;
    }
    return bits;
}

Syndrome StabilizerCode::syndrome_of(const PauliOperator &p) const {
    return Syndrome(syndrome_bits(p), n_ - k_);
}

PauliOperator StabilizerCode::pure_error_from_syndrome(uint64_t bits) const {
    PauliOperator out = PauliOperator::identity(n_);
    for (int i = 0; i < n_ - k_; i++) {
        if ((bits >> i) & 1) {
            out = pauli_multiply(out, pure_errors_[i]);
        }
    }
    return out;
}

PauliOperator StabilizerCode::logical_from_bits(uint64_t bits) const {
    PauliOperator out = PauliOperator::identity(n_);
    for (int i = 0; i < k_; i++) {
        if ((bits >> i) & 1) {
            out = pauli_multiply(out, logical_x_[i]);
        }
        if ((bits >> (k_ + i)) & 1) {
            out = pauli_multiply(out, logical_z_[i]);
        }
    }
    return out;
}

uint64_t StabilizerCode::logical_bits(const PauliOperator &p) const {
    uint64_t bits = 0;
    for (int i = 0; i < k_; i++) {
        bits |= static_cast<uint64_t>(symplectic_product(p, logical_z_[i])) << i;
        bits |= static_cast<uint64_t>(symplectic_product(p, logical_x_[i])) << (k_ + i);
    }
    return bits;
}

PauliOperator StabilizerCode::stabilizer_from_bits(uint64_t bits) const {
    PauliOperator out = PauliOperator::identity(n_);
    for (int i = 0; i < n_ - k_; i++) {
        if ((bits >> i) & 1) {
            out = pauli_multiply(out, stabilizers_[i]);
        }
    }
    return out;
}

std::optional<uint64_t> StabilizerCode::stabilizer_coefficients(const PauliOperator &p) const {
    check_width(p);
    u128 v = pack(p);
    uint64_t combo = 0;
    for (size_t row = 0; row < echelon_rows_.size(); row++) {
        if ((v >> echelon_pivots_[row]) & 1) {
            v ^= echelon_rows_[row];
            combo ^= echelon_combos_[row];
        }
    }
    if (v != 0) {
        return std::nullopt;
    }
    return combo;
}

CosetLabel StabilizerCode::decompose(const PauliOperator &p) const {
    uint64_t syn = syndrome_bits(p);
    PauliOperator e = pure_error_from_syndrome(syn);
    PauliOperator rest = pauli_multiply(p, e);
    uint64_t lbits = logical_bits(rest);
    PauliOperator l = logical_from_bits(lbits);
    if (!stabilizer_coefficients(pauli_multiply(rest, l)).has_value()) {
        throw std::logic_error("decompose: residual of " + p.str() + " is not a stabilizer");
    }
    return CosetLabel{e, l, syn | (lbits << (n_ - k_))};
}

uint64_t StabilizerCode::coset_index(const PauliOperator &p) const {
    uint64_t syn = syndrome_bits(p);
    PauliOperator rest = pauli_multiply(p, pure_error_from_syndrome(syn));
    return syn | (logical_bits(rest) << (n_ - k_));
}

PauliOperator StabilizerCode::coset_representative(uint64_t index) const {
    int r = n_ - k_;
    uint64_t syn = index & ((uint64_t{1} << r) - 1);
    return pauli_multiply(pure_error_from_syndrome(syn), logical_from_bits(index >> r));
}

std::vector<PauliOperator> StabilizerCode::normalizer_elements() const {
    int r = n_ - k_;
    std::vector<PauliOperator> out;
    out.reserve(num_cosets());
    for (uint64_t lb = 0; lb < static_cast<uint64_t>(num_logicals()); lb++) {
        PauliOperator l = logical_from_bits(lb);
        for (uint64_t sb = 0; sb < (uint64_t{1} << r); sb++) {
            out.push_back(pauli_multiply(l, stabilizer_from_bits(sb)));
        }
    }
    return out;
}

StabilizerCode code_2_1_1() {
    return StabilizerCode(
        "2_1_1", 2, 1, parse_all({"ZZ"}), parse_all({"XX"}), parse_all({"ZI"}), parse_all({"IX"}));
}

StabilizerCode code_4_2_2() {
    // Pure error i carries syndrome e_i under the order (XXXX, ZZZZ).
    return StabilizerCode(
        "4_2_2",
        4,
        2,
        parse_all({"XXXX", "ZZZZ"}),
        parse_all({"XXII", "XIXI"}),
        parse_all({"ZIZI", "ZZII"}),
        parse_all({"IIIZ", "IIIX"}));
}

StabilizerCode builtin_code(const std::string &id) {
    if (id == "2_1_1") {
        return code_2_1_1();
    }
    if (id == "4_2_2") {
        return code_4_2_2();
    }
    throw std::invalid_argument("unknown builtin code id '" + id + "' (known: 2_1_1, 4_2_2)");
}

std::vector<StabilizerCode> builtin_codes() { return {code_2_1_1(), code_4_2_2()}; }

}  // namespace lsd
