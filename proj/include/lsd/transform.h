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

#include <map>
#include <stdexcept>
#include <vector>

#include "lsd/code.h"
#include "lsd/distribution.h"

namespace lsd {

struct IncompleteInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class TransformDirection { kToEigenvalues, kToProbabilities };

constexpr int kDefaultDenseCap = 8;

/// sum_P dist(P) (-1)^{omega(P, q)}.
double eigenvalue_of_distribution(const PauliDistribution &dist, const PauliOperator &q);

/// Dense vectors are indexed by PauliOperator::dense_index.
std::vector<double> to_dense(const PauliDistribution &dist, int max_n = kDefaultDenseCap);
PauliDistribution from_dense(const std::vector<double> &values, int n, double drop_below = 0.0);

/// Full transform over all 4^n Paulis. kToEigenvalues maps p -> lambda,
/// kToProbabilities maps lambda -> p (includes the 4^{-n} factor).
std::vector<double> walsh_hadamard_full(
    std::vector<double> values, int n, TransformDirection direction, int max_n = kDefaultDenseCap);
/// Single-threaded reference for walsh_hadamard_full.
std::vector<double> walsh_hadamard_full_serial(
    std::vector<double> values, int n, TransformDirection direction, int max_n = kDefaultDenseCap);

/// Coset totals 2^{-(n+k)} sum_{Q in LS} lambda(Q) (-1)^{omega(P,Q)},
/// indexed by coset index. `lams` is keyed by normalizer element.
std::vector<double> coset_probabilities_from_eigenvalues(
    const std::map<PauliOperator, double> &lams, const StabilizerCode &code);
/// Same, with eigenvalues ordered as code.normalizer_elements().
std::vector<double> coset_probabilities_from_eigenvalues(
    const std::vector<double> &lams_in_normalizer_order, const StabilizerCode &code);
/// Row c, column j: 2^{-(n+k)} (-1)^{omega(rep_c, N_j)}.
std::vector<std::vector<double>> coset_sign_matrix(const StabilizerCode &code);

/// Direct coset marginalization of a distribution (sum over each P·S).
std::vector<double> coset_marginals(const PauliDistribution &dist, const StabilizerCode &code);
/// Eigenvalues of dist at each normalizer element, in normalizer order.
std::vector<double> normalizer_eigenvalues(const PauliDistribution &dist, const StabilizerCode &code);

}  // namespace lsd
