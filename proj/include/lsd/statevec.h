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

#include <complex>
#include <vector>

#include "lsd/circuit.h"
#include "lsd/rng.h"

namespace lsd {

constexpr int kMaxDenseQubits = 12;

/// Pure state on n <= 12 qubits; bit q of an amplitude index is qubit q.
class DenseState {
   public:
    explicit DenseState(int n);

    int n() const { return n_; }
    const std::vector<std::complex<double>> &amplitudes() const { return amp_; }
    std::vector<std::complex<double>> &amplitudes() { return amp_; }
    double norm() const;

    /// Hermitian Pauli (Y = iXZ) on the qubits of `p`.
    void apply_pauli(const PauliOperator &p);
    /// exp(i theta P).
    void apply_rotation(const PauliOperator &p, double theta);
    void apply_cnot(int control, int target);
    void apply_h(int q);
    void apply_swap(int a, int b);
    double probability_one(int q) const;
    /// Projective Z measurement with collapse.
    int measure_z(int q, Rng &rng);
    void reset(int q, Rng &rng);

   private:
    int n_;
    std::vector<std::complex<double>> amp_;
};

struct PauliRotation {
    PauliOperator axis;
    double theta = 0;
};

/// (1 - eta) P(rho) + eta U rho U^dagger with U the ordered product of rotations.
struct CoherentErrorSpec {
    double eta = 0;
    std::vector<PauliRotation> rotations;
    /// Pauli part P; missing mass is the identity.
    PauliDistribution pauli;

    int n() const;
    /// exp(i theta A) on each of the n qubits, A in {X, Y, Z}.
    static CoherentErrorSpec transversal(char axis, double theta, int n, double eta);
};

/// Logical +1 eigenstate of the [[2,1,1]] code stabilized by -ZZ on
/// span(|01>, |10>); `axis` is 'X', 'Y' or 'Z'.
DenseState logical_input_state(char axis);

struct ClickRate {
    char input = 'Z';
    double rate = 0;
    double stderr_ = 0;
    uint64_t shots = 0;
    uint64_t clicks = 0;
};

/// Runs `circuit` with `error` on the data before extraction. pfr conjugates
/// the error by a fresh uniform Pauli frame and corrects the syndrome.
ClickRate simulate_gadget_clicks(const CliffordCircuitSpec &circuit,
                                 const CoherentErrorSpec &error,
                                 char input,
                                 bool pfr,
                                 uint64_t shots,
                                 uint64_t seed);

/// Exact non-trivial-syndrome probability of the same experiment, by
/// enumerating error branches and frames with deferred measurement.
double exact_click_probability(const CliffordCircuitSpec &circuit,
                               const CoherentErrorSpec &error,
                               char input,
                               bool pfr);

/// Pauli twirl of the error channel via its Pauli transfer matrix diagonal.
PauliDistribution twirl_channel_numerically(const CoherentErrorSpec &error);

}  // namespace lsd
