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

#include <string>
#include <vector>

#include "lsd/channels.h"

namespace lsd {

enum class OpType { kPrepZ, kPrepX, kCnot, kH, kSwap, kMeasureZ, kMeasureX, kError };

struct CircuitOp {
    OpType type;
    std::vector<int> qubits;
    int bit = -1;
    /// Local distribution over `qubits` for kError.
    PauliDistribution error;
};

/// Syndrome-extraction circuit on physical qubits. Data enters on `data_in`
/// and leaves on `data_out`; the two differ for SWAP-style relabelling.
struct CliffordCircuitSpec {
    int num_qubits = 0;
    int num_bits = 0;
    std::vector<int> data_in;
    std::vector<int> data_out;
    std::vector<CircuitOp> ops;

    CliffordCircuitSpec &prep_z(int q);
    CliffordCircuitSpec &prep_x(int q);
    CliffordCircuitSpec &cnot(int c, int t);
    CliffordCircuitSpec &h(int q);
    CliffordCircuitSpec &swap(int a, int b);
    CliffordCircuitSpec &measure_z(int q, int bit);
    CliffordCircuitSpec &measure_x(int q, int bit);
    CliffordCircuitSpec &error(std::vector<int> qubits, PauliDistribution dist);

    /// Throws std::invalid_argument describing the first structural problem.
    void validate() const;
    size_t num_error_locations() const;
};

/// Copy of `circuit` with two-qubit depolarizing noise after every CNOT.
CliffordCircuitSpec with_cnot_depolarizing(const CliffordCircuitSpec &circuit, double p);

/// [[2,1,1]] flag gadget: two CNOTs onto a |0> ancilla.
CliffordCircuitSpec flag_gadget_2_1_1();
/// [[2,1,1]] leakage-protected gadget; `keep_first` keeps data qubit 0 in
/// place and moves data qubit 1 onto the fresh ancilla, otherwise the roles swap.
CliffordCircuitSpec lp_gadget_2_1_1(bool keep_first = true);
/// [[4,2,2]] depth-4 gadget with a |0> and a |+> ancilla.
CliffordCircuitSpec flag_gadget_4_2_2();
/// [[4,2,2]] depth-5 leakage-protected gadget.
CliffordCircuitSpec lp_gadget_4_2_2();
/// Names: flag_2_1_1, lp_2_1_1, flag_4_2_2, lp_4_2_2.
CliffordCircuitSpec builtin_circuit(const std::string &name);

/// Frame over all circuit qubits.
struct Frame {
    uint64_t x = 0;
    uint64_t z = 0;
};

struct FrameEffect {
    uint64_t flips = 0;
    PauliOperator data;

    auto operator<=>(const FrameEffect &other) const = default;
};

/// Pushes `frame` through ops[start:] (error ops are skipped).
FrameEffect propagate_frame(const CliffordCircuitSpec &circuit, size_t start, Frame frame);
/// Effect of an incoming data error placed on data_in.
FrameEffect propagate_incoming(const CliffordCircuitSpec &circuit, const PauliOperator &data_error);

/// Checks that every measured observable of the ideal circuit is a code
/// stabilizer and incoming errors produce their syndrome and leave on
/// data_out. Throws InvariantError otherwise.
void check_gadget_circuit(const CliffordCircuitSpec &circuit, const StabilizerCode &code);

struct PropagationOptions {
    size_t support_cap = 10'000'000;
    bool allow_truncation = false;
};

struct PropagationResult {
    SyndromeChannelSet channels;
    /// Mass removed by truncation; an upper bound on the total-variation error.
    double dropped_mass = 0;
    size_t max_support = 0;
};

PropagationResult propagate_circuit_noise(
    const CliffordCircuitSpec &circuit, const StabilizerCode &code, const PropagationOptions &options = {});

/// Monte-Carlo estimate of the same channels by forward frame simulation.
SyndromeChannelSet sample_circuit_noise(
    const CliffordCircuitSpec &circuit, const StabilizerCode &code, uint64_t samples, uint64_t seed);

}  // namespace lsd
