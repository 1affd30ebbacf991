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

struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UndefinedChannelError : std::domain_error {
    using std::domain_error::domain_error;
};

/// The sub-normalized channels {P^m} of one noisy gadget, keyed by the
/// ancilla flip pattern m (relative to the incoming syndrome).
struct SyndromeChannelSet {
    StabilizerCode code;
    std::map<uint64_t, PauliDistribution> channels;

    explicit SyndromeChannelSet(StabilizerCode c) : code(std::move(c)) {}

    /// Empty distribution when m has no entry.
    PauliDistribution channel(uint64_t m) const;
    PauliDistribution &mutable_channel(uint64_t m);
    double mass() const;
    PauliDistribution average() const;
    /// Throws InvariantError naming the failed check.
    void validate(double tolerance = 1e-12) const;
};

struct DetectorChannel {
    Syndrome detector;
    PauliDistribution dist;

    double probability() const { return dist.mass(); }
};

using DetectorChannels = std::map<uint64_t, DetectorChannel>;

/// [[2,1,1]] gadget with data X errors at rate p and syndrome flips at rate q.
SyndromeChannelSet phenomenological_gadget(double p, double q);

struct AncillaReadout {
    int qubit;
    char basis;  // 'Z' flips on X/Y, 'X' flips on Z/Y.
};

/// Positions of data and measured ancilla qubits inside a joint distribution.
/// Ancilla j writes syndrome bit j.
struct MeasurementLayout {
    std::vector<int> data_qubits;
    std::vector<AncillaReadout> ancillas;
};

SyndromeChannelSet reduce_joint_to_syndrome_channels(
    const PauliDistribution &joint, const MeasurementLayout &layout, const StabilizerCode &code);

DetectorChannels detector_channels(const SyndromeChannelSet &gadget);

PauliDistribution restrict_by_syndrome(
    const PauliDistribution &dist, const Syndrome &e, const StabilizerCode &code);

PauliDistribution compose(const PauliDistribution &a, const PauliDistribution &b);

/// parts[pure error syndrome][logical bits] = probability.
struct LogicalSplit {
    int k = 0;
    std::map<uint64_t, std::map<uint64_t, double>> parts;

    double mass() const;
    double part_mass(uint64_t pure_error) const;
};

LogicalSplit logical_split(const PauliDistribution &dist, const StabilizerCode &code);
LogicalSplit logical_split(const DetectorChannel &channel, const StabilizerCode &code);

/// Normalized logical distributions indexed by logical bits.
struct BoundChannels {
    std::vector<double> post_selected;
    /// Maximum-likelihood relabelling per pure error.
    std::vector<double> ideal_decoder;
    /// Plain sum over pure errors without relabelling.
    std::vector<double> pure_error_correction;
    std::vector<uint64_t> decoder_relabel;
};

BoundChannels bound_channels(const LogicalSplit &split);

struct OverlapResult {
    double fidelity;
    double retained_fraction;
};

/// Post-selects every overlapping detector of `length + 1` consecutive
/// gadgets (starting from the code space) on zero.
OverlapResult overlapping_sequence_channel(
    const SyndromeChannelSet &gadget, int length, size_t state_cap = size_t{1} << 22);

}  // namespace lsd
