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

#include "lsd/channels.h"

#include <cmath>
#include <set>
#include <string>

namespace lsd {

PauliDistribution SyndromeChannelSet::channel(uint64_t m) const {
    auto it = channels.find(m);
    if (it == channels.end()) {
        return PauliDistribution(code.n());
    }
    return it->second;
}

PauliDistribution &SyndromeChannelSet::mutable_channel(uint64_t m) {
    auto it = channels.find(m);
    if (it == channels.end()) {
        it = channels.emplace(m, PauliDistribution(code.n())).first;
    }
    return it->second;
}

double SyndromeChannelSet::mass() const {
    double total = 0;
    for (const auto &[m, d] : channels) {
        total += d.mass();
    }
    return total;
}

PauliDistribution SyndromeChannelSet::average() const {
    PauliDistribution out(code.n());
    for (const auto &[m, d] : channels) {
        for (const auto &[p, w] : d) {
            out.add(p, w);
        }
    }
    return out;
}

void SyndromeChannelSet::validate(double tolerance) const {
    uint64_t limit = static_cast<uint64_t>(code.num_syndromes());
    for (const auto &[m, d] : channels) {
        if (m >= limit) {
            throw InvariantError("syndrome key " + std::to_string(m) + " exceeds n-k bits");
        }
        if (d.n() != code.n()) {
            throw InvariantError("channel for syndrome " + bits_to_string(m, code.num_stabilizers()) +
                                 " is not over the code's data qubits");
        }
    }
    double total = mass();
    if (std::abs(total - 1) > tolerance) {
        throw InvariantError("instrument mass must be 1 but is " + std::to_string(total));
    }
}

SyndromeChannelSet phenomenological_gadget(double p, double q) {
    if (!(p >= 0 && p <= 1) || !(q >= 0 && q <= 1)) {
        throw std::invalid_argument("phenomenological_gadget: p and q must lie in [0, 1]");
    }
    SyndromeChannelSet out(code_2_1_1());
    auto II = PauliOperator::from_string("II");
    auto XX = PauliOperator::from_string("XX");
    auto IX = PauliOperator::from_string("IX");
    auto XI = PauliOperator::from_string("XI");
    double li_ii = (1 - p) * (1 - p);
    double li_xx = p * p;
    double lx = p * (1 - p);
    for (uint64_t m : {0, 1}) {
        double w_i = m == 0 ? 1 - q : q;
        double w_x = m == 0 ? q : 1 - q;
        PauliDistribution d(2);
        d.add(II, w_i * li_ii);
        d.add(XX, w_i * li_xx);
        d.add(IX, w_x * lx);
        d.add(XI, w_x * lx);
        if (!d.empty()) {
            out.channels.emplace(m, std::move(d));
        }
    }
    return out;
}

SyndromeChannelSet reduce_joint_to_syndrome_channels(
    const PauliDistribution &joint, const MeasurementLayout &layout, const StabilizerCode &code) {
    int total = joint.n();
    if (static_cast<int>(layout.data_qubits.size()) != code.n() ||
        static_cast<int>(layout.ancillas.size()) != code.num_stabilizers()) {
        throw DimensionError("measurement layout needs n data qubits and n-k ancillas");
    }
    std::set<int> seen;
    auto claim = [&](int q) {
        if (q < 0 || q >= total || !seen.insert(q).second) {
            throw DimensionError("measurement layout qubit " + std::to_string(q) + " is invalid or repeated");
        }
    };
    for (int q : layout.data_qubits) {
        claim(q);
    }
    for (const auto &a : layout.ancillas) {
        claim(a.qubit);
        if (a.basis != 'Z' && a.basis != 'X') {
            throw std::invalid_argument("ancilla basis must be 'Z' or 'X'");
        }
    }
    SyndromeChannelSet out(code);
    for (const auto &[p, w] : joint) {
        uint64_t m = 0;
        for (size_t j = 0; j < layout.ancillas.size(); j++) {
            const auto &a = layout.ancillas[j];
            uint64_t bits = a.basis == 'Z' ? p.x : p.z;
            m |= ((bits >> a.qubit) & 1) << j;
        }
        uint64_t dx = 0;
        uint64_t dz = 0;
        for (size_t i = 0; i < layout.data_qubits.size(); i++) {
            int q = layout.data_qubits[i];
            dx |= ((p.x >> q) & 1) << i;
            dz |= ((p.z >> q) & 1) << i;
        }
        out.mutable_channel(m).add(PauliOperator(code.n(), dx, dz), w);
    }
    return out;
}

DetectorChannels detector_channels(const SyndromeChannelSet &gadget) {
    const auto &code = gadget.code;
    DetectorChannels out;
    for (const auto &[m1, d1] : gadget.channels) {
        for (const auto &[p1, w1] : d1) {
            uint64_t e1 = code.syndrome_bits(p1);
            for (const auto &[m2, d2] : gadget.channels) {
                uint64_t det = m1 ^ m2 ^ e1;
                auto it = out.find(det);
                if (it == out.end()) {
                    it = out.emplace(det, DetectorChannel{Syndrome(det, code.num_stabilizers()),
                                                          PauliDistribution(code.n())})
                             .first;
                }
                for (const auto &[p2, w2] : d2) {
                    it->second.dist.add(pauli_multiply(p1, p2), w1 * w2);
                }
            }
        }
    }
    return out;
}

PauliDistribution restrict_by_syndrome(
    const PauliDistribution &dist, const Syndrome &e, const StabilizerCode &code) {
    if (e.length != code.num_stabilizers()) {
        throw DimensionError("restrict_by_syndrome: syndrome length mismatch");
    }
    PauliDistribution out(dist.n());
    for (const auto &[p, w] : dist) {
        if (code.syndrome_bits(p) == e.bits) {
            out.add(p, w);
        }
    }
    return out;
}

PauliDistribution compose(const PauliDistribution &a, const PauliDistribution &b) {
    if (a.n() != b.n()) {
        throw DimensionError("compose: qubit count mismatch");
    }
    PauliDistribution out(a.n());
    for (const auto &[p, wp] : a) {
        for (const auto &[q, wq] : b) {
            out.add(pauli_multiply(p, q), wp * wq);
        }
    }
    return out;
}

double LogicalSplit::part_mass(uint64_t pure_error) const {
    auto it = parts.find(pure_error);
    if (it == parts.end()) {
        return 0;
    }
    double total = 0;
    for (const auto &[l, w] : it->second) {
        total += w;
    }
    return total;
}

double LogicalSplit::mass() const {
    double total = 0;
    for (const auto &[e, part] : parts) {
        total += part_mass(e);
    }
    return total;
}

LogicalSplit logical_split(const PauliDistribution &dist, const StabilizerCode &code) {
    LogicalSplit out;
    out.k = code.k();
    for (const auto &[p, w] : dist) {
        CosetLabel label = code.decompose(p);
        uint64_t syn = label.index & (static_cast<uint64_t>(code.num_syndromes()) - 1);
        out.parts[syn][label.index >> code.num_stabilizers()] += w;
    }
    return out;
}

LogicalSplit logical_split(const DetectorChannel &channel, const StabilizerCode &code) {
    return logical_split(channel.dist, code);
}

BoundChannels bound_channels(const LogicalSplit &split) {
    size_t num_logicals = size_t{1} << (2 * split.k);
    double trivial_mass = split.part_mass(0);
    double total = split.mass();
    if (trivial_mass <= 0 || total <= 0) {
        throw UndefinedChannelError("bound channels need nonzero mass with trivial pure error");
    }
    BoundChannels out;
    out.post_selected.assign(num_logicals, 0.0);
    out.ideal_decoder.assign(num_logicals, 0.0);
    out.pure_error_correction.assign(num_logicals, 0.0);
    for (const auto &[l, w] : split.parts.at(0)) {
        out.post_selected[l] += w / trivial_mass;
    }
    for (const auto &[e, part] : split.parts) {
        uint64_t best = 0;
        double best_w = -1;
        for (const auto &[l, w] : part) {
            if (w > best_w) {
                best = l;
                best_w = w;
            }
        }
        out.decoder_relabel.push_back(best);
        for (const auto &[l, w] : part) {
            out.pure_error_correction[l] += w / total;
            out.ideal_decoder[l ^ best] += w / total;
        }
    }
    return out;
}

OverlapResult overlapping_sequence_channel(const SyndromeChannelSet &gadget, int length, size_t state_cap) {
    const auto &code = gadget.code;
    if (length < 0 || length > 64) {
        throw std::invalid_argument("overlapping_sequence_channel: length must be in [0, 64]");
    }
    if (code.num_stabilizers() > 4) {
        throw DimensionError("overlapping_sequence_channel supports n-k <= 4");
    }
    size_t syndromes = static_cast<size_t>(code.num_syndromes());
    size_t cosets = static_cast<size_t>(code.num_cosets());
    if (syndromes * cosets > state_cap) {
        throw DimensionError("overlapping_sequence_channel: state space exceeds cap");
    }
    uint64_t syn_mask = syndromes - 1;

    struct Event {
        uint64_t m;
        uint64_t coset;
        double w;
    };
    std::vector<Event> events;
    for (const auto &[m, d] : gadget.channels) {
        for (const auto &[p, w] : d) {
            events.push_back({m, code.coset_index(p), w});
        }
    }

    // state[s_prev * cosets + c]; cosets compose by XOR of their indices.
    std::vector<double> state(syndromes * cosets, 0.0);
    for (const auto &ev : events) {
        if (ev.m == 0) {
            state[ev.coset] += ev.w;
        }
    }
    for (int step = 0; step < length; step++) {
        std::vector<double> next(state.size(), 0.0);
        for (size_t s_prev = 0; s_prev < syndromes; s_prev++) {
            for (size_t c = 0; c < cosets; c++) {
                double w = state[s_prev * cosets + c];
                if (w == 0) {
                    continue;
                }
                for (const auto &ev : events) {
                    uint64_t s = (c & syn_mask) ^ ev.m;
                    if (s != s_prev) {
                        continue;
                    }
                    next[s * cosets + (c ^ ev.coset)] += w * ev.w;
                }
            }
        }
        state = std::move(next);
    }

    double accepted = 0;
    double trivial_pure_error = 0;
    double identity = 0;
    for (size_t i = 0; i < state.size(); i++) {
        size_t c = i % cosets;
        accepted += state[i];
        if ((c & syn_mask) == 0) {
            trivial_pure_error += state[i];
        }
        if (c == 0) {
            identity += state[i];
        }
    }
    if (trivial_pure_error <= 0) {
        throw UndefinedChannelError("overlapping_sequence_channel: all-zero detectors have zero probability");
    }
    return OverlapResult{identity / trivial_pure_error, accepted};
}

}  // namespace lsd
