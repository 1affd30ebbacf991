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

#include "lsd/circuit.h"

#include <algorithm>
#include <unordered_map>

#include "lsd/rng.h"

namespace lsd {

namespace {

uint64_t bit(int q) { return uint64_t{1} << q; }

void swap_bits(uint64_t &v, int a, int b) {
    uint64_t ba = (v >> a) & 1;
    uint64_t bb = (v >> b) & 1;
    if (ba != bb) {
        v ^= bit(a) | bit(b);
    }
}

Frame local_to_frame(const CircuitOp &op, const PauliOperator &local) {
    Frame f;
    for (size_t i = 0; i < op.qubits.size(); i++) {
        f.x |= ((local.x >> i) & 1) << op.qubits[i];
        f.z |= ((local.z >> i) & 1) << op.qubits[i];
    }
    return f;
}

// Applies one non-error op to a frame, recording measurement flips.
void apply_op(const CircuitOp &op, Frame &f, uint64_t &flips) {
    switch (op.type) {
        case OpType::kPrepZ:
        case OpType::kPrepX:
            f.x &= ~bit(op.qubits[0]);
            f.z &= ~bit(op.qubits[0]);
            break;
        case OpType::kCnot: {
            int c = op.qubits[0];
            int t = op.qubits[1];
            f.x ^= ((f.x >> c) & 1) << t;
            f.z ^= ((f.z >> t) & 1) << c;
            break;
        }
        case OpType::kH: {
            int q = op.qubits[0];
            uint64_t xb = (f.x >> q) & 1;
            uint64_t zb = (f.z >> q) & 1;
            f.x = (f.x & ~bit(q)) | (zb << q);
            f.z = (f.z & ~bit(q)) | (xb << q);
            break;
        }
        case OpType::kSwap:
            swap_bits(f.x, op.qubits[0], op.qubits[1]);
            swap_bits(f.z, op.qubits[0], op.qubits[1]);
            break;
        case OpType::kMeasureZ:
            flips ^= ((f.x >> op.qubits[0]) & 1) << op.bit;
            break;
        case OpType::kMeasureX:
            flips ^= ((f.z >> op.qubits[0]) & 1) << op.bit;
            break;
        case OpType::kError:
            break;
    }
}

PauliOperator extract_data(const CliffordCircuitSpec &circuit, const Frame &f) {
    uint64_t x = 0;
    uint64_t z = 0;
    for (size_t i = 0; i < circuit.data_out.size(); i++) {
        x |= ((f.x >> circuit.data_out[i]) & 1) << i;
        z |= ((f.z >> circuit.data_out[i]) & 1) << i;
    }
    return PauliOperator(static_cast<int>(circuit.data_out.size()), x, z);
}

struct EffectHash {
    size_t operator()(const FrameEffect &e) const {
        return splitmix64(e.flips ^ splitmix64(e.data.x ^ splitmix64(e.data.z)));
    }
};

}  // namespace

CliffordCircuitSpec &CliffordCircuitSpec::prep_z(int q) {
    ops.push_back({OpType::kPrepZ, {q}, -1, {}});
    return *this;
}
CliffordCircuitSpec &CliffordCircuitSpec::prep_x(int q) {
    ops.push_back({OpType::kPrepX, {q}, -1, {}});
    return *this;
}
CliffordCircuitSpec &CliffordCircuitSpec::cnot(int c, int t) {
    ops.push_back({OpType::kCnot, {c, t}, -1, {}});
    return *this;
}
CliffordCircuitSpec &CliffordCircuitSpec::h(int q) {
    ops.push_back({OpType::kH, {q}, -1, {}});
    return *this;
}
CliffordCircuitSpec &CliffordCircuitSpec::swap(int a, int b) {
    ops.push_back({OpType::kSwap, {a, b}, -1, {}});
    return *this;
}
CliffordCircuitSpec &CliffordCircuitSpec::measure_z(int q, int b) {
    ops.push_back({OpType::kMeasureZ, {q}, b, {}});
    return *this;
}
CliffordCircuitSpec &CliffordCircuitSpec::measure_x(int q, int b) {
    ops.push_back({OpType::kMeasureX, {q}, b, {}});
    return *this;
}
CliffordCircuitSpec &CliffordCircuitSpec::error(std::vector<int> qubits, PauliDistribution dist) {
    ops.push_back({OpType::kError, std::move(qubits), -1, std::move(dist)});
    return *this;
}

size_t CliffordCircuitSpec::num_error_locations() const {
    return static_cast<size_t>(
        std::count_if(ops.begin(), ops.end(), [](const CircuitOp &op) { return op.type == OpType::kError; }));
}

void CliffordCircuitSpec::validate() const {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        throw std::invalid_argument("circuit: num_qubits must be in [1, 64]");
    }
    if (data_in.empty() || data_in.size() != data_out.size()) {
        throw std::invalid_argument("circuit: data_in and data_out must be nonempty and equally long");
    }
    if (num_bits < 0 || num_bits > 63) {
        throw std::invalid_argument("circuit: num_bits must be in [0, 63]");
    }
    // 0 = unprepared, 1 = live, 2 = measured.
    std::vector<int> state(num_qubits, 0);
    auto check_q = [&](int q) {
        if (q < 0 || q >= num_qubits) {
            throw std::invalid_argument("circuit: qubit " + std::to_string(q) + " out of range");
        }
    };
    for (int q : data_in) {
        check_q(q);
        if (state[q] != 0) {
            throw std::invalid_argument("circuit: repeated data_in qubit");
        }
        state[q] = 1;
    }
    std::vector<int> written(num_bits, 0);
    for (size_t i = 0; i < ops.size(); i++) {
        const auto &op = ops[i];
        std::string where = "circuit op " + std::to_string(i) + ": ";
        for (int q : op.qubits) {
            check_q(q);
        }
        switch (op.type) {
            case OpType::kPrepZ:
            case OpType::kPrepX:
                if (op.qubits.size() != 1) {
                    throw std::invalid_argument(where + "preparation takes one qubit");
                }
                state[op.qubits[0]] = 1;
                break;
            case OpType::kCnot:
            case OpType::kSwap:
                if (op.qubits.size() != 2 || op.qubits[0] == op.qubits[1]) {
                    throw std::invalid_argument(where + "two-qubit gate needs two distinct qubits");
                }
                for (int q : op.qubits) {
                    if (state[q] != 1) {
                        throw std::invalid_argument(
                            where + "qubit " + std::to_string(q) + " used without preparation");
                    }
                }
                break;
            case OpType::kH:
                if (op.qubits.size() != 1 || state[op.qubits[0]] != 1) {
                    throw std::invalid_argument(where + "H needs one live qubit");
                }
                break;
            case OpType::kMeasureZ:
            case OpType::kMeasureX:
                if (op.qubits.size() != 1 || state[op.qubits[0]] != 1) {
                    throw std::invalid_argument(where + "measurement needs one live qubit");
                }
                if (op.bit < 0 || op.bit >= num_bits) {
                    throw std::invalid_argument(where + "syndrome bit out of range");
                }
                written[op.bit]++;
                state[op.qubits[0]] = 2;
                break;
            case OpType::kError: {
                if (op.qubits.empty() || op.error.n() != static_cast<int>(op.qubits.size())) {
                    throw std::invalid_argument(where + "error distribution must match its qubit list");
                }
                double m = op.error.mass();
                if (m > 1 + 1e-12) {
                    throw std::invalid_argument(where + "error distribution mass exceeds 1");
                }
                break;
            }
        }
    }
    for (int b = 0; b < num_bits; b++) {
        if (written[b] != 1) {
            throw std::invalid_argument("circuit: syndrome bit " + std::to_string(b) + " must be written exactly once");
        }
    }
    for (int q : data_out) {
        check_q(q);
        if (state[q] != 1) {
            throw std::invalid_argument("circuit: data_out qubit " + std::to_string(q) + " is not live at the end");
        }
    }
}

CliffordCircuitSpec with_cnot_depolarizing(const CliffordCircuitSpec &circuit, double p) {
    CliffordCircuitSpec out = circuit;
    out.ops.clear();
    for (const auto &op : circuit.ops) {
        out.ops.push_back(op);
        if (op.type == OpType::kCnot && p > 0) {
            out.error(op.qubits, PauliDistribution::depolarizing(2, p));
        }
    }
    return out;
}

CliffordCircuitSpec flag_gadget_2_1_1() {
    CliffordCircuitSpec c;
    c.num_qubits = 3;
    c.num_bits = 1;
    c.data_in = {0, 1};
    c.data_out = {0, 1};
    c.prep_z(2).cnot(0, 2).cnot(1, 2).measure_z(2, 0);
    return c;
}

CliffordCircuitSpec lp_gadget_2_1_1(bool keep_first) {
    CliffordCircuitSpec c;
    c.num_qubits = 3;
    c.num_bits = 1;
    c.data_in = {0, 1};
    int keep = keep_first ? 0 : 1;
    int move = keep_first ? 1 : 0;
    c.prep_z(2).cnot(keep, 2).cnot(2, move).cnot(move, 2).measure_z(move, 0);
    c.data_out = keep_first ? std::vector<int>{0, 2} : std::vector<int>{2, 1};
    return c;
}

CliffordCircuitSpec flag_gadget_4_2_2() {
    CliffordCircuitSpec c;
    c.num_qubits = 6;
    c.num_bits = 2;
    c.data_in = {0, 1, 2, 3};
    c.data_out = {0, 1, 2, 3};
    c.prep_z(4).prep_x(5);
    c.cnot(5, 0).cnot(1, 4).cnot(0, 4).cnot(5, 1).cnot(3, 4).cnot(5, 2).cnot(2, 4).cnot(5, 3);
    c.measure_x(5, 0).measure_z(4, 1);
    return c;
}

CliffordCircuitSpec lp_gadget_4_2_2() {
    CliffordCircuitSpec c;
    c.num_qubits = 6;
    c.num_bits = 2;
    c.data_in = {0, 1, 2, 3};
    c.data_out = {0, 1, 4, 5};
    c.prep_z(4).prep_x(5);
    c.cnot(5, 0).cnot(1, 4).cnot(0, 4).cnot(5, 1).cnot(3, 4).cnot(5, 2);
    c.cnot(3, 5).cnot(4, 2).cnot(5, 3).cnot(2, 4);
    c.measure_x(3, 0).measure_z(2, 1);
    return c;
}

CliffordCircuitSpec builtin_circuit(const std::string &name) {
    if (name == "flag_2_1_1") {
        return flag_gadget_2_1_1();
    }
    if (name == "lp_2_1_1") {
        return lp_gadget_2_1_1(true);
    }
    if (name == "flag_4_2_2") {
        return flag_gadget_4_2_2();
    }
    if (name == "lp_4_2_2") {
        return lp_gadget_4_2_2();
    }
    throw std::invalid_argument(
        "unknown builtin circuit '" + name + "' (known: flag_2_1_1, lp_2_1_1, flag_4_2_2, lp_4_2_2)");
}

FrameEffect propagate_frame(const CliffordCircuitSpec &circuit, size_t start, Frame frame) {
    uint64_t flips = 0;
    for (size_t i = start; i < circuit.ops.size(); i++) {
        apply_op(circuit.ops[i], frame, flips);
    }
    return FrameEffect{flips, extract_data(circuit, frame)};
}

FrameEffect propagate_incoming(const CliffordCircuitSpec &circuit, const PauliOperator &data_error) {
    Frame f;
    for (size_t i = 0; i < circuit.data_in.size(); i++) {
        f.x |= ((data_error.x >> i) & 1) << circuit.data_in[i];
        f.z |= ((data_error.z >> i) & 1) << circuit.data_in[i];
    }
    return propagate_frame(circuit, 0, f);
}

void check_gadget_circuit(const CliffordCircuitSpec &circuit, const StabilizerCode &code) {
    circuit.validate();
    if (static_cast<int>(circuit.data_in.size()) != code.n() || circuit.num_bits != code.num_stabilizers()) {
        throw InvariantError("circuit does not match the code's qubit and syndrome counts");
    }
    for (int i = 0; i < code.n(); i++) {
        for (int kind = 0; kind < 2; kind++) {
            PauliOperator e(code.n(), kind == 0 ? bit(i) : 0, kind == 1 ? bit(i) : 0);
            FrameEffect eff = propagate_incoming(circuit, e);
            if (eff.flips != code.syndrome_bits(e)) {
                throw InvariantError("incoming " + e.str() + " does not flip its syndrome");
            }
            if (!code.stabilizer_coefficients(pauli_multiply(eff.data, e)).has_value()) {
                throw InvariantError("incoming " + e.str() + " leaves as " + eff.data.str());
            }
        }
    }
    // Heisenberg picture: each measured observable pulled back to the start
    // must be a stabilizer of the code space times the ancilla preparations.
    for (size_t mi = 0; mi < circuit.ops.size(); mi++) {
        const auto &m = circuit.ops[mi];
        if (m.type != OpType::kMeasureZ && m.type != OpType::kMeasureX) {
            continue;
        }
        Frame obs;
        (m.type == OpType::kMeasureZ ? obs.z : obs.x) = bit(m.qubits[0]);
        for (size_t j = mi; j-- > 0;) {
            const auto &op = circuit.ops[j];
            int q = op.qubits.empty() ? 0 : op.qubits[0];
            if (op.type == OpType::kPrepZ || op.type == OpType::kPrepX) {
                bool bad = op.type == OpType::kPrepZ ? ((obs.x >> q) & 1) : ((obs.z >> q) & 1);
                if (bad) {
                    throw InvariantError("measurement " + std::to_string(m.bit) + " is not deterministic");
                }
                obs.x &= ~bit(q);
                obs.z &= ~bit(q);
            } else if (op.type == OpType::kMeasureZ || op.type == OpType::kMeasureX) {
                continue;
            } else {
                uint64_t ignored = 0;
                apply_op(op, obs, ignored);
            }
        }
        uint64_t dx = 0;
        uint64_t dz = 0;
        uint64_t data_mask = 0;
        for (size_t i = 0; i < circuit.data_in.size(); i++) {
            int q = circuit.data_in[i];
            data_mask |= bit(q);
            dx |= ((obs.x >> q) & 1) << i;
            dz |= ((obs.z >> q) & 1) << i;
        }
        if (((obs.x | obs.z) & ~data_mask) ||
            !code.stabilizer_coefficients(PauliOperator(code.n(), dx, dz)).has_value()) {
            throw InvariantError("measurement " + std::to_string(m.bit) + " does not measure a stabilizer");
        }
    }
}

PropagationResult propagate_circuit_noise(
    const CliffordCircuitSpec &circuit, const StabilizerCode &code, const PropagationOptions &options) {
    circuit.validate();
    if (static_cast<int>(circuit.data_out.size()) != code.n() || circuit.num_bits != code.num_stabilizers()) {
        throw std::invalid_argument("circuit does not match the code's qubit and syndrome counts");
    }
    std::unordered_map<FrameEffect, double, EffectHash> acc;
    acc[FrameEffect{0, PauliOperator::identity(code.n())}] = 1.0;
    double dropped = 0;
    size_t max_support = 1;
    for (size_t i = 0; i < circuit.ops.size(); i++) {
        const auto &op = circuit.ops[i];
        if (op.type != OpType::kError) {
            continue;
        }
        std::unordered_map<FrameEffect, double, EffectHash> local;
        double local_mass = 0;
        for (const auto &[p, w] : op.error) {
            local[propagate_frame(circuit, i + 1, local_to_frame(op, p))] += w;
            local_mass += w;
        }
        // Missing mass at a location means "no error".
        if (local_mass < 1) {
            local[FrameEffect{0, PauliOperator::identity(code.n())}] += 1 - local_mass;
        }
        std::unordered_map<FrameEffect, double, EffectHash> next;
        for (const auto &[a, wa] : acc) {
            for (const auto &[b, wb] : local) {
                FrameEffect c{a.flips ^ b.flips, pauli_multiply(a.data, b.data)};
                next[c] += wa * wb;
            }
        }
        if (next.size() > options.support_cap) {
            if (!options.allow_truncation) {
                throw std::length_error("propagate_circuit_noise: support exceeds cap; enable truncation");
            }
            std::vector<std::pair<FrameEffect, double>> items(next.begin(), next.end());
            std::nth_element(items.begin(), items.begin() + options.support_cap, items.end(),
                             [](const auto &l, const auto &r) { return l.second > r.second; });
            for (size_t j = options.support_cap; j < items.size(); j++) {
                dropped += items[j].second;
            }
            items.resize(options.support_cap);
            next = std::unordered_map<FrameEffect, double, EffectHash>(items.begin(), items.end());
        }
        max_support = std::max(max_support, next.size());
        acc = std::move(next);
    }
    PropagationResult out{SyndromeChannelSet(code), dropped, max_support};
    std::vector<std::pair<FrameEffect, double>> sorted(acc.begin(), acc.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto &[eff, w] : sorted) {
        out.channels.mutable_channel(eff.flips).add(eff.data, w);
    }
    return out;
}

SyndromeChannelSet sample_circuit_noise(
    const CliffordCircuitSpec &circuit, const StabilizerCode &code, uint64_t samples, uint64_t seed) {
    circuit.validate();
    std::vector<DiscreteSampler<PauliOperator>> samplers(circuit.ops.size());
    for (size_t i = 0; i < circuit.ops.size(); i++) {
        const auto &op = circuit.ops[i];
        if (op.type != OpType::kError) {
            continue;
        }
        double m = 0;
        for (const auto &[p, w] : op.error) {
            samplers[i].add(p, w);
            m += w;
        }
        if (m < 1) {
            samplers[i].add(PauliOperator::identity(op.error.n()), 1 - m);
        }
    }
    std::map<FrameEffect, uint64_t> counts;
    for (uint64_t s = 0; s < samples; s++) {
        Rng rng(seed, kStreamCircuitSample, s);
        Frame f;
        uint64_t flips = 0;
        for (size_t i = 0; i < circuit.ops.size(); i++) {
            const auto &op = circuit.ops[i];
            if (op.type == OpType::kError) {
                Frame e = local_to_frame(op, samplers[i].sample(rng));
                f.x ^= e.x;
                f.z ^= e.z;
            } else {
                apply_op(op, f, flips);
            }
        }
        counts[FrameEffect{flips, extract_data(circuit, f)}]++;
    }
    SyndromeChannelSet out(code);
    for (const auto &[eff, c] : counts) {
        out.mutable_channel(eff.flips).add(eff.data, static_cast<double>(c) / static_cast<double>(samples));
    }
    return out;
}

}  // namespace lsd
