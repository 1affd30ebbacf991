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


#include "lsd/leakage.h"

#include <array>

namespace lsd {

namespace {

struct LeakyGadget {
    CliffordCircuitSpec circuit;
    std::vector<DiscreteSampler<PauliOperator>> samplers;
    int measured_role = -1;
};

LeakyGadget prepare_gadget(const CliffordCircuitSpec &base, double cnot_p) {
    LeakyGadget g{with_cnot_depolarizing(base, cnot_p), {}, -1};
    g.samplers.resize(g.circuit.ops.size());
    for (size_t i = 0; i < g.circuit.ops.size(); i++) {
        const auto &op = g.circuit.ops[i];
        if (op.type == OpType::kError) {
            double m = 0;
            for (const auto &[p, w] : op.error) {
                g.samplers[i].add(p, w);
                m += w;
            }
            if (m < 1) {
                g.samplers[i].add(PauliOperator::identity(op.error.n()), 1 - m);
            }
        }
    }
    for (int q = 0; q < 3; q++) {
        if (q != g.circuit.data_out[0] && q != g.circuit.data_out[1]) {
            g.measured_role = q;
        }
    }
    return g;
}

uint64_t bit(int q) { return uint64_t{1} << q; }

}  // namespace

std::vector<int> lp_measured_qubits(int gadgets) {
    LeakyGadget a = prepare_gadget(lp_gadget_2_1_1(true), 0);
    LeakyGadget b = prepare_gadget(lp_gadget_2_1_1(false), 0);
    std::array<int, 3> phys{0, 1, 2};
    std::vector<int> out;
    for (int g = 0; g < gadgets; g++) {
        const LeakyGadget &gad = g % 2 == 0 ? a : b;
        out.push_back(phys[gad.measured_role]);
        phys = {phys[gad.circuit.data_out[0]], phys[gad.circuit.data_out[1]], phys[gad.measured_role]};
    }
    return out;
}

ShotRecord run_leakage_circuit_shot(const Experiment &exp, int setting, int copy, int r, uint64_t shot_index) {
    const auto &cfg = exp.config();
    if (!cfg.leakage.enabled) {
        throw ConfigError("run_leakage_circuit_shot needs leakage.enabled");
    }
    if (cfg.pfr.enabled) {
        throw ConfigError("leakage simulation does not support pfr");
    }
    const auto &code = exp.code();
    double cnot_p = cfg.gadget.cnot_depolarizing;
    std::vector<LeakyGadget> variants;
    if (cfg.lp) {
        variants.push_back(prepare_gadget(lp_gadget_2_1_1(true), cnot_p));
        variants.push_back(prepare_gadget(lp_gadget_2_1_1(false), cnot_p));
    } else {
        variants.push_back(prepare_gadget(flag_gadget_2_1_1(), cnot_p));
    }
    DiscreteSampler<PauliOperator> kick;
    for (const auto &[p, w] : cfg.leakage.kick) {
        kick.add(p, w);
    }
    const double rate = cfg.leakage.per_gate_rate;

    Rng rng(cfg.seed, kStreamShot, shot_index);
    ShotRecord rec;
    rec.setting = setting;
    rec.copy = copy;
    rec.r = r;
    rec.shot_index = shot_index;

    // Roles 0, 1 hold the data, role 2 the spare ancilla.
    std::array<int, 3> phys{0, 1, 2};
    std::array<bool, 3> leaked{false, false, false};
    Frame f;
    auto put_data = [&](const PauliOperator &p) {
        for (int i = 0; i < 2; i++) {
            f.x ^= ((p.x >> i) & 1) << phys[i];
            f.z ^= ((p.z >> i) & 1) << phys[i];
        }
    };
    put_data(exp.prep_sampler().sample(rng));

    for (int g = 0; g < 2 * r; g++) {
        const LeakyGadget &gad = variants[cfg.lp ? g % 2 : 0];
        uint64_t outcome = 0;
        for (size_t i = 0; i < gad.circuit.ops.size(); i++) {
            const auto &op = gad.circuit.ops[i];
            switch (op.type) {
                case OpType::kPrepZ:
                case OpType::kPrepX: {
                    int q = phys[op.qubits[0]];
                    f.x &= ~bit(q);
                    f.z &= ~bit(q);
                    leaked[q] = false;
                    break;
                }
                case OpType::kCnot: {
                    int c = phys[op.qubits[0]];
                    int t = phys[op.qubits[1]];
                    if (leaked[c] || leaked[t]) {
                        for (int q : {c, t}) {
                            if (!leaked[q]) {
                                const auto &k = kick.sample(rng);
                                f.x ^= (k.x & 1) << q;
                                f.z ^= (k.z & 1) << q;
                            }
                        }
                    } else {
                        f.x ^= ((f.x >> c) & 1) << t;
                        f.z ^= ((f.z >> t) & 1) << c;
                    }
                    for (int q : {c, t}) {
                        if (rng.uniform() < rate) {
                            leaked[q] = true;
                        }
                    }
                    break;
                }
                case OpType::kError: {
                    const auto &p = gad.samplers[i].sample(rng);
                    for (size_t j = 0; j < op.qubits.size(); j++) {
                        int q = phys[op.qubits[j]];
                        f.x ^= ((p.x >> j) & 1) << q;
                        f.z ^= ((p.z >> j) & 1) << q;
                    }
                    break;
                }
                case OpType::kMeasureZ:
                case OpType::kMeasureX: {
                    int q = phys[op.qubits[0]];
                    uint64_t v = op.type == OpType::kMeasureZ ? (f.x >> q) & 1 : (f.z >> q) & 1;
                    if (leaked[q]) {
                        v = 1;
                    }
                    outcome |= v << op.bit;
                    break;
                }
                case OpType::kH:
                case OpType::kSwap:
                    throw ConfigError("leakage simulation supports CNOT-only gadgets");
            }
        }
        rec.syndromes.push_back(outcome);
        phys = {phys[gad.circuit.data_out[0]], phys[gad.circuit.data_out[1]], phys[gad.measured_role]};
    }
    for (int i = 0; i < r; i++) {
        rec.detectors.push_back(rec.syndromes[2 * i] ^ rec.syndromes[2 * i + 1]);
    }

    put_data(exp.meas_sampler().sample(rng));
    bool offset_event = rng.uniform() < cfg.spam.readout_offset_eta;
    if (leaked[phys[0]] || leaked[phys[1]]) {
        rec.final_l = (uint64_t{1} << code.k()) - 1;
        rec.final_o = (uint64_t{1} << code.num_stabilizers()) - 1;
    } else if (!offset_event) {
        PauliOperator data(2, ((f.x >> phys[0]) & 1) | (((f.x >> phys[1]) & 1) << 1),
                           ((f.z >> phys[0]) & 1) | (((f.z >> phys[1]) & 1) << 1));
        const auto &factors = exp.settings()[setting].factors;
        for (size_t i = 0; i < factors.size(); i++) {
            rec.final_l |= static_cast<uint64_t>(symplectic_product(data, factors[i])) << i;
        }
        rec.final_o = code.syndrome_bits(data);
    }
    return rec;
}

}  // namespace lsd
