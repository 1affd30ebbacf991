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

#include "lsd/simulator.h"

#include <cmath>
#include <sstream>

#include "lsd/leakage.h"
#include "lsd/parallel.h"
#include "lsd/transform.h"

namespace lsd {

namespace {

// Adds the identity remainder so sampling and eigenvalues see a full channel.
PauliDistribution completed(const PauliDistribution &dist, int n) {
    if (dist.n() == 0 && dist.empty()) {
        return PauliDistribution::point(PauliOperator::identity(n));
    }
    if (dist.n() != n) {
        throw ConfigError("SPAM channel acts on " + std::to_string(dist.n()) + " qubits, code has " +
                          std::to_string(n));
    }
    PauliDistribution out = dist;
    double m = dist.mass();
    if (m > 1 + 1e-9) {
        throw ConfigError("SPAM channel mass exceeds 1");
    }
    if (m < 1) {
        out.add(PauliOperator::identity(n), 1 - m);
    }
    return out;
}

DiscreteSampler<PauliOperator> sampler_of(const PauliDistribution &dist) {
    DiscreteSampler<PauliOperator> s;
    for (const auto &[p, w] : dist) {
        s.add(p, w);
    }
    return s;
}

uint64_t stabilizer_outcomes(const StabilizerCode &code, const PauliOperator &frame) {
    return code.syndrome_bits(frame);
}

}  // namespace

SyndromeChannelSet resolve_gadget(const NoisyGadgetSpec &spec, const StabilizerCode &code) {
    switch (spec.kind) {
        case GadgetKind::kPhenomenological: {
            if (code.id() != "2_1_1") {
                throw ConfigError("phenomenological gadget is defined for code 2_1_1 only");
            }
            return phenomenological_gadget(spec.p, spec.q);
        }
        case GadgetKind::kJointDistribution: {
            auto out = reduce_joint_to_syndrome_channels(spec.joint, spec.layout, code);
            out.validate(1e-9);
            return out;
        }
        case GadgetKind::kCircuit: {
            CliffordCircuitSpec c = spec.circuit_name.empty() ? spec.circuit : builtin_circuit(spec.circuit_name);
            c = with_cnot_depolarizing(c, spec.cnot_depolarizing);
            check_gadget_circuit(c, code);
            auto out = propagate_circuit_noise(c, code).channels;
            out.validate(1e-9);
            return out;
        }
        case GadgetKind::kChannels: {
            if (!spec.channels) {
                throw ConfigError("channels gadget has no channel table");
            }
            if (spec.channels->code.id() != code.id()) {
                throw ConfigError("channel table is for code " + spec.channels->code.id());
            }
            spec.channels->validate(1e-9);
            return *spec.channels;
        }
    }
    throw ConfigError("unknown gadget kind");
}

std::string Setting::label() const {
    std::string out;
    for (size_t i = 0; i < factors.size(); i++) {
        if (i) {
            out += ',';
        }
        out += factors[i].str();
    }
    return out;
}

PauliOperator Setting::product() const {
    PauliOperator p = PauliOperator::identity(factors.at(0).n);
    for (const auto &f : factors) {
        p = pauli_multiply(p, f);
    }
    return p;
}

Setting make_setting(const StabilizerCode &code, const std::string &logical_axes) {
    int k = code.k();
    if (static_cast<int>(logical_axes.size()) != k) {
        throw ConfigError("setting '" + logical_axes + "' needs one axis per logical qubit");
    }
    Setting s;
    for (int i = 0; i < k; i++) {
        uint64_t bits = 0;
        switch (logical_axes[i]) {
            case 'X':
                bits = uint64_t{1} << i;
                break;
            case 'Z':
                bits = uint64_t{1} << (k + i);
                break;
            case 'Y':
                bits = (uint64_t{1} << i) | (uint64_t{1} << (k + i));
                break;
            default:
                throw ConfigError("setting axis must be X, Y or Z, got '" + logical_axes + "'");
        }
        s.factor_logical_bits.push_back(bits);
        s.factors.push_back(code.logical_from_bits(bits));
    }
    return s;
}

Setting setting_from_label(const StabilizerCode &code, const std::string &label) {
    std::vector<std::string> parts;
    std::stringstream ss(label);
    std::string item;
    while (std::getline(ss, item, ',')) {
        parts.push_back(item);
    }
    if (static_cast<int>(parts.size()) != code.k()) {
        throw ConfigError("setting label '" + label + "' has the wrong number of factors");
    }
    std::string axes;
    for (int i = 0; i < code.k(); i++) {
        PauliOperator p = PauliOperator::from_string(parts[i]);
        bool matched = false;
        for (char a : {'X', 'Y', 'Z'}) {
            uint64_t bits = a == 'X'   ? uint64_t{1} << i
                            : a == 'Z' ? uint64_t{1} << (code.k() + i)
                                       : (uint64_t{1} << i) | (uint64_t{1} << (code.k() + i));
            if (code.logical_from_bits(bits) == p) {
                axes += a;
                matched = true;
                break;
            }
        }
        if (!matched) {
            throw ConfigError("setting factor '" + parts[i] + "' is not a canonical logical");
        }
    }
    return make_setting(code, axes);
}

std::vector<SettingPlan> plan_settings(const StabilizerCode &code) {
    int k = code.k();
    size_t total = 1;
    for (int i = 0; i < k; i++) {
        total *= 3;
    }
    std::vector<SettingPlan> out;
    for (size_t t = 0; t < total; t++) {
        std::string axes(k, 'X');
        size_t v = t;
        for (int i = 0; i < k; i++) {
            axes[i] = "XYZ"[v % 3];
            v /= 3;
        }
        SettingPlan plan{make_setting(code, axes), {}};
        for (uint64_t b = 1; b < (uint64_t{1} << k); b++) {
            PauliOperator lb = PauliOperator::identity(code.n());
            for (int i = 0; i < k; i++) {
                if ((b >> i) & 1) {
                    lb = pauli_multiply(lb, plan.setting.factors[i]);
                }
            }
            for (uint64_t a = 0; a < static_cast<uint64_t>(code.num_syndromes()); a++) {
                plan.observables.push_back(pauli_multiply(lb, code.stabilizer_from_bits(a)));
            }
        }
        out.push_back(std::move(plan));
    }
    return out;
}

std::optional<Readout> readout_of(const StabilizerCode &code, const Setting &setting, const PauliOperator &q) {
    if (q.n != code.n() || code.syndrome_bits(q) != 0) {
        return std::nullopt;
    }
    uint64_t qbits = code.logical_bits(q);
    int k = code.k();
    for (uint64_t b = 0; b < (uint64_t{1} << k); b++) {
        uint64_t bits = 0;
        PauliOperator lb = PauliOperator::identity(code.n());
        for (int i = 0; i < k; i++) {
            if ((b >> i) & 1) {
                bits ^= setting.factor_logical_bits[i];
                lb = pauli_multiply(lb, setting.factors[i]);
            }
        }
        if (bits != qbits) {
            continue;
        }
        auto a = code.stabilizer_coefficients(pauli_multiply(q, lb));
        if (a) {
            return Readout{b, *a};
        }
    }
    return std::nullopt;
}

std::map<uint64_t, int> ShotRecord::detector_counts() const {
    std::map<uint64_t, int> out;
    for (uint64_t d : detectors) {
        out[d]++;
    }
    return out;
}

Experiment::Experiment(ExperimentConfig config)
    : config_(std::move(config)), code_(builtin_code(config_.code_id)) {
    const auto &c = config_;
    if (c.lengths.size() != c.shots_per_length.size()) {
        throw ConfigError("lengths and shots_per_length must have the same size");
    }
    for (int r : c.lengths) {
        if (r < 1 || r > 100000) {
            throw ConfigError("sequence lengths must be positive");
        }
    }
    if (!(c.spam.readout_offset_eta >= 0 && c.spam.readout_offset_eta < 1)) {
        throw ConfigError("readout_offset_eta must lie in [0, 1)");
    }
    if (c.pfr.enabled && c.pfr.frames < 1) {
        throw ConfigError("pfr.frames must be at least 1");
    }
    if (c.copies < 1) {
        throw ConfigError("copies must be at least 1");
    }
    if (c.leakage.enabled) {
        if (code_.id() != "2_1_1" || c.gadget.kind != GadgetKind::kCircuit) {
            throw ConfigError("leakage simulation needs the 2_1_1 code with a circuit gadget");
        }
        std::string want = c.lp ? "lp_2_1_1" : "flag_2_1_1";
        if (c.gadget.circuit_name != want) {
            throw ConfigError("leakage simulation with lp=" + std::string(c.lp ? "true" : "false") +
                              " needs builtin circuit " + want);
        }
        if (!(c.leakage.per_gate_rate >= 0 && c.leakage.per_gate_rate <= 1)) {
            throw ConfigError("leakage.per_gate_rate must lie in [0, 1]");
        }
        if (c.leakage.kick.n() != 1 || std::abs(c.leakage.kick.mass() - 1) > 1e-9) {
            throw ConfigError("leakage.kick must be a normalized single-qubit distribution");
        }
    }
    gadget_ = std::make_shared<const SyndromeChannelSet>(resolve_gadget(c.gadget, code_));
    if (c.settings.empty()) {
        for (auto &plan : plan_settings(code_)) {
            settings_.push_back(plan.setting);
        }
    } else {
        for (const auto &axes : c.settings) {
            settings_.push_back(make_setting(code_, axes));
        }
    }
    for (const auto &[m, d] : gadget_->channels) {
        for (const auto &[p, w] : d) {
            events_.add(GadgetEvent{m, p}, w);
        }
    }
    prep_ = sampler_of(completed(c.spam.prep, code_.n()));
    meas_ = sampler_of(completed(c.spam.meas, code_.n()));
}

uint64_t Experiment::total_shots() const {
    uint64_t per_copy = 0;
    for (uint64_t s : config_.shots_per_length) {
        per_copy += s;
    }
    return per_copy * settings_.size() * static_cast<uint64_t>(config_.copies);
}

uint64_t Experiment::shot_offset(int setting, int copy, size_t length_pos) const {
    uint64_t per_copy = 0;
    for (uint64_t s : config_.shots_per_length) {
        per_copy += s;
    }
    uint64_t offset = (static_cast<uint64_t>(setting) * config_.copies + copy) * per_copy;
    for (size_t i = 0; i < length_pos; i++) {
        offset += config_.shots_per_length[i];
    }
    return offset;
}

PauliOperator Experiment::pfr_frame(int frame, int setting, int r, int gadget) const {
    uint64_t index = (static_cast<uint64_t>(setting) << 48) ^ (static_cast<uint64_t>(r) << 24) ^
                     static_cast<uint64_t>(gadget);
    uint64_t key = derive_key(config_.seed, kStreamFrame, static_cast<uint64_t>(frame));
    uint64_t bx = splitmix64(key ^ splitmix64(2 * index));
    uint64_t bz = splitmix64(key ^ splitmix64(2 * index + 1));
    uint64_t mask = code_.n() == 64 ? ~uint64_t{0} : (uint64_t{1} << code_.n()) - 1;
    return PauliOperator(code_.n(), bx & mask, bz & mask);
}

ShotRecord run_shot(const Experiment &exp, int setting, int copy, int r, uint64_t shot_index) {
    const auto &code = exp.code();
    const auto &cfg = exp.config();
    if (setting < 0 || setting >= static_cast<int>(exp.settings().size())) {
        throw ConfigError("setting index out of range");
    }
    if (cfg.leakage.enabled) {
        return run_leakage_circuit_shot(exp, setting, copy, r, shot_index);
    }
    Rng rng(cfg.seed, kStreamShot, shot_index);
    ShotRecord rec;
    rec.setting = setting;
    rec.copy = copy;
    rec.r = r;
    rec.shot_index = shot_index;
    rec.syndromes.reserve(2 * r);
    rec.detectors.reserve(r);
    if (cfg.pfr.enabled) {
        rec.frame_id = static_cast<int>(shot_index % static_cast<uint64_t>(cfg.pfr.frames));
    }

    PauliOperator frame = exp.prep_sampler().sample(rng);
    for (int g = 0; g < 2 * r; g++) {
        PauliOperator pfr;
        if (cfg.pfr.enabled) {
            pfr = exp.pfr_frame(rec.frame_id, setting, r, g);
            frame = pauli_multiply(frame, pfr);
        }
        const auto &ev = exp.event_sampler().sample(rng);
        uint64_t s = code.syndrome_bits(frame) ^ ev.m;
        if (cfg.pfr.enabled) {
            s ^= code.syndrome_bits(pfr);
            frame = pauli_multiply(frame, pfr);
        }
        frame = pauli_multiply(frame, ev.error);
        rec.syndromes.push_back(s);
    }
    for (int i = 0; i < r; i++) {
        rec.detectors.push_back(rec.syndromes[2 * i] ^ rec.syndromes[2 * i + 1]);
    }
    frame = pauli_multiply(frame, exp.meas_sampler().sample(rng));
    bool offset_event = rng.uniform() < cfg.spam.readout_offset_eta;
    if (!offset_event) {
        const auto &factors = exp.settings()[setting].factors;
        for (size_t i = 0; i < factors.size(); i++) {
            rec.final_l |= static_cast<uint64_t>(symplectic_product(frame, factors[i])) << i;
        }
        rec.final_o = stabilizer_outcomes(code, frame);
    }
    return rec;
}

namespace {

struct ShotTask {
    int setting;
    int copy;
    int r;
    uint64_t index;
};

std::vector<ShotTask> shot_tasks(const Experiment &exp) {
    std::vector<ShotTask> tasks;
    tasks.reserve(exp.total_shots());
    const auto &cfg = exp.config();
    for (int s = 0; s < static_cast<int>(exp.settings().size()); s++) {
        for (int c = 0; c < cfg.copies; c++) {
            for (size_t li = 0; li < cfg.lengths.size(); li++) {
                uint64_t base = exp.shot_offset(s, c, li);
                for (uint64_t j = 0; j < cfg.shots_per_length[li]; j++) {
                    tasks.push_back({s, c, cfg.lengths[li], base + j});
                }
            }
        }
    }
    return tasks;
}

}  // namespace

std::vector<ShotRecord> run_experiment(const Experiment &exp) {
    auto tasks = shot_tasks(exp);
    std::vector<ShotRecord> out(tasks.size());
    const int64_t count = static_cast<int64_t>(tasks.size());
    LSD_OMP_PARALLEL_FOR_DYNAMIC
    for (int64_t i = 0; i < count; i++) {
        const auto &t = tasks[i];
        out[i] = run_shot(exp, t.setting, t.copy, t.r, t.index);
    }
    return out;
}

std::vector<ShotRecord> run_experiment_serial(const Experiment &exp) {
    auto tasks = shot_tasks(exp);
    std::vector<ShotRecord> out;
    out.reserve(tasks.size());
    for (const auto &t : tasks) {
        out.push_back(run_shot(exp, t.setting, t.copy, t.r, t.index));
    }
    return out;
}

int derived_q(const ShotRecord &record, const Readout &readout) {
    return parity(record.final_l & readout.logical_subset) ^ parity(record.final_o & readout.stabilizer_bits);
}

std::pair<double, double> spam_coefficients(const SpamModel &spam, const PauliOperator &q) {
    double prep = eigenvalue_of_distribution(completed(spam.prep, q.n), q);
    double meas = eigenvalue_of_distribution(completed(spam.meas, q.n), q);
    double eta = spam.readout_offset_eta;
    return {(1 - eta) * prep * meas, eta};
}

double exact_expectation(const SyndromeChannelSet &gadget,
                         const SpamModel &spam,
                         const PauliOperator &q,
                         const std::map<uint64_t, int> &detector_counts) {
    return exact_expectation(detector_channels(gadget), gadget.code.num_stabilizers(), spam, q, detector_counts);
}

double exact_expectation(const DetectorChannels &detectors,
                         int num_stabilizers,
                         const SpamModel &spam,
                         const PauliOperator &q,
                         const std::map<uint64_t, int> &detector_counts) {
    auto [a, b] = spam_coefficients(spam, q);
    double product = 1;
    for (const auto &[d, count] : detector_counts) {
        if (count == 0) {
            continue;
        }
        auto it = detectors.find(d);
        double p = it == detectors.end() ? 0 : it->second.probability();
        if (p <= 0) {
            throw ZeroProbabilityCondition("detector value " + bits_to_string(d, num_stabilizers) +
                                           " has zero probability");
        }
        product *= std::pow(eigenvalue_of_distribution(it->second.dist, q) / p, count);
    }
    return a * product + b;
}

double brute_force_expectation(const SyndromeChannelSet &gadget,
                               const SpamModel &spam,
                               const PauliOperator &q,
                               const std::vector<uint64_t> &detector_sequence,
                               size_t state_cap) {
    return brute_force_expectations(gadget, spam, {q}, detector_sequence, state_cap).front();
}

std::vector<double> brute_force_expectations(const SyndromeChannelSet &gadget,
                                             const SpamModel &spam,
                                             const std::vector<PauliOperator> &qs,
                                             const std::vector<uint64_t> &detector_sequence,
                                             size_t state_cap) {
    const auto &code = gadget.code;
    int n = code.n();
    if (n > 8) {
        throw DimensionError("brute_force_expectation supports n <= 8");
    }
    size_t frames = size_t{1} << (2 * n);
    size_t syndromes = static_cast<size_t>(code.num_syndromes());
    if (frames * syndromes > state_cap) {
        throw DimensionError("brute_force_expectation: state space exceeds cap");
    }
    struct Event {
        uint64_t m;
        uint64_t e;
        uint64_t dense;
        double w;
    };
    std::vector<Event> events;
    for (const auto &[m, d] : gadget.channels) {
        for (const auto &[p, w] : d) {
            events.push_back({m, code.syndrome_bits(p), p.dense_index(), w});
        }
    }
    // Dense indices compose by XOR because x and z occupy disjoint bits.
    std::vector<double> weights(frames, 0.0);
    for (const auto &[p, w] : completed(spam.prep, n)) {
        weights[p.dense_index()] += w;
    }
    for (uint64_t target : detector_sequence) {
        // After the first gadget of the region: (frame, m1 xor e1).
        std::vector<double> mid(frames * syndromes, 0.0);
        for (size_t f = 0; f < frames; f++) {
            if (weights[f] == 0) {
                continue;
            }
            for (const auto &ev : events) {
                mid[(f ^ ev.dense) * syndromes + (ev.m ^ ev.e)] += weights[f] * ev.w;
            }
        }
        std::vector<double> next(frames, 0.0);
        for (size_t f = 0; f < frames; f++) {
            for (size_t pending = 0; pending < syndromes; pending++) {
                double w = mid[f * syndromes + pending];
                if (w == 0) {
                    continue;
                }
                for (const auto &ev : events) {
                    if ((pending ^ ev.m) == target) {
                        next[f ^ ev.dense] += w * ev.w;
                    }
                }
            }
        }
        weights = std::move(next);
    }
    auto meas = completed(spam.meas, n);
    std::vector<double> numerator(qs.size(), 0.0);
    double denominator = 0;
    for (size_t f = 0; f < frames; f++) {
        if (weights[f] == 0) {
            continue;
        }
        for (const auto &[p, w] : meas) {
            PauliOperator fin = PauliOperator::from_dense_index(n, f ^ p.dense_index());
            for (size_t j = 0; j < qs.size(); j++) {
                double sign = symplectic_product(fin, qs[j]) ? -1.0 : 1.0;
                numerator[j] += weights[f] * w * sign;
            }
            denominator += weights[f] * w;
        }
    }
    if (denominator <= 0) {
        throw ZeroProbabilityCondition("detector sequence has zero probability");
    }
    double eta = spam.readout_offset_eta;
    std::vector<double> out;
    for (double num : numerator) {
        out.push_back((1 - eta) * num / denominator + eta);
    }
    return out;
}

}  // namespace lsd
