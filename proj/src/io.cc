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


#include "lsd/io.h"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "lsd/presets.h"

namespace lsd {

namespace {

[[noreturn]] void fail(const std::string &path, const std::string &what) { throw ConfigError(path + ": " + what); }

const json &field(const json &node, const char *key, const std::string &path) {
    if (!node.is_object() || !node.contains(key)) {
        fail(path, std::string("missing field '") + key + "'");
    }
    return node.at(key);
}

double as_number(const json &node, const std::string &path) {
    if (!node.is_number()) {
        fail(path, "expected a number");
    }
    return node.get<double>();
}

int64_t as_int(const json &node, const std::string &path) {
    if (!node.is_number_integer()) {
        fail(path, "expected an integer");
    }
    return node.get<int64_t>();
}

uint64_t as_uint(const json &node, const std::string &path) {
    if (node.is_number_unsigned()) {
        return node.get<uint64_t>();
    }
    int64_t v = as_int(node, path);
    if (v < 0) {
        fail(path, "expected a non-negative integer");
    }
    return static_cast<uint64_t>(v);
}

bool as_bool(const json &node, const std::string &path) {
    if (!node.is_boolean()) {
        fail(path, "expected true or false");
    }
    return node.get<bool>();
}

std::string as_string(const json &node, const std::string &path) {
    if (!node.is_string()) {
        fail(path, "expected a string");
    }
    return node.get<std::string>();
}

std::vector<int> as_int_list(const json &node, const std::string &path) {
    if (!node.is_array()) {
        fail(path, "expected a list");
    }
    std::vector<int> out;
    for (size_t i = 0; i < node.size(); i++) {
        out.push_back(static_cast<int>(as_int(node[i], path + "[" + std::to_string(i) + "]")));
    }
    return out;
}

void check_keys(const json &node, const std::string &path, std::initializer_list<const char *> allowed) {
    if (!node.is_object()) {
        fail(path, "expected an object");
    }
    for (const auto &[k, v] : node.items()) {
        bool ok = false;
        for (const char *a : allowed) {
            ok = ok || k == a;
        }
        if (!ok) {
            fail(path, "unknown field '" + k + "'");
        }
    }
}

PauliOperator parse_pauli(const json &node, int n, const std::string &path) {
    std::string s = as_string(node, path);
    PauliOperator p;
    try {
        p = PauliOperator::from_string(s);
    } catch (const std::exception &e) {
        fail(path, e.what());
    }
    if (n >= 0 && p.n != n) {
        fail(path, "'" + s + "' acts on " + std::to_string(p.n) + " qubits, expected " + std::to_string(n));
    }
    return p;
}

void add_entry(PauliDistribution &dist, const PauliOperator &p, double w, const std::string &path) {
    if (!(w >= 0) || w > 1) {
        fail(path, "probability must lie in [0, 1]");
    }
    if (!dist.empty() && dist.n() != p.n) {
        fail(path, "mixed qubit counts");
    }
    if (dist.empty() && dist.n() != p.n) {
        dist = PauliDistribution(p.n);
    }
    dist.add(p, w);
}

void parse_layout(const json &node, MeasurementLayout &layout, const std::string &path) {
    check_keys(node, path, {"data_qubits", "ancillas"});
    layout.data_qubits = as_int_list(field(node, "data_qubits", path), path + ".data_qubits");
    const json &anc = field(node, "ancillas", path);
    if (!anc.is_array()) {
        fail(path + ".ancillas", "expected a list");
    }
    for (size_t i = 0; i < anc.size(); i++) {
        std::string p = path + ".ancillas[" + std::to_string(i) + "]";
        check_keys(anc[i], p, {"qubit", "basis"});
        std::string b = as_string(field(anc[i], "basis", p), p + ".basis");
        if (b != "Z" && b != "X") {
            fail(p + ".basis", "expected \"Z\" or \"X\"");
        }
        layout.ancillas.push_back({static_cast<int>(as_int(field(anc[i], "qubit", p), p + ".qubit")), b[0]});
    }
}

void parse_gadget(const json &node, NoisyGadgetSpec &g, const StabilizerCode &code, const std::string &path) {
    std::string type = as_string(field(node, "type", path), path + ".type");
    if (type == "phenomenological") {
        check_keys(node, path, {"type", "p", "q"});
        g = NoisyGadgetSpec{};
        g.kind = GadgetKind::kPhenomenological;
        g.p = as_number(field(node, "p", path), path + ".p");
        g.q = as_number(field(node, "q", path), path + ".q");
        if (!(g.p >= 0 && g.p <= 1)) {
            fail(path + ".p", "must lie in [0, 1]");
        }
        if (!(g.q >= 0 && g.q <= 1)) {
            fail(path + ".q", "must lie in [0, 1]");
        }
    } else if (type == "joint_distribution") {
        check_keys(node, path, {"type", "joint", "layout"});
        g = NoisyGadgetSpec{};
        g.kind = GadgetKind::kJointDistribution;
        g.joint = parse_distribution(field(node, "joint", path), -1, path + ".joint");
        parse_layout(field(node, "layout", path), g.layout, path + ".layout");
    } else if (type == "circuit") {
        check_keys(node, path, {"type", "name", "circuit", "cnot_depolarizing"});
        g = NoisyGadgetSpec{};
        g.kind = GadgetKind::kCircuit;
        if (node.contains("name")) {
            g.circuit_name = as_string(node.at("name"), path + ".name");
            try {
                builtin_circuit(g.circuit_name);
            } catch (const std::exception &e) {
                fail(path + ".name", e.what());
            }
        } else {
            g.circuit = parse_circuit(field(node, "circuit", path), path + ".circuit");
        }
        if (node.contains("cnot_depolarizing")) {
            g.cnot_depolarizing = as_number(node.at("cnot_depolarizing"), path + ".cnot_depolarizing");
            if (!(g.cnot_depolarizing >= 0 && g.cnot_depolarizing <= 1)) {
                fail(path + ".cnot_depolarizing", "must lie in [0, 1]");
            }
        }
    } else if (type == "channels") {
        check_keys(node, path, {"type", "channels"});
        g = NoisyGadgetSpec{};
        g.kind = GadgetKind::kChannels;
        g.channels = std::make_shared<const SyndromeChannelSet>(
            parse_channel_table(field(node, "channels", path), code, path + ".channels"));
    } else {
        fail(path + ".type", "unknown gadget type '" + type +
                                 "' (expected phenomenological, joint_distribution, circuit or channels)");
    }
}

CoherentBlock parse_coherent(const json &node, int n, const std::string &path) {
    check_keys(node, path, {"eta", "transversal", "rotations", "pauli", "inputs", "shots"});
    CoherentBlock b;
    double eta = as_number(field(node, "eta", path), path + ".eta");
    if (!(eta >= 0 && eta <= 1)) {
        fail(path + ".eta", "must lie in [0, 1]");
    }
    if (node.contains("transversal")) {
        const json &t = node.at("transversal");
        std::string p = path + ".transversal";
        check_keys(t, p, {"axis", "theta"});
        std::string axis = as_string(field(t, "axis", p), p + ".axis");
        if (axis.size() != 1 || std::string("XYZ").find(axis[0]) == std::string::npos) {
            fail(p + ".axis", "expected X, Y or Z");
        }
        b.error = CoherentErrorSpec::transversal(axis[0], as_number(field(t, "theta", p), p + ".theta"), n, eta);
    } else {
        b.error.eta = eta;
        const json &rot = field(node, "rotations", path);
        if (!rot.is_array()) {
            fail(path + ".rotations", "expected a list");
        }
        for (size_t i = 0; i < rot.size(); i++) {
            std::string p = path + ".rotations[" + std::to_string(i) + "]";
            check_keys(rot[i], p, {"axis", "theta"});
            b.error.rotations.push_back({parse_pauli(field(rot[i], "axis", p), n, p + ".axis"),
                                         as_number(field(rot[i], "theta", p), p + ".theta")});
        }
    }
    if (node.contains("pauli")) {
        b.error.pauli = parse_distribution(node.at("pauli"), n, path + ".pauli");
    }
    if (node.contains("inputs")) {
        b.inputs.clear();
        const json &in = node.at("inputs");
        if (!in.is_array()) {
            fail(path + ".inputs", "expected a list");
        }
        for (size_t i = 0; i < in.size(); i++) {
            std::string s = as_string(in[i], path + ".inputs[" + std::to_string(i) + "]");
            if (s.size() != 1 || std::string("XYZ").find(s[0]) == std::string::npos) {
                fail(path + ".inputs[" + std::to_string(i) + "]", "expected X, Y or Z");
            }
            b.inputs.push_back(s[0]);
        }
    }
    if (node.contains("shots")) {
        b.shots = as_uint(node.at("shots"), path + ".shots");
    }
    return b;
}

json circuit_to_json(const CliffordCircuitSpec &c) {
    json ops = json::array();
    for (const auto &op : c.ops) {
        json o;
        switch (op.type) {
            case OpType::kPrepZ: o["op"] = "prep_z"; break;
            case OpType::kPrepX: o["op"] = "prep_x"; break;
            case OpType::kCnot: o["op"] = "cnot"; break;
            case OpType::kH: o["op"] = "h"; break;
            case OpType::kSwap: o["op"] = "swap"; break;
            case OpType::kMeasureZ: o["op"] = "measure_z"; break;
            case OpType::kMeasureX: o["op"] = "measure_x"; break;
            case OpType::kError: o["op"] = "error"; break;
        }
        o["qubits"] = op.qubits;
        if (op.type == OpType::kMeasureZ || op.type == OpType::kMeasureX) {
            o["bit"] = op.bit;
        }
        if (op.type == OpType::kError) {
            o["distribution"] = distribution_to_json(op.error);
        }
        ops.push_back(o);
    }
    return json{{"num_qubits", c.num_qubits},
                {"num_bits", c.num_bits},
                {"data_in", c.data_in},
                {"data_out", c.data_out},
                {"ops", ops}};
}

json raw_distribution(const PauliDistribution &dist) {
    json out = json::object();
    for (const auto &[p, w] : dist) {
        out[p.str()] = w;
    }
    return out;
}

std::string timestamp() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json summary_to_json(const ParameterSummary &s) {
    return json{{"name", s.name}, {"mean", s.mean},       {"median", s.median}, {"sd", s.sd},
                {"hdi_low", s.hdi_low}, {"hdi_high", s.hdi_high}, {"rhat", s.rhat}, {"ess", s.ess},
                {"mcse", s.mcse}};
}

json matrix_to_json(const Eigen::MatrixXd &m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); i++) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); j++) {
            row.push_back(m(i, j));
        }
        out.push_back(row);
    }
    return out;
}

std::string logical_name(const StabilizerCode &code, uint64_t bits) { return code.logical_from_bits(bits).str(); }

}  // namespace

PauliDistribution parse_distribution(const json &node, int n, const std::string &path) {
    PauliDistribution dist(n < 0 ? 0 : n);
    if (node.is_array()) {
        for (size_t i = 0; i < node.size(); i++) {
            std::string p = path + "[" + std::to_string(i) + "]";
            check_keys(node[i], p, {"pauli", "probability"});
            add_entry(dist, parse_pauli(field(node[i], "pauli", p), n, p + ".pauli"),
                      as_number(field(node[i], "probability", p), p + ".probability"), p);
        }
    } else if (node.is_object() && node.contains("depolarizing")) {
        check_keys(node, path, {"depolarizing", "n"});
        int qubits = n;
        if (node.contains("n")) {
            qubits = static_cast<int>(as_int(node.at("n"), path + ".n"));
        }
        if (qubits <= 0) {
            fail(path, "depolarizing needs a qubit count 'n'");
        }
        double p = as_number(node.at("depolarizing"), path + ".depolarizing");
        if (!(p >= 0 && p <= 1)) {
            fail(path + ".depolarizing", "must lie in [0, 1]");
        }
        dist = PauliDistribution::depolarizing(qubits, p);
    } else if (node.is_object()) {
        for (const auto &[k, v] : node.items()) {
            add_entry(dist, parse_pauli(json(k), n, path + "." + k), as_number(v, path + "." + k), path + "." + k);
        }
    } else {
        fail(path, "expected a distribution object or list");
    }
    if (dist.mass() > 1 + 1e-9) {
        fail(path, "total probability exceeds 1");
    }
    return dist;
}

json distribution_to_json(const PauliDistribution &dist) {
    json out = json::array();
    for (const auto &[p, w] : dist) {
        out.push_back(json{{"pauli", p.str()}, {"probability", number12(w)}});
    }
    return out;
}

CliffordCircuitSpec parse_circuit(const json &node, const std::string &path) {
    check_keys(node, path, {"num_qubits", "num_bits", "data_in", "data_out", "ops"});
    CliffordCircuitSpec c;
    c.num_qubits = static_cast<int>(as_int(field(node, "num_qubits", path), path + ".num_qubits"));
    c.num_bits = static_cast<int>(as_int(field(node, "num_bits", path), path + ".num_bits"));
    c.data_in = as_int_list(field(node, "data_in", path), path + ".data_in");
    c.data_out = as_int_list(field(node, "data_out", path), path + ".data_out");
    const json &ops = field(node, "ops", path);
    if (!ops.is_array()) {
        fail(path + ".ops", "expected a list");
    }
    for (size_t i = 0; i < ops.size(); i++) {
        std::string p = path + ".ops[" + std::to_string(i) + "]";
        check_keys(ops[i], p, {"op", "qubits", "bit", "distribution"});
        std::string name = as_string(field(ops[i], "op", p), p + ".op");
        std::vector<int> q = as_int_list(field(ops[i], "qubits", p), p + ".qubits");
        auto need = [&](size_t k) {
            if (q.size() != k) {
                fail(p + ".qubits", name + " takes " + std::to_string(k) + " qubit(s)");
            }
        };
        if (name == "prep_z") {
            need(1);
            c.prep_z(q[0]);
        } else if (name == "prep_x") {
            need(1);
            c.prep_x(q[0]);
        } else if (name == "cnot") {
            need(2);
            c.cnot(q[0], q[1]);
        } else if (name == "h") {
            need(1);
            c.h(q[0]);
        } else if (name == "swap") {
            need(2);
            c.swap(q[0], q[1]);
        } else if (name == "measure_z" || name == "measure_x") {
            need(1);
            int bit = static_cast<int>(as_int(field(ops[i], "bit", p), p + ".bit"));
            name == "measure_z" ? c.measure_z(q[0], bit) : c.measure_x(q[0], bit);
        } else if (name == "error") {
            c.error(q, parse_distribution(field(ops[i], "distribution", p), static_cast<int>(q.size()),
                                          p + ".distribution"));
        } else {
            fail(p + ".op", "unknown operation '" + name + "'");
        }
    }
    try {
        c.validate();
    } catch (const std::exception &e) {
        fail(path, e.what());
    }
    return c;
}

SyndromeChannelSet parse_channel_table(const json &node, const StabilizerCode &code, const std::string &path) {
    if (!node.is_object()) {
        fail(path, "expected an object keyed by syndrome bit strings");
    }
    SyndromeChannelSet set(code);
    for (const auto &[k, v] : node.items()) {
        if (static_cast<int>(k.size()) != code.num_stabilizers() || k.find_first_not_of("01") != std::string::npos) {
            fail(path + "." + k, "syndrome key must be " + std::to_string(code.num_stabilizers()) + " bits");
        }
        set.mutable_channel(bits_from_string(k)) = parse_distribution(v, code.n(), path + "." + k);
    }
    return set;
}

RunConfig parse_config(const json &doc) {
    check_keys(doc, "config",
               {"preset", "code", "gadget", "spam", "lengths", "shots_per_length", "settings", "copies", "pfr", "lp",
                "leakage", "seed", "coherent_error", "freq", "bayes", "diagnostics"});
    RunConfig rc;
    ExperimentConfig &c = rc.experiment;
    if (doc.contains("preset")) {
        std::string name = as_string(doc.at("preset"), "preset");
        try {
            c = preset_config(name);
        } catch (const std::exception &e) {
            fail("preset", e.what());
        }
    }
    if (doc.contains("code")) {
        c.code_id = as_string(doc.at("code"), "code");
    }
    StabilizerCode code = code_2_1_1();
    try {
        code = builtin_code(c.code_id);
    } catch (const std::exception &e) {
        fail("code", e.what());
    }
    if (doc.contains("gadget")) {
        parse_gadget(doc.at("gadget"), c.gadget, code, "gadget");
    }
    if (doc.contains("spam")) {
        const json &s = doc.at("spam");
        check_keys(s, "spam", {"prep", "meas", "readout_offset_eta"});
        if (s.contains("prep")) {
            c.spam.prep = parse_distribution(s.at("prep"), code.n(), "spam.prep");
        }
        if (s.contains("meas")) {
            c.spam.meas = parse_distribution(s.at("meas"), code.n(), "spam.meas");
        }
        if (s.contains("readout_offset_eta")) {
            c.spam.readout_offset_eta = as_number(s.at("readout_offset_eta"), "spam.readout_offset_eta");
        }
    }
    if (doc.contains("lengths")) {
        c.lengths = as_int_list(doc.at("lengths"), "lengths");
    }
    if (doc.contains("shots_per_length")) {
        const json &s = doc.at("shots_per_length");
        if (!s.is_array()) {
            fail("shots_per_length", "expected a list");
        }
        c.shots_per_length.clear();
        for (size_t i = 0; i < s.size(); i++) {
            c.shots_per_length.push_back(as_uint(s[i], "shots_per_length[" + std::to_string(i) + "]"));
        }
    }
    if (c.lengths.size() != c.shots_per_length.size()) {
        fail("shots_per_length", "needs one entry per sequence length");
    }
    if (doc.contains("settings")) {
        const json &s = doc.at("settings");
        if (!s.is_array()) {
            fail("settings", "expected a list");
        }
        c.settings.clear();
        for (size_t i = 0; i < s.size(); i++) {
            std::string p = "settings[" + std::to_string(i) + "]";
            c.settings.push_back(as_string(s[i], p));
            try {
                make_setting(code, c.settings.back());
            } catch (const std::exception &e) {
                fail(p, e.what());
            }
        }
    }
    if (doc.contains("copies")) {
        c.copies = static_cast<int>(as_int(doc.at("copies"), "copies"));
    }
    if (doc.contains("pfr")) {
        const json &p = doc.at("pfr");
        check_keys(p, "pfr", {"enabled", "frames"});
        if (p.contains("enabled")) {
            c.pfr.enabled = as_bool(p.at("enabled"), "pfr.enabled");
        }
        if (p.contains("frames")) {
            c.pfr.frames = static_cast<int>(as_int(p.at("frames"), "pfr.frames"));
        }
    }
    if (doc.contains("lp")) {
        c.lp = as_bool(doc.at("lp"), "lp");
    }
    if (doc.contains("leakage")) {
        const json &l = doc.at("leakage");
        check_keys(l, "leakage", {"enabled", "per_gate_rate", "kick"});
        if (l.contains("enabled")) {
            c.leakage.enabled = as_bool(l.at("enabled"), "leakage.enabled");
        }
        if (l.contains("per_gate_rate")) {
            c.leakage.per_gate_rate = as_number(l.at("per_gate_rate"), "leakage.per_gate_rate");
        }
        if (l.contains("kick")) {
            c.leakage.kick = parse_distribution(l.at("kick"), 1, "leakage.kick");
        }
    }
    if (doc.contains("seed")) {
        c.seed = as_uint(doc.at("seed"), "seed");
    }
    if (doc.contains("coherent_error")) {
        rc.coherent = parse_coherent(doc.at("coherent_error"), code.n(), "coherent_error");
    }
    if (doc.contains("freq")) {
        const json &f = doc.at("freq");
        check_keys(f, "freq", {"nonlinear", "fix_b", "project_to_simplex", "bootstrap", "max_iterations"});
        if (f.contains("nonlinear")) {
            rc.freq.options.nonlinear = as_bool(f.at("nonlinear"), "freq.nonlinear");
        }
        if (f.contains("fix_b")) {
            rc.freq.options.fit.fix_b = as_bool(f.at("fix_b"), "freq.fix_b");
        }
        if (f.contains("project_to_simplex")) {
            rc.freq.options.project_to_simplex = as_bool(f.at("project_to_simplex"), "freq.project_to_simplex");
        }
        if (f.contains("bootstrap")) {
            rc.freq.bootstrap = static_cast<int>(as_uint(f.at("bootstrap"), "freq.bootstrap"));
        }
        if (f.contains("max_iterations")) {
            rc.freq.options.fit.max_iterations = static_cast<int>(as_uint(f.at("max_iterations"), "freq.max_iterations"));
        }
    }
    if (doc.contains("bayes")) {
        const json &b = doc.at("bayes");
        check_keys(b, "bayes",
                   {"alpha_a", "alpha_b", "alpha_c", "pooled_nu_below", "dirichlet_on_probabilities", "chains", "warmup",
                    "samples", "rhat_threshold", "project_to_simplex", "priors"});
        auto positive = [&](const char *key, double &dst) {
            if (b.contains(key)) {
                dst = as_number(b.at(key), std::string("bayes.") + key);
                if (!(dst > 0)) {
                    fail(std::string("bayes.") + key, "must be positive");
                }
            }
        };
        positive("alpha_a", rc.bayes.model.alpha_a);
        positive("alpha_b", rc.bayes.model.alpha_b);
        positive("alpha_c", rc.bayes.model.alpha_c);
        positive("rhat_threshold", rc.bayes.sampler.rhat_threshold);
        if (b.contains("pooled_nu_below")) {
            rc.bayes.model.pooled_nu_below = as_uint(b.at("pooled_nu_below"), "bayes.pooled_nu_below");
        }
        if (b.contains("dirichlet_on_probabilities")) {
            rc.bayes.model.dirichlet_on_probabilities =
                as_bool(b.at("dirichlet_on_probabilities"), "bayes.dirichlet_on_probabilities");
        }
        if (b.contains("chains")) {
            rc.bayes.sampler.chains = static_cast<int>(as_uint(b.at("chains"), "bayes.chains"));
        }
        if (b.contains("warmup")) {
            rc.bayes.sampler.warmup = static_cast<int>(as_uint(b.at("warmup"), "bayes.warmup"));
        }
        if (b.contains("samples")) {
            rc.bayes.sampler.samples = static_cast<int>(as_uint(b.at("samples"), "bayes.samples"));
        }
        if (b.contains("project_to_simplex")) {
            rc.bayes.project_to_simplex = as_bool(b.at("project_to_simplex"), "bayes.project_to_simplex");
        }
        if (b.contains("priors")) {
            rc.bayes.model.priors = parse_priors(json{{"priors", b.at("priors")}});
        }
    }
    if (doc.contains("diagnostics")) {
        const json &d = doc.at("diagnostics");
        check_keys(d, "diagnostics", {"r", "threshold_sigma", "ci_level", "lags", "by_state"});
        if (d.contains("r")) {
            rc.diagnostics.r = static_cast<int>(as_int(d.at("r"), "diagnostics.r"));
        }
        if (d.contains("threshold_sigma")) {
            rc.diagnostics.threshold_sigma = as_number(d.at("threshold_sigma"), "diagnostics.threshold_sigma");
        }
        if (d.contains("ci_level")) {
            rc.diagnostics.ci_level = as_number(d.at("ci_level"), "diagnostics.ci_level");
            if (!(rc.diagnostics.ci_level > 0 && rc.diagnostics.ci_level < 1)) {
                fail("diagnostics.ci_level", "must lie in (0, 1)");
            }
        }
        if (d.contains("lags")) {
            rc.diagnostics.lags = as_int_list(d.at("lags"), "diagnostics.lags");
        }
        if (d.contains("by_state")) {
            rc.diagnostics.by_state = as_bool(d.at("by_state"), "diagnostics.by_state");
        }
    }
    return rc;
}

RunConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(doc);
}

json config_to_json(const ExperimentConfig &c) {
    json g;
    switch (c.gadget.kind) {
        case GadgetKind::kPhenomenological:
            g = json{{"type", "phenomenological"}, {"p", c.gadget.p}, {"q", c.gadget.q}};
            break;
        case GadgetKind::kJointDistribution: {
            json anc = json::array();
            for (const auto &a : c.gadget.layout.ancillas) {
                anc.push_back(json{{"qubit", a.qubit}, {"basis", std::string(1, a.basis)}});
            }
            g = json{{"type", "joint_distribution"},
                     {"joint", raw_distribution(c.gadget.joint)},
                     {"layout", json{{"data_qubits", c.gadget.layout.data_qubits}, {"ancillas", anc}}}};
            break;
        }
        case GadgetKind::kCircuit:
            g = json{{"type", "circuit"}};
            if (c.gadget.circuit_name.empty()) {
                g["circuit"] = circuit_to_json(c.gadget.circuit);
            } else {
                g["name"] = c.gadget.circuit_name;
            }
            g["cnot_depolarizing"] = c.gadget.cnot_depolarizing;
            break;
        case GadgetKind::kChannels: {
            json table = json::object();
            if (c.gadget.channels) {
                int len = c.gadget.channels->code.num_stabilizers();
                for (const auto &[m, d] : c.gadget.channels->channels) {
                    table[bits_to_string(m, len)] = raw_distribution(d);
                }
            }
            g = json{{"type", "channels"}, {"channels", table}};
            break;
        }
    }
    json spam{{"prep", raw_distribution(c.spam.prep)},
              {"meas", raw_distribution(c.spam.meas)},
              {"readout_offset_eta", c.spam.readout_offset_eta}};
    return json{{"code", c.code_id},
                {"gadget", g},
                {"spam", spam},
                {"lengths", c.lengths},
                {"shots_per_length", c.shots_per_length},
                {"settings", c.settings},
                {"copies", c.copies},
                {"pfr", json{{"enabled", c.pfr.enabled}, {"frames", c.pfr.frames}}},
                {"lp", c.lp},
                {"leakage",
                 json{{"enabled", c.leakage.enabled},
                      {"per_gate_rate", c.leakage.per_gate_rate},
                      {"kick", raw_distribution(c.leakage.kick)}}},
                {"seed", c.seed}};
}

json number12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return json::parse(buf);
}

json channels_to_json(const SyndromeChannelSet &set) {
    json table = json::object();
    for (const auto &[m, d] : set.channels) {
        table[bits_to_string(m, set.code.num_stabilizers())] = distribution_to_json(d);
    }
    return json{{"code", set.code.id()}, {"channels", table}};
}

json detector_channels_to_json(const DetectorChannels &channels, int num_stabilizers) {
    json table = json::object();
    for (const auto &[d, ch] : channels) {
        table[bits_to_string(d, num_stabilizers)] =
            json{{"probability", number12(ch.probability())}, {"channel", distribution_to_json(ch.dist)}};
    }
    return table;
}

uint64_t fnv1a64(const std::string &bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json RunManifest::to_json() const {
    return json{{"config_hash", config_hash}, {"seed", seed},      {"tool_version", tool_version},
                {"created", created},         {"inputs", inputs}, {"outputs", outputs}};
}

std::string config_hash(const ExperimentConfig &config) {
    return hex64(fnv1a64(config_to_json(config).dump() + "|" + LSD_VERSION));
}

RunManifest make_manifest(const ExperimentConfig &config) {
    RunManifest m;
    m.config_hash = config_hash(config);
    m.seed = config.seed;
    m.tool_version = LSD_VERSION;
    m.created = timestamp();
    return m;
}

std::string shot_to_line(const ShotRecord &rec,
                         const StabilizerCode &code,
                         const std::vector<Setting> &settings,
                         const std::string &manifest_hash) {
    int len = code.num_stabilizers();
    json syn = json::array();
    for (uint64_t s : rec.syndromes) {
        syn.push_back(bits_to_string(s, len));
    }
    json det = json::array();
    for (uint64_t d : rec.detectors) {
        det.push_back(bits_to_string(d, len));
    }
    json counts = json::object();
    for (const auto &[d, k] : rec.detector_counts()) {
        counts[bits_to_string(d, len)] = k;
    }
    json line{{"code", code.id()},
              {"setting", settings.at(static_cast<size_t>(rec.setting)).label()},
              {"copy", rec.copy},
              {"r", rec.r},
              {"shot_index", rec.shot_index},
              {"syndromes", syn},
              {"detectors", det},
              {"detector_counts", counts},
              {"final_l", bits_to_string(rec.final_l, code.k())},
              {"final_o", bits_to_string(rec.final_o, len)},
              {"frame_id", rec.frame_id < 0 ? json(nullptr) : json(rec.frame_id)},
              {"manifest", manifest_hash}};
    return line.dump();
}

ShotFile parse_shots(std::istream &in) {
    ShotFile out;
    std::string text;
    size_t line_no = 0;
    std::optional<StabilizerCode> code;
    std::map<std::string, int> setting_index;
    while (std::getline(in, text)) {
        line_no++;
        if (text.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error &e) {
            throw SchemaError(line_no, std::string("not a JSON object: ") + e.what());
        }
        auto get = [&](const char *key) -> const json & {
            if (!j.is_object() || !j.contains(key)) {
                throw SchemaError(line_no, std::string("missing field '") + key + "'");
            }
            return j.at(key);
        };
        auto str = [&](const char *key) {
            const json &v = get(key);
            if (!v.is_string()) {
                throw SchemaError(line_no, std::string("field '") + key + "' must be a string");
            }
            return v.get<std::string>();
        };
        auto uint = [&](const char *key) {
            const json &v = get(key);
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
                throw SchemaError(line_no, std::string("field '") + key + "' must be a non-negative integer");
            }
            return v.get<uint64_t>();
        };
        std::string code_id = str("code");
        if (!code) {
            try {
                code = builtin_code(code_id);
            } catch (const std::exception &e) {
                throw SchemaError(line_no, e.what());
            }
            out.code_id = code_id;
            out.manifest_hash = j.contains("manifest") && j["manifest"].is_string() ? j["manifest"].get<std::string>()
                                                                                     : "";
        } else if (code_id != out.code_id) {
            throw SchemaError(line_no, "code '" + code_id + "' differs from '" + out.code_id + "'");
        }
        int len = code->num_stabilizers();
        auto bits_field = [&](const json &v, int width, const std::string &what) {
            if (!v.is_string()) {
                throw SchemaError(line_no, what + " must be a bit string");
            }
            std::string s = v.get<std::string>();
            if (static_cast<int>(s.size()) != width || s.find_first_not_of("01") != std::string::npos) {
                throw SchemaError(line_no, what + " must have " + std::to_string(width) + " bits");
            }
            return bits_from_string(s);
        };
        ShotRecord rec;
        std::string label = str("setting");
        auto it = setting_index.find(label);
        if (it == setting_index.end()) {
            try {
                out.settings.push_back(setting_from_label(*code, label));
            } catch (const std::exception &e) {
                throw SchemaError(line_no, e.what());
            }
            it = setting_index.emplace(label, static_cast<int>(out.labels.size())).first;
            out.labels.push_back(label);
        }
        rec.setting = it->second;
        rec.copy = static_cast<int>(uint("copy"));
        rec.r = static_cast<int>(uint("r"));
        rec.shot_index = uint("shot_index");
        const json &syn = get("syndromes");
        const json &det = get("detectors");
        if (!syn.is_array() || syn.size() != 2 * static_cast<size_t>(rec.r)) {
            throw SchemaError(line_no, "syndromes must list 2r entries");
        }
        if (!det.is_array() || det.size() != static_cast<size_t>(rec.r)) {
            throw SchemaError(line_no, "detectors must list r entries");
        }
        for (size_t i = 0; i < syn.size(); i++) {
            rec.syndromes.push_back(bits_field(syn[i], len, "syndromes[" + std::to_string(i) + "]"));
        }
        for (size_t i = 0; i < det.size(); i++) {
            rec.detectors.push_back(bits_field(det[i], len, "detectors[" + std::to_string(i) + "]"));
            if (rec.detectors[i] != (rec.syndromes[2 * i] ^ rec.syndromes[2 * i + 1])) {
                throw SchemaError(line_no, "detectors[" + std::to_string(i) + "] is not the xor of its syndromes");
            }
        }
        rec.final_l = bits_field(get("final_l"), code->k(), "final_l");
        rec.final_o = bits_field(get("final_o"), len, "final_o");
        if (j.contains("frame_id") && !j["frame_id"].is_null()) {
            if (!j["frame_id"].is_number_integer()) {
                throw SchemaError(line_no, "frame_id must be an integer or null");
            }
            rec.frame_id = j["frame_id"].get<int>();
        }
        out.shots.push_back(std::move(rec));
    }
    return out;
}

ShotFile read_shots(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(path + ": cannot open");
    }
    return parse_shots(in);
}

void write_shots(std::ostream &out,
                 const std::vector<ShotRecord> &shots,
                 const StabilizerCode &code,
                 const std::vector<Setting> &settings,
                 const std::string &manifest_hash) {
    for (const auto &rec : shots) {
        out << shot_to_line(rec, code, settings, manifest_hash) << '\n';
    }
}

json freq_report(const FreqEstimate &est, const StabilizerCode &code) {
    int len = code.num_stabilizers();
    json obs = json::array();
    for (const auto &f : est.fit.per_q) {
        json lam = json::array();
        json se = json::array();
        for (size_t d = 0; d < f.lambda.size(); d++) {
            lam.push_back(f.lambda[d]);
            se.push_back(f.has_data ? f.stderr_lambda(d) : 0.0);
        }
        obs.push_back(json{{"q", f.q.str()},
                           {"has_data", f.has_data},
                           {"a", f.a},
                           {"a_stderr", f.has_data ? std::sqrt(std::max(f.cov(0, 0), 0.0)) : 0.0},
                           {"b", f.b},
                           {"b_fixed", f.b_fixed},
                           {"lambda", lam},
                           {"lambda_stderr", se},
                           {"chi2", f.chi2},
                           {"dof", f.dof},
                           {"converged", f.converged},
                           {"message", f.message},
                           {"dropped_cells", f.dropped_cells},
                           {"dropped_fraction", f.dropped_fraction},
                           {"cov", matrix_to_json(f.cov)}});
    }
    json rates = json::object();
    for (const auto &[d, r] : est.rates) {
        rates[bits_to_string(d, len)] = json{{"p", r.p}, {"stderr", r.stderr_}};
    }
    json dets = json::array();
    for (const auto &de : est.channels.detectors) {
        json cosets = json::array();
        for (size_t c = 0; c < de.coset.size(); c++) {
            PauliOperator rep = code.coset_representative(c);
            cosets.push_back(json{{"index", c},
                                  {"representative", rep.str()},
                                  {"p", de.coset[c]},
                                  {"stderr", std::sqrt(std::max(de.coset_cov(c, c), 0.0))},
                                  {"p_joint", de.coset_total[c]},
                                  {"p_joint_stderr", de.coset_total_stderr[c]}});
        }
        json d{{"detector", bits_to_string(de.detector, len)},
               {"p_detector", de.rate.p},
               {"p_detector_stderr", de.rate.stderr_},
               {"cosets", cosets},
               {"bounds_defined", de.bounds_defined}};
        if (de.bounds_defined) {
            json ps = json::array();
            json id = json::array();
            for (size_t l = 0; l < de.bounds.post_selected.size(); l++) {
                ps.push_back(json{{"logical", logical_name(code, l)},
                                  {"p", de.bounds.post_selected[l]},
                                  {"stderr", l < de.post_selected_stderr.size() ? de.post_selected_stderr[l] : 0.0}});
                id.push_back(json{{"logical", logical_name(code, l)},
                                  {"p", de.bounds.ideal_decoder[l]},
                                  {"stderr", l < de.ideal_decoder_stderr.size() ? de.ideal_decoder_stderr[l] : 0.0}});
            }
            d["post_selected"] = ps;
            d["ideal_decoder"] = id;
        }
        dets.push_back(d);
    }
    return json{{"method", "freq"},
                {"code", code.id()},
                {"num_detectors", est.fit.num_detectors},
                {"shots", est.table.num_shots()},
                {"simplex_projected", est.channels.simplex_projected},
                {"observables", obs},
                {"detector_rates", rates},
                {"detectors", dets}};
}

void write_decay_csv(std::ostream &out, const FreqEstimate &est) {
    int s = est.fit.num_detectors;
    out << "q,cell";
    for (int d = 0; d < s; d++) {
        out << ",n_D" << d;
    }
    out << ",shots,q_bar,var,fitted\n";
    for (size_t o = 0; o < est.table.observables.size(); o++) {
        const QFit &f = est.fit.per_q[o];
        for (const auto &cell : aggregate(est.table, o)) {
            out << f.q.str() << ',' << cell.cell_id;
            for (int c : cell.counts) {
                out << ',' << c;
            }
            out << ',' << cell.n << ',' << cell.q_bar << ',' << cell.var_q_bar << ','
                << (f.has_data ? f.model(cell.counts) : 0.0) << '\n';
        }
    }
}

void write_matrix_csv(std::ostream &out, const Eigen::MatrixXd &m) {
    for (Eigen::Index i = 0; i < m.rows(); i++) {
        for (Eigen::Index j = 0; j < m.cols(); j++) {
            out << (j ? "," : "") << m(i, j);
        }
        out << '\n';
    }
}

json posterior_report(const std::vector<PosteriorSamples> &samples,
                      const std::vector<CosetPosterior> &cosets,
                      const StabilizerCode &code) {
    int len = code.num_stabilizers();
    json obs = json::array();
    for (const auto &s : samples) {
        json sum = json::array();
        for (const auto &p : s.summary) {
            sum.push_back(summary_to_json(p));
        }
        obs.push_back(json{{"q", s.q.str()},
                           {"chains", s.chains},
                           {"warmup", s.warmup},
                           {"samples", s.samples},
                           {"acceptance_joint", s.acceptance_joint},
                           {"acceptance_nu", s.acceptance_nu},
                           {"converged", s.converged},
                           {"warning", s.warning},
                           {"summary", sum}});
    }
    json dets = json::array();
    for (const auto &c : cosets) {
        json cs = json::array();
        for (const auto &p : c.coset_summary) {
            cs.push_back(summary_to_json(p));
        }
        json d{{"detector", bits_to_string(c.detector, len)},
               {"p_detector", c.p_detector},
               {"cosets", cs},
               {"bounds_defined", c.bounds_defined}};
        if (c.bounds_defined) {
            json ps = json::array();
            json id = json::array();
            for (const auto &p : c.post_selected_summary) {
                ps.push_back(summary_to_json(p));
            }
            for (const auto &p : c.ideal_decoder_summary) {
                id.push_back(summary_to_json(p));
            }
            d["post_selected"] = ps;
            d["ideal_decoder"] = id;
        }
        dets.push_back(d);
    }
    return json{{"method", "bayes"},
                {"code", code.id()},
                {"hdi_mass", 0.94},
                {"observables", obs},
                {"detectors", dets}};
}

void write_draws_csv(std::ostream &out, const PosteriorSamples &samples) {
    out << "chain,draw";
    for (const auto &n : samples.names) {
        out << ',' << n;
    }
    out << '\n';
    for (Eigen::Index row = 0; row < samples.draws.rows(); row++) {
        out << row / samples.samples << ',' << row % samples.samples;
        for (Eigen::Index c = 0; c < samples.draws.cols(); c++) {
            out << ',' << samples.draws(row, c);
        }
        out << '\n';
    }
}

void write_violin_csv(std::ostream &out, const std::vector<CosetPosterior> &cosets, const StabilizerCode &code) {
    out << "coset,detector,value\n";
    for (const auto &c : cosets) {
        std::string det = bits_to_string(c.detector, code.num_stabilizers());
        for (Eigen::Index k = 0; k < c.coset_draws.cols(); k++) {
            std::string name = code.coset_representative(static_cast<uint64_t>(k)).str();
            for (Eigen::Index i = 0; i < c.coset_draws.rows(); i++) {
                out << name << ',' << det << ',' << c.coset_draws(i, k) << '\n';
            }
        }
    }
}

json priors_to_json(const EigenvaluePriors &priors) {
    json p = json::object();
    for (const auto &[q, list] : priors) {
        json arr = json::array();
        for (const auto &b : list) {
            arr.push_back(json{{"mu", b.mu}, {"nu", b.nu}});
        }
        p[q] = arr;
    }
    return json{{"priors", p}};
}

EigenvaluePriors parse_priors(const json &doc) {
    EigenvaluePriors out;
    const json &p = field(doc, "priors", "priors");
    if (!p.is_object()) {
        fail("priors", "expected an object keyed by Pauli strings");
    }
    for (const auto &[q, list] : p.items()) {
        std::string path = "priors." + q;
        parse_pauli(json(q), -1, path);
        if (!list.is_array()) {
            fail(path, "expected a list of {mu, nu}");
        }
        for (size_t i = 0; i < list.size(); i++) {
            std::string pp = path + "[" + std::to_string(i) + "]";
            check_keys(list[i], pp, {"mu", "nu"});
            ScaledBetaPrior b;
            b.mu = as_number(field(list[i], "mu", pp), pp + ".mu");
            b.nu = as_number(field(list[i], "nu", pp), pp + ".nu");
            if (!(b.mu > 0 && b.mu < 1) || !(b.nu > 0)) {
                fail(pp, "needs 0 < mu < 1 and nu > 0");
            }
            out[q].push_back(b);
        }
    }
    return out;
}

json diagnostics_to_json(const DiagnosticsReport &rep) {
    json trend = json::array();
    for (const auto &t : rep.trend) {
        json series = json::array();
        for (const auto &p : t.series) {
            series.push_back(json{{"position", p.position}, {"rate", p.rate}, {"stderr", p.stderr_}});
        }
        trend.push_back(json{{"state", t.state},
                             {"slope", t.slope},
                             {"slope_stderr", t.slope_stderr},
                             {"z", t.z ? json(*t.z) : json(nullptr)},
                             {"violation", t.violation},
                             {"series", series}});
    }
    json hom = nullptr;
    if (rep.homogeneity) {
        json states = json::array();
        for (const auto &s : rep.homogeneity->states) {
            states.push_back(json{{"state", s.state},
                                  {"trials", s.trials},
                                  {"clicks", s.clicks},
                                  {"rate", static_cast<double>(s.clicks) / static_cast<double>(s.trials)}});
        }
        hom = json{{"chi2", rep.homogeneity->chi2},
                   {"dof", rep.homogeneity->dof},
                   {"p_value", rep.homogeneity->p_value},
                   {"violation", rep.homogeneity->violation},
                   {"states", states}};
    }
    json lags = json::array();
    for (const auto &c : rep.correlations) {
        json per = json::array();
        for (const auto &p : c.per_position) {
            per.push_back(json{{"i", p.first},
                               {"given", p.given},
                               {"both", p.both},
                               {"conditional", p.conditional ? json(*p.conditional) : json(nullptr)},
                               {"ci_low", p.ci.low},
                               {"ci_high", p.ci.high}});
        }
        lags.push_back(json{{"lag", c.lag},
                            {"given", c.given},
                            {"both", c.both},
                            {"conditional", c.conditional ? json(*c.conditional) : json(nullptr)},
                            {"ci_low", c.ci.low},
                            {"ci_high", c.ci.high},
                            {"base_rate", c.base_rate},
                            {"z", c.z ? json(*c.z) : json(nullptr)},
                            {"violation", c.violation},
                            {"per_position", per}});
    }
    return json{{"r", rep.r},
                {"shots", rep.shots},
                {"threshold_sigma", rep.threshold_sigma},
                {"ci_level", rep.ci_level},
                {"interval_method", rep.interval_method},
                {"passed", rep.passed()},
                {"violations", rep.violations},
                {"notes", rep.notes},
                {"click_rate_trend", trend},
                {"state_independence", hom},
                {"pair_correlation", lags}};
}

void write_trend_csv(std::ostream &out, const DiagnosticsReport &rep) {
    out << "state,position,rate,stderr\n";
    for (const auto &t : rep.trend) {
        for (const auto &p : t.series) {
            out << t.state << ',' << p.position << ',' << p.rate << ',' << p.stderr_ << '\n';
        }
    }
}

void write_lag_csv(std::ostream &out, const DiagnosticsReport &rep) {
    out << "lag,i,conditional,ci_low,ci_high\n";
    for (const auto &c : rep.correlations) {
        out << c.lag << ",pooled," << (c.conditional ? *c.conditional : 0.0) << ',' << c.ci.low << ',' << c.ci.high
            << '\n';
        for (const auto &p : c.per_position) {
            if (p.conditional) {
                out << c.lag << ',' << p.first << ',' << *p.conditional << ',' << p.ci.low << ',' << p.ci.high << '\n';
            }
        }
    }
}

json click_rate_to_json(const ClickRate &rate) {
    return json{{"input", std::string(1, rate.input)},
                {"rate", rate.rate},
                {"stderr", rate.stderr_},
                {"shots", rate.shots},
                {"clicks", rate.clicks}};
}

}  // namespace lsd
