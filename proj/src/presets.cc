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


#include "lsd/presets.h"

#include <cmath>

namespace lsd {

namespace {

// Logical index: bit 0 is the X̄ exponent, bit 1 the Z̄ exponent.
constexpr int kI = 0;
constexpr int kX = 1;
constexpr int kZ = 2;
constexpr int kY = 3;

struct Region {
    std::array<double, 4> trivial{};
    std::array<double, 4> pure_x{};
};

Region d0_region(const std::array<double, 4> &g0, double f, const std::array<double, 4> &u) {
    Region out;
    for (int a = 0; a < 4; a++) {
        for (int b = 0; b < 4; b++) {
            out.trivial[a ^ b] += g0[a] * g0[b];
            out.pure_x[a ^ b] += u[a] * g0[b];
        }
        out.pure_x[a] += f * u[a];
    }
    out.trivial[kI] += f * f;
    return out;
}

}  // namespace

SyndromeChannelSet tuned_table1_gadget(const TableITargets &t) {
    double share = t.pure_error_share;
    double p0 = t.p_detector_zero;
    // Mass with the IX pure error is U (1 - U); p(D=0) then fixes the flip rate f.
    double u_mass = 0.5 * (1 - std::sqrt(1 - 4 * share * p0));
    double a = 2;
    double b = -2 * (1 - u_mass);
    double c = 1 - u_mass - p0;
    double f = (-b - std::sqrt(b * b - 4 * a * c)) / (2 * a);
    if (!(u_mass > 0 && f > 0 && std::isfinite(f))) {
        throw std::invalid_argument("tuned_table1_gadget: targets are not reachable");
    }

    std::array<double, 4> ps_target{};
    ps_target[kX] = t.post_selected[0];
    ps_target[kY] = t.post_selected[1];
    ps_target[kZ] = t.post_selected[2];
    std::array<double, 4> px_target{};
    double px_sum = 0;
    for (int l : {kX, kY, kZ}) {
        int idx = l == kX ? 0 : (l == kY ? 1 : 2);
        px_target[l] = t.decoded[idx] - t.post_selected[idx] * (1 - share);
        px_sum += px_target[l];
    }
    px_target[kI] = share - px_sum;
    for (double v : px_target) {
        if (v <= 0) {
            throw std::invalid_argument("tuned_table1_gadget: decoded rates below post-selected rates");
        }
    }

    std::array<double, 4> g0{};
    std::array<double, 4> u{};
    for (int l : {kX, kY, kZ}) {
        g0[l] = ps_target[l] / 2;
    }
    for (int l = 0; l < 4; l++) {
        u[l] = u_mass * px_target[l] / share;
    }
    for (int iter = 0; iter < 500; iter++) {
        g0[kI] = 1 - f - u_mass - g0[kX] - g0[kY] - g0[kZ];
        Region reg = d0_region(g0, f, u);
        double trivial = reg.trivial[0] + reg.trivial[1] + reg.trivial[2] + reg.trivial[3];
        double total = trivial + reg.pure_x[0] + reg.pure_x[1] + reg.pure_x[2] + reg.pure_x[3];
        for (int l : {kX, kY, kZ}) {
            g0[l] *= ps_target[l] / (reg.trivial[l] / trivial);
        }
        double s = 0;
        for (int l = 0; l < 4; l++) {
            u[l] *= px_target[l] / (reg.pure_x[l] / total);
            s += u[l];
        }
        for (int l = 0; l < 4; l++) {
            u[l] *= u_mass / s;
        }
    }
    g0[kI] = 1 - f - u_mass - g0[kX] - g0[kY] - g0[kZ];

    SyndromeChannelSet out(code_2_1_1());
    auto &m0 = out.mutable_channel(0);
    m0.add(PauliOperator::from_string("II"), g0[kI]);
    m0.add(PauliOperator::from_string("XX"), g0[kX]);
    m0.add(PauliOperator::from_string("YX"), g0[kY]);
    m0.add(PauliOperator::from_string("ZI"), g0[kZ]);
    auto &m1 = out.mutable_channel(1);
    m1.add(PauliOperator::from_string("II"), f);
    m1.add(PauliOperator::from_string("IX"), u[kI]);
    m1.add(PauliOperator::from_string("XI"), u[kX]);
    m1.add(PauliOperator::from_string("YI"), u[kY]);
    m1.add(PauliOperator::from_string("ZX"), u[kZ]);
    out.validate(1e-12);
    return out;
}

std::vector<std::string> preset_names() {
    return {"lsd_211_tableI", "phenomenological_211", "leakage_211_flag", "leakage_211_lp", "circuit_422"};
}

ExperimentConfig preset_config(const std::string &name) {
    ExperimentConfig c;
    if (name == "lsd_211_tableI") {
        c.code_id = "2_1_1";
        c.gadget.kind = GadgetKind::kChannels;
        c.gadget.channels = std::make_shared<const SyndromeChannelSet>(tuned_table1_gadget());
        c.spam.prep = PauliDistribution::depolarizing(2, 0.01);
        c.spam.meas = PauliDistribution::depolarizing(2, 0.01);
        c.lengths = {6, 12, 18, 36, 72};
        c.shots_per_length = {350, 1500, 350, 350, 350};
        c.settings = {"X", "Y", "Z"};
        c.copies = 6;
        c.pfr = {true, 10};
        c.lp = true;
        c.seed = 20250101;
        return c;
    }
    if (name == "phenomenological_211") {
        c.code_id = "2_1_1";
        c.gadget.kind = GadgetKind::kPhenomenological;
        c.gadget.p = 0.1;
        c.gadget.q = 0.05;
        c.lengths = {1, 2, 4, 8};
        c.shots_per_length = {2000, 2000, 2000, 2000};
        c.seed = 7;
        return c;
    }
    if (name == "leakage_211_flag" || name == "leakage_211_lp") {
        bool lp = name == "leakage_211_lp";
        c.code_id = "2_1_1";
        c.gadget.kind = GadgetKind::kCircuit;
        c.gadget.circuit_name = lp ? "lp_2_1_1" : "flag_2_1_1";
        c.gadget.cnot_depolarizing = 1e-3;
        c.lp = lp;
        c.leakage.enabled = true;
        c.leakage.per_gate_rate = 2e-3;
        c.lengths = {15};
        c.shots_per_length = {100000};
        c.settings = {"Z"};
        c.seed = 11;
        return c;
    }
    if (name == "circuit_422") {
        c.code_id = "4_2_2";
        c.gadget.kind = GadgetKind::kCircuit;
        c.gadget.circuit_name = "flag_4_2_2";
        c.gadget.cnot_depolarizing = 1e-3;
        c.lengths = {2, 4, 8};
        c.shots_per_length = {500, 500, 500};
        c.seed = 13;
        return c;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace lsd
