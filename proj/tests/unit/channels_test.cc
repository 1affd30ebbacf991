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


#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "lsd/channels.h"
#include "lsd/circuit.h"
#include "lsd/oracle.h"
#include "lsd/transform.h"

using namespace lsd;

namespace {

PauliOperator P(const char *s) { return PauliOperator::from_string(s); }

double max_diff(const PauliDistribution &a, const PauliDistribution &b) {
    double m = 0;
    for (const auto &[p, w] : a) {
        m = std::max(m, std::abs(w - b.get(p)));
    }
    for (const auto &[p, w] : b) {
        m = std::max(m, std::abs(w - a.get(p)));
    }
    return m;
}

PauliDistribution random_distribution(int n, std::mt19937_64 &gen, double mass = 1.0) {
    std::uniform_real_distribution<double> u(0, 1);
    PauliDistribution d(n);
    std::vector<double> w(size_t{1} << (2 * n));
    double total = 0;
    for (auto &x : w) {
        x = u(gen) < 0.4 ? 0.0 : u(gen);
        total += x;
    }
    w[0] += 1e-3;
    total += 1e-3;
    for (size_t i = 0; i < w.size(); i++) {
        if (w[i] > 0) {
            d.add(PauliOperator::from_dense_index(n, i), mass * w[i] / total);
        }
    }
    return d;
}

PauliDistribution independent_x(double p) {
    return PauliDistribution(
        2, {{"II", (1 - p) * (1 - p)}, {"XI", p * (1 - p)}, {"IX", (1 - p) * p}, {"XX", p * p}});
}

/// Conjugation rules applied directly to x/z bit vectors.
struct MiniFrame {
    std::vector<int> x, z;
    uint64_t flips = 0;
    explicit MiniFrame(int n) : x(n, 0), z(n, 0) {}
    void apply(const CircuitOp &op) {
        const auto &q = op.qubits;
        switch (op.type) {
            case OpType::kPrepZ:
            case OpType::kPrepX: x[q[0]] = z[q[0]] = 0; break;
            case OpType::kCnot:
                x[q[1]] ^= x[q[0]];
                z[q[0]] ^= z[q[1]];
                break;
            case OpType::kH: std::swap(x[q[0]], z[q[0]]); break;
            case OpType::kSwap:
                std::swap(x[q[0]], x[q[1]]);
                std::swap(z[q[0]], z[q[1]]);
                break;
            case OpType::kMeasureZ: flips ^= static_cast<uint64_t>(x[q[0]]) << op.bit; break;
            case OpType::kMeasureX: flips ^= static_cast<uint64_t>(z[q[0]]) << op.bit; break;
            case OpType::kError: break;
        }
    }
};

/// Expands every combination of error outcomes through the circuit.
SyndromeChannelSet expand_exhaustively(const CliffordCircuitSpec &c, const StabilizerCode &code) {
    SyndromeChannelSet out(code);
    std::vector<size_t> errs;
    for (size_t i = 0; i < c.ops.size(); i++) {
        if (c.ops[i].type == OpType::kError) {
            errs.push_back(i);
        }
    }
    std::vector<std::vector<std::pair<PauliOperator, double>>> choices;
    for (size_t i : errs) {
        std::vector<std::pair<PauliOperator, double>> opts;
        for (const auto &[p, w] : c.ops[i].error) {
            opts.push_back({p, w});
        }
        choices.push_back(opts);
    }
    std::vector<size_t> pick(errs.size(), 0);
    std::function<void(size_t)> rec = [&](size_t depth) {
        if (depth < errs.size()) {
            for (pick[depth] = 0; pick[depth] < choices[depth].size(); pick[depth]++) {
                rec(depth + 1);
            }
            return;
        }
        MiniFrame f(c.num_qubits);
        double w = 1;
        size_t e = 0;
        for (size_t i = 0; i < c.ops.size(); i++) {
            const auto &op = c.ops[i];
            if (op.type == OpType::kError) {
                const auto &[p, pw] = choices[e][pick[e]];
                for (size_t j = 0; j < op.qubits.size(); j++) {
                    f.x[op.qubits[j]] ^= (p.x >> j) & 1;
                    f.z[op.qubits[j]] ^= (p.z >> j) & 1;
                }
                w *= pw;
                e++;
            } else {
                f.apply(op);
            }
        }
        uint64_t dx = 0, dz = 0;
        for (size_t i = 0; i < c.data_out.size(); i++) {
            dx |= static_cast<uint64_t>(f.x[c.data_out[i]]) << i;
            dz |= static_cast<uint64_t>(f.z[c.data_out[i]]) << i;
        }
        out.mutable_channel(f.flips).add(PauliOperator(code.n(), dx, dz), w);
    };
    rec(0);
    return out;
}

}  // namespace

TEST(Phenomenological, Noiseless) {
    auto g = phenomenological_gadget(0, 0);
    EXPECT_DOUBLE_EQ(g.channel(0).get(P("II")), 1.0);
    EXPECT_EQ(g.channel(0).size(), 1u);
    EXPECT_NEAR(g.channel(1).mass(), 0.0, 0.0);
}

TEST(Phenomenological, Masses) {
    auto g = phenomenological_gadget(0.1, 0.05);
    EXPECT_NEAR(g.channel(0).mass(), 0.788, 1e-12);
    EXPECT_NEAR(g.channel(1).mass(), 0.212, 1e-12);
    EXPECT_THROW(phenomenological_gadget(-0.1, 0.0), std::invalid_argument);
    EXPECT_THROW(phenomenological_gadget(0.1, 1.5), std::invalid_argument);
}

TEST(Phenomenological, InstrumentSumsToDataChannel) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0, 0.5);
    for (int i = 0; i < 20; i++) {
        double p = u(gen), q = u(gen);
        auto g = phenomenological_gadget(p, q);
        EXPECT_LT(max_diff(g.average(), independent_x(p)), 1e-15);
        EXPECT_NO_THROW(g.validate());
    }
}

TEST(Phenomenological, DetectorZeroMatchesClosedForm) {
    auto dets = detector_channels(phenomenological_gadget(0.1, 0.05));
    EXPECT_NEAR(dets.at(0).probability(), 0.7592, 1e-12);
    // Direct term-by-term: Lambda_I^2 (1-2q+2q^2) + 2(1-q) q Lambda_IX^2 + Lambda_IX Lambda_I.
    double p = 0.1, q = 0.05;
    double a = (1 - p) * (1 - p), b = p * p, c = p * (1 - p);
    double k0 = 1 - 2 * q + 2 * q * q, k1 = 2 * (1 - q) * q;
    EXPECT_NEAR(dets.at(0).dist.get(P("II")), k0 * (a * a + b * b) + k1 * 2 * c * c, 1e-15);
    EXPECT_NEAR(dets.at(0).dist.get(P("XX")), k0 * 2 * a * b + k1 * 2 * c * c, 1e-15);
    EXPECT_NEAR(dets.at(0).dist.get(P("IX")), c * (a + b), 1e-15);
    EXPECT_NEAR(dets.at(0).dist.get(P("XI")), c * (a + b), 1e-15);
}

TEST(Phenomenological, DetectorZeroClosedFormRandom) {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 20; i++) {
        double p = u(gen), q = u(gen);
        auto dets = detector_channels(phenomenological_gadget(p, q));
        EXPECT_LT(max_diff(dets.at(0).dist, phenomenological_d0_closed_form(p, q)), 1e-12);
    }
}

TEST(Reduce, Examples) {
    auto code = code_2_1_1();
    MeasurementLayout layout{{0, 1}, {{2, 'Z'}}};
    auto id = reduce_joint_to_syndrome_channels(PauliDistribution(3, {{"III", 1.0}}), layout, code);
    EXPECT_DOUBLE_EQ(id.channel(0).get(P("II")), 1.0);
    auto flip = reduce_joint_to_syndrome_channels(PauliDistribution(3, {{"IIX", 0.3}, {"III", 0.7}}), layout, code);
    EXPECT_DOUBLE_EQ(flip.channel(1).get(P("II")), 0.3);
    EXPECT_DOUBLE_EQ(flip.channel(0).get(P("II")), 0.7);
    MeasurementLayout bad{{0, 1}, {{1, 'Z'}}};
    EXPECT_THROW(reduce_joint_to_syndrome_channels(PauliDistribution(3, {{"III", 1.0}}), bad, code), DimensionError);
}

TEST(Reduce, PhenomenologicalJointMatches) {
    auto code = code_2_1_1();
    double p = 0.13, q = 0.07;
    PauliDistribution joint(3);
    for (const auto &[e, w] : independent_x(p)) {
        for (int flip = 0; flip < 2; flip++) {
            // The ancilla reads the data syndrome xored with the readout flip.
            int m = static_cast<int>(code.syndrome_bits(e)) ^ flip;
            PauliOperator full(3, e.x | (static_cast<uint64_t>(m) << 2), e.z);
            joint.add(full, w * (flip ? q : 1 - q));
        }
    }
    auto got = reduce_joint_to_syndrome_channels(joint, MeasurementLayout{{0, 1}, {{2, 'Z'}}}, code);
    auto want = phenomenological_gadget(p, q);
    for (uint64_t m : {0u, 1u}) {
        EXPECT_LT(max_diff(got.channel(m), want.channel(m)), 1e-15);
    }
}

TEST(Circuit, ErrorFreeFlagGadgetIsIdentity) {
    auto res = propagate_circuit_noise(flag_gadget_2_1_1(), code_2_1_1());
    EXPECT_DOUBLE_EQ(res.channels.channel(0).get(P("II")), 1.0);
    EXPECT_EQ(res.channels.channel(0).size(), 1u);
}

TEST(Circuit, AncillaFlipBeforeSecondCnotOnlyFlipsTheReadout) {
    CliffordCircuitSpec c;
    c.num_qubits = 3;
    c.num_bits = 1;
    c.data_in = {0, 1};
    c.data_out = {0, 1};
    c.prep_z(2).cnot(0, 2).error({2}, PauliDistribution(1, {{"X", 0.1}, {"I", 0.9}})).cnot(1, 2).measure_z(2, 0);
    auto res = propagate_circuit_noise(c, code_2_1_1());
    // X on the CNOT target does not spread to the data.
    EXPECT_NEAR(res.channels.channel(1).get(P("II")), 0.1, 1e-15);
    EXPECT_EQ(res.channels.channel(1).size(), 1u);
    EXPECT_NEAR(res.channels.channel(0).get(P("II")), 0.9, 1e-15);
}

TEST(Circuit, PropagationMatchesExhaustiveExpansion) {
    std::mt19937_64 gen(23);
    auto code = code_2_1_1();
    for (int trial = 0; trial < 5; trial++) {
        CliffordCircuitSpec c;
        c.num_qubits = 3;
        c.num_bits = 1;
        c.data_in = {0, 1};
        c.data_out = {0, 1};
        c.prep_z(2).cnot(0, 2).error({0, 2}, random_distribution(2, gen)).cnot(1, 2);
        c.error({1}, random_distribution(1, gen)).measure_z(2, 0);
        auto got = propagate_circuit_noise(c, code).channels;
        auto want = expand_exhaustively(c, code);
        for (uint64_t m : {0u, 1u}) {
            EXPECT_LT(max_diff(got.channel(m), want.channel(m)), 1e-15);
        }
    }
}

TEST(Circuit, FourTwoTwoMatchesMonteCarlo) {
    auto code = code_4_2_2();
    auto c = with_cnot_depolarizing(flag_gadget_4_2_2(), 1e-3);
    auto exact = propagate_circuit_noise(c, code).channels;
    const uint64_t samples = 1000000;
    auto mc = sample_circuit_noise(c, code, samples, 99);
    for (uint64_t m = 0; m < 4; m++) {
        double p = exact.channel(m).mass();
        double se = std::sqrt(std::max(p * (1 - p), 1e-12) / samples);
        EXPECT_NEAR(mc.channel(m).mass(), p, 3 * se + 1e-12) << "m=" << m;
    }
}

TEST(Circuit, BuiltinGadgetsPassStructuralCheck) {
    EXPECT_NO_THROW(check_gadget_circuit(flag_gadget_2_1_1(), code_2_1_1()));
    EXPECT_NO_THROW(check_gadget_circuit(lp_gadget_2_1_1(true), code_2_1_1()));
    EXPECT_NO_THROW(check_gadget_circuit(lp_gadget_2_1_1(false), code_2_1_1()));
    EXPECT_NO_THROW(check_gadget_circuit(flag_gadget_4_2_2(), code_4_2_2()));
    EXPECT_NO_THROW(check_gadget_circuit(lp_gadget_4_2_2(), code_4_2_2()));
    EXPECT_THROW(check_gadget_circuit(flag_gadget_2_1_1(), code_4_2_2()), std::exception);
}

TEST(DetectorChannels, Noiseless) {
    auto dets = detector_channels(phenomenological_gadget(0, 0));
    EXPECT_DOUBLE_EQ(dets.at(0).dist.get(P("II")), 1.0);
    EXPECT_EQ(dets.count(1) ? dets.at(1).probability() : 0.0, 0.0);
}

TEST(DetectorChannels, TwoGadgetEnumeration) {
    auto code = code_4_2_2();
    auto g = propagate_circuit_noise(with_cnot_depolarizing(flag_gadget_4_2_2(), 0.02), code).channels;
    // Starting in the code space, gadget 1 sees m1 and gadget 2 sees syndrome(E1) xor m2.
    std::map<uint64_t, PauliDistribution> want;
    for (const auto &[m1, d1] : g.channels) {
        for (const auto &[e1, w1] : d1) {
            for (const auto &[m2, d2] : g.channels) {
                for (const auto &[e2, w2] : d2) {
                    uint64_t det = m1 ^ (code.syndrome_bits(e1) ^ m2);
                    auto it = want.try_emplace(det, PauliDistribution(code.n())).first;
                    it->second.add(pauli_multiply(e1, e2), w1 * w2);
                }
            }
        }
    }
    auto got = detector_channels(g);
    for (const auto &[d, dist] : want) {
        EXPECT_LT(max_diff(got.at(d).dist, dist), 1e-12) << d;
    }
}

TEST(DetectorChannels, MarginalizationIsTwoAverageGadgets) {
    std::mt19937_64 gen(8);
    auto code = code_2_1_1();
    for (int trial = 0; trial < 10; trial++) {
        SyndromeChannelSet g(code);
        g.mutable_channel(0) = random_distribution(2, gen, 0.6);
        g.mutable_channel(1) = random_distribution(2, gen, 0.4);
        PauliDistribution sum(2);
        for (const auto &[d, ch] : detector_channels(g)) {
            for (const auto &[p, w] : ch.dist) {
                sum.add(p, w);
            }
        }
        EXPECT_LT(max_diff(sum, compose(g.average(), g.average())), 1e-12);
    }
}

TEST(Restrict, Examples) {
    auto code = code_2_1_1();
    PauliDistribution d(2, {{"II", 0.7}, {"IX", 0.3}});
    auto one = restrict_by_syndrome(d, Syndrome(1, 1), code);
    EXPECT_DOUBLE_EQ(one.get(P("IX")), 0.3);
    EXPECT_EQ(one.size(), 1u);
    auto zero = restrict_by_syndrome(d, Syndrome(0, 1), code);
    EXPECT_DOUBLE_EQ(zero.get(P("II")), 0.7);
    EXPECT_EQ(zero.size(), 1u);
}

TEST(Restrict, PartitionMassesSum) {
    std::mt19937_64 gen(4);
    auto code = code_4_2_2();
    for (int trial = 0; trial < 10; trial++) {
        auto d = random_distribution(4, gen);
        double total = 0;
        for (uint64_t s = 0; s < 4; s++) {
            total += restrict_by_syndrome(d, Syndrome(s, 2), code).mass();
        }
        EXPECT_NEAR(total, d.mass(), 1e-12);
    }
}

TEST(Compose, Examples) {
    PauliDistribution id(2, {{"II", 1.0}});
    PauliDistribution d(2, {{"II", 0.6}, {"XY", 0.4}});
    EXPECT_LT(max_diff(compose(id, d), d), 1e-16);
    auto xx = compose(PauliDistribution(2, {{"IX", 1.0}}), PauliDistribution(2, {{"IX", 1.0}}));
    EXPECT_DOUBLE_EQ(xx.get(P("II")), 1.0);
    EXPECT_THROW(compose(id, PauliDistribution(1, {{"I", 1.0}})), DimensionError);
}

TEST(Compose, EigenvaluesMultiply) {
    std::mt19937_64 gen(12);
    for (int trial = 0; trial < 1000; trial++) {
        int n = 1 + trial % 3;
        auto a = random_distribution(n, gen);
        auto b = random_distribution(n, gen);
        auto ab = compose(a, b);
        auto la = walsh_hadamard_full(to_dense(a), n, TransformDirection::kToEigenvalues);
        auto lb = walsh_hadamard_full(to_dense(b), n, TransformDirection::kToEigenvalues);
        auto lab = walsh_hadamard_full(to_dense(ab), n, TransformDirection::kToEigenvalues);
        for (size_t i = 0; i < la.size(); i++) {
            ASSERT_NEAR(lab[i], la[i] * lb[i], 1e-12);
        }
    }
}

TEST(LogicalSplit, Examples) {
    auto code = code_2_1_1();
    auto split = logical_split(PauliDistribution(2, {{"II", 0.9}, {"ZI", 0.05}, {"IX", 0.03}, {"XI", 0.02}}), code);
    EXPECT_DOUBLE_EQ(split.parts.at(0).at(0), 0.9);
    EXPECT_DOUBLE_EQ(split.parts.at(0).at(code.logical_bits(P("ZI"))), 0.05);
    EXPECT_DOUBLE_EQ(split.parts.at(1).at(0), 0.03);
    // XI = IX . XX, so it carries the X logical behind the IX pure error.
    EXPECT_DOUBLE_EQ(split.parts.at(1).at(code.logical_bits(P("XX"))), 0.02);
    auto id = logical_split(PauliDistribution(2, {{"II", 1.0}}), code);
    EXPECT_DOUBLE_EQ(id.parts.at(0).at(0), 1.0);
}

TEST(LogicalSplit, MassesMatchCosetTotals) {
    std::mt19937_64 gen(6);
    auto code = code_4_2_2();
    auto d = random_distribution(4, gen, 0.8);
    auto split = logical_split(d, code);
    auto cosets = coset_probabilities_from_eigenvalues(normalizer_eigenvalues(d, code), code);
    for (const auto &[e, logicals] : split.parts) {
        for (const auto &[l, w] : logicals) {
            uint64_t idx = e | (l << code.num_stabilizers());
            EXPECT_NEAR(w, cosets[idx], 1e-12);
        }
    }
    EXPECT_NEAR(split.mass(), d.mass(), 1e-12);
}

TEST(BoundChannels, Examples) {
    LogicalSplit s;
    s.k = 1;
    s.parts[0] = {{0, 0.95}, {2, 0.05}};
    s.parts[1] = {{0, 0.01}};
    auto b = bound_channels(s);
    EXPECT_NEAR(b.post_selected[0], 0.95, 1e-15);
    EXPECT_NEAR(b.post_selected[2], 0.05, 1e-15);
    EXPECT_NEAR(b.ideal_decoder[0], 0.96 / 1.01, 1e-15);
    EXPECT_NEAR(b.ideal_decoder[2], 0.05 / 1.01, 1e-15);

    LogicalSplit noiseless;
    noiseless.k = 1;
    noiseless.parts[0] = {{0, 1.0}};
    auto n = bound_channels(noiseless);
    EXPECT_DOUBLE_EQ(n.post_selected[0], 1.0);
    EXPECT_DOUBLE_EQ(n.ideal_decoder[0], 1.0);

    LogicalSplit empty;
    empty.k = 1;
    empty.parts[1] = {{0, 1.0}};
    EXPECT_THROW(bound_channels(empty), UndefinedChannelError);
}

namespace {

/// Sums every event history of length + 1 gadgets with all overlapping detectors zero.
OverlapResult brute_overlap(const SyndromeChannelSet &g, int length) {
    const auto &code = g.code;
    long double identity = 0, trivial = 0, accepted = 0;
    std::function<void(int, uint64_t, PauliOperator, long double)> rec = [&](int step, uint64_t prev, PauliOperator acc,
                                                                        long double w) {
        if (step == length + 1) {
            accepted += w;
            if (code.syndrome_bits(acc) == 0) {
                trivial += w;
                if (code.stabilizer_coefficients(acc).has_value()) {
                    identity += w;
                }
            }
            return;
        }
        for (const auto &[m, d] : g.channels) {
            uint64_t s = code.syndrome_bits(acc) ^ m;
            if (s != prev) {
                continue;
            }
            for (const auto &[p, pw] : d) {
                rec(step + 1, s, pauli_multiply(acc, p), w * pw);
            }
        }
    };
    rec(0, 0, PauliOperator::identity(code.n()), 1.0);
    return {static_cast<double>(identity / trivial), static_cast<double>(accepted)};
}

}  // namespace

TEST(Overlap, NoiselessIsPerfect) {
    auto g = phenomenological_gadget(0, 0);
    for (int len = 0; len < 5; len++) {
        auto r = overlapping_sequence_channel(g, len);
        EXPECT_DOUBLE_EQ(r.fidelity, 1.0);
        EXPECT_DOUBLE_EQ(r.retained_fraction, 1.0);
    }
}

TEST(Overlap, SingleGadgetIsRestrictedChannel) {
    auto g = phenomenological_gadget(0.1, 0.05);
    auto r = overlapping_sequence_channel(g, 0);
    auto p0 = g.channel(0);
    auto code = code_2_1_1();
    auto trivial = restrict_by_syndrome(p0, Syndrome(0, 1), code);
    EXPECT_NEAR(r.fidelity, trivial.get(P("II")) / trivial.mass(), 1e-15);
    EXPECT_NEAR(r.retained_fraction, p0.mass(), 1e-15);
}

TEST(Overlap, MatchesBruteForce) {
    auto code = code_2_1_1();
    std::vector<std::pair<SyndromeChannelSet, int>> cases{
        {phenomenological_gadget(0.1, 0.05), 3},
        {propagate_circuit_noise(with_cnot_depolarizing(flag_gadget_2_1_1(), 0.02), code).channels, 3},
        {propagate_circuit_noise(with_cnot_depolarizing(flag_gadget_4_2_2(), 0.01), code_4_2_2()).channels, 1}};
    for (const auto &[g, max_len] : cases) {
        for (int len = 0; len <= max_len; len++) {
            auto got = overlapping_sequence_channel(g, len);
            auto want = brute_overlap(g, len);
            EXPECT_NEAR(got.fidelity, want.fidelity, 1e-12);
            EXPECT_NEAR(got.retained_fraction, want.retained_fraction, 1e-12);
        }
    }
}

TEST(Overlap, MonotoneForPhenomenological) {
    auto g = phenomenological_gadget(0.05, 0.02);
    double prev = 1.0;
    for (int len = 0; len <= 30; len++) {
        double f = overlapping_sequence_channel(g, len).fidelity;
        EXPECT_LE(f, prev + 1e-15);
        prev = f;
    }
}

TEST(Validate, NamesTheFailedInvariant) {
    SyndromeChannelSet g(code_2_1_1());
    g.mutable_channel(0) = PauliDistribution(2, {{"II", 0.6}});
    g.mutable_channel(1) = PauliDistribution(2, {{"II", 0.5}});
    try {
        g.validate();
        FAIL() << "mass 1.1 accepted";
    } catch (const InvariantError &e) {
        EXPECT_NE(std::string(e.what()).find("mass"), std::string::npos);
    }
}
