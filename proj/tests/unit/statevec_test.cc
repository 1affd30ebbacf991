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

#include <cmath>

#include "lsd/statevec.h"

using namespace lsd;

namespace {

PauliOperator P(const char *s) { return PauliOperator::from_string(s); }

double expectation(const DenseState &psi, const PauliOperator &p) {
    DenseState phi = psi;
    phi.apply_pauli(p);
    std::complex<double> acc = 0;
    for (size_t i = 0; i < psi.amplitudes().size(); i++) {
        acc += std::conj(psi.amplitudes()[i]) * phi.amplitudes()[i];
    }
    EXPECT_NEAR(acc.imag(), 0.0, 1e-12);
    return acc.real();
}

}  // namespace

TEST(DenseState, GatesAndProbabilities) {
    DenseState s(2);
    EXPECT_NEAR(s.norm(), 1.0, 1e-15);
    s.apply_h(0);
    EXPECT_NEAR(s.probability_one(0), 0.5, 1e-15);
    s.apply_cnot(0, 1);
    EXPECT_NEAR(expectation(s, P("ZZ")), 1.0, 1e-12);
    EXPECT_NEAR(expectation(s, P("XX")), 1.0, 1e-12);
    s.apply_swap(0, 1);
    EXPECT_NEAR(expectation(s, P("ZZ")), 1.0, 1e-12);

    DenseState r(1);
    r.apply_rotation(P("X"), 0.3);
    EXPECT_NEAR(r.probability_one(0), std::sin(0.3) * std::sin(0.3), 1e-15);
    EXPECT_NEAR(r.norm(), 1.0, 1e-15);
    EXPECT_THROW(DenseState(0), DimensionError);
    EXPECT_THROW(DenseState(kMaxDenseQubits + 1), DimensionError);
}

TEST(DenseState, MeasurementCollapses) {
    DenseState s(2);
    s.apply_h(0);
    s.apply_cnot(0, 1);
    Rng rng(1, kStreamStatevec, 0);
    int a = s.measure_z(0, rng);
    EXPECT_NEAR(s.probability_one(1), a, 1e-12);
    EXPECT_NEAR(s.norm(), 1.0, 1e-12);
    s.reset(1, rng);
    EXPECT_NEAR(s.probability_one(1), 0.0, 1e-12);
}

TEST(LogicalInput, EigenstatesOfTheCode) {
    auto code = code_2_1_1();
    const auto &lx = code.logical_x()[0];
    const auto &lz = code.logical_z()[0];
    for (char axis : {'X', 'Y', 'Z'}) {
        auto psi = logical_input_state(axis);
        EXPECT_NEAR(expectation(psi, P("ZZ")), -1.0, 1e-12);
        PauliOperator l = axis == 'X' ? lx : axis == 'Z' ? lz : pauli_multiply(lx, lz);
        EXPECT_NEAR(std::abs(expectation(psi, l)), 1.0, 1e-12) << axis;
    }
    EXPECT_THROW(logical_input_state('Q'), std::invalid_argument);
}

TEST(Twirl, SingleQubitRotation) {
    CoherentErrorSpec e;
    e.eta = 1.0;
    e.rotations = {{P("X"), 0.3}};
    auto t = twirl_channel_numerically(e);
    EXPECT_NEAR(t.get(P("I")), std::cos(0.3) * std::cos(0.3), 1e-12);
    EXPECT_NEAR(t.get(P("X")), std::sin(0.3) * std::sin(0.3), 1e-12);
    EXPECT_NEAR(t.get(P("Z")), 0.0, 1e-12);
}

TEST(Twirl, MixtureWithPauliPart) {
    auto e = CoherentErrorSpec::transversal('Y', 0.2, 2, 0.25);
    e.pauli = PauliDistribution(2, {{"ZI", 0.1}});
    auto t = twirl_channel_numerically(e);
    double c2 = std::cos(0.2) * std::cos(0.2), s2 = std::sin(0.2) * std::sin(0.2);
    EXPECT_NEAR(t.get(P("YY")), 0.25 * s2 * s2, 1e-12);
    EXPECT_NEAR(t.get(P("IY")), 0.25 * c2 * s2, 1e-12);
    EXPECT_NEAR(t.get(P("ZI")), 0.75 * 0.1, 1e-12);
    EXPECT_NEAR(t.get(P("II")), 0.75 * 0.9 + 0.25 * c2 * c2, 1e-12);
    EXPECT_NEAR(t.mass(), 1.0, 1e-12);
}

TEST(Clicks, PauliErrorsAreStateIndependent) {
    auto c = flag_gadget_2_1_1();
    CoherentErrorSpec e;
    e.pauli = PauliDistribution(2, {{"IX", 0.03}, {"ZI", 0.02}, {"YY", 0.01}});
    for (char in : {'X', 'Y', 'Z'}) {
        EXPECT_NEAR(exact_click_probability(c, e, in, false), 0.03, 1e-12) << in;
        EXPECT_NEAR(exact_click_probability(c, e, in, true), 0.03, 1e-12) << in;
    }
}

TEST(Clicks, TransversalRotationDependsOnTheInput) {
    auto c = flag_gadget_2_1_1();
    auto e = CoherentErrorSpec::transversal('X', 0.3, 2, 0.05);
    double x = exact_click_probability(c, e, 'X', false);
    double z = exact_click_probability(c, e, 'Z', false);
    EXPECT_GT(std::abs(x - z), 5e-3);
}

TEST(Clicks, FrameRandomizationEqualsTheTwirl) {
    auto c = flag_gadget_2_1_1();
    for (char axis : {'X', 'Y', 'Z'}) {
        auto e = CoherentErrorSpec::transversal(axis, 0.3, 2, 0.05);
        CoherentErrorSpec twirled;
        twirled.pauli = twirl_channel_numerically(e);
        for (char in : {'X', 'Y', 'Z'}) {
            EXPECT_NEAR(exact_click_probability(c, e, in, true), exact_click_probability(c, twirled, in, false),
                        1e-12)
                << axis << in;
        }
    }
}

TEST(Clicks, MonteCarloMatchesExact) {
    auto c = flag_gadget_2_1_1();
    auto e = CoherentErrorSpec::transversal('X', 0.5, 2, 0.2);
    for (bool pfr : {false, true}) {
        for (char in : {'X', 'Z'}) {
            auto mc = simulate_gadget_clicks(c, e, in, pfr, 20000, 3);
            double p = exact_click_probability(c, e, in, pfr);
            EXPECT_EQ(mc.shots, 20000u);
            EXPECT_NEAR(mc.rate, p, 4.5 * std::sqrt(p * (1 - p) / 20000)) << in << pfr;
            EXPECT_EQ(simulate_gadget_clicks(c, e, in, pfr, 20000, 3).clicks, mc.clicks);
        }
    }
}

TEST(Clicks, InvalidInputs) {
    auto c = flag_gadget_2_1_1();
    auto e = CoherentErrorSpec::transversal('X', 0.3, 2, 1.5);
    EXPECT_THROW(exact_click_probability(c, e, 'X', false), std::invalid_argument);
    auto wrong = CoherentErrorSpec::transversal('X', 0.3, 3, 0.1);
    EXPECT_THROW(exact_click_probability(c, wrong, 'X', false), DimensionError);
}
