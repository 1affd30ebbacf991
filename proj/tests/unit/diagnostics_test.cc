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

#include <random>

#include "lsd/diagnostics.h"

using namespace lsd;

namespace {

/// Detector sequences from a stationary two-state Markov chain with
/// P(1 | previous 1) = a and P(1 | previous 0) = b.
std::vector<ShotRecord> markov_shots(double a, double b, int r, int shots, uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0, 1);
    double pi = b / (1 - a + b);
    std::vector<ShotRecord> out;
    for (int s = 0; s < shots; s++) {
        ShotRecord rec;
        rec.r = r;
        rec.setting = s % 2;
        int d = u(gen) < pi;
        for (int i = 0; i < r; i++) {
            if (i > 0) {
                d = u(gen) < (d ? a : b);
            }
            rec.detectors.push_back(d);
            rec.syndromes.push_back(0);
            rec.syndromes.push_back(d);
        }
        out.push_back(rec);
    }
    return out;
}

std::vector<ShotRecord> phenomenological_shots(int r, uint64_t shots, uint64_t seed) {
    ExperimentConfig c;
    c.gadget.kind = GadgetKind::kPhenomenological;
    c.gadget.p = 0.05;
    c.gadget.q = 0.02;
    c.lengths = {r};
    c.shots_per_length = {shots};
    c.settings = {"X", "Y", "Z"};
    c.seed = seed;
    return run_experiment(Experiment(c));
}

const std::vector<std::string> kTwo{"a", "b"};
const std::vector<std::string> kThree{"X", "Y", "Z"};

}  // namespace

TEST(Wilson, Examples) {
    auto half = wilson_interval(5, 10);
    EXPECT_NEAR(half.low, 0.2366, 1e-4);
    EXPECT_NEAR(half.high, 0.7634, 1e-4);
    auto none = wilson_interval(0, 10);
    EXPECT_DOUBLE_EQ(none.low, 0.0);
    EXPECT_GT(none.high, 0.2);
    auto all = wilson_interval(10, 10);
    EXPECT_DOUBLE_EQ(all.high, 1.0);
    auto wide = wilson_interval(5, 10, 0.99);
    EXPECT_LT(wide.low, half.low);
}

TEST(Homogeneity, KnownChiSquare) {
    auto r = homogeneity_test({{"a", 100, 10}, {"b", 100, 30}});
    EXPECT_NEAR(r.chi2, 12.5, 1e-12);
    EXPECT_EQ(r.dof, 1);
    EXPECT_NEAR(r.p_value, 4.0695e-4, 1e-7);
    EXPECT_TRUE(r.violation);
}

TEST(Homogeneity, DegenerateInputsPass) {
    auto same = homogeneity_test({{"a", 500, 40}, {"b", 500, 40}, {"c", 500, 40}});
    EXPECT_DOUBLE_EQ(same.p_value, 1.0);
    EXPECT_FALSE(same.violation);
    auto silent = homogeneity_test({{"a", 500, 0}, {"b", 300, 0}});
    EXPECT_DOUBLE_EQ(silent.p_value, 1.0);
    auto saturated = homogeneity_test({{"a", 50, 50}, {"b", 30, 30}});
    EXPECT_DOUBLE_EQ(saturated.p_value, 1.0);
}

TEST(Homogeneity, Errors) {
    EXPECT_THROW(homogeneity_test({{"a", 10, 1}}), DiagnosticsError);
    EXPECT_THROW(homogeneity_test({{"a", 10, 1}, {"b", 0, 0}}), DiagnosticsError);
}

TEST(Trend, DetectsDrift) {
    std::vector<ShotRecord> shots;
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int s = 0; s < 20000; s++) {
        ShotRecord rec;
        rec.r = 10;
        for (int i = 0; i < 10; i++) {
            rec.detectors.push_back(u(gen) < 0.02 + 0.01 * i);
        }
        shots.push_back(rec);
    }
    auto fits = click_rate_trend(shots, {"only"});
    ASSERT_FALSE(fits.empty());
    const auto &pooled = fits.back();
    EXPECT_EQ(pooled.state, "pooled");
    EXPECT_EQ(pooled.series.size(), 10u);
    EXPECT_NEAR(pooled.slope, 0.01, 4 * pooled.slope_stderr);
    EXPECT_TRUE(pooled.violation);
}

TEST(Trend, Errors) {
    auto shots = markov_shots(0.1, 0.1, 2, 100, 3);
    EXPECT_THROW(click_rate_trend(shots, kTwo), DiagnosticsError);
    EXPECT_THROW(pair_correlation(markov_shots(0.1, 0.1, 3, 100, 3)), DiagnosticsError);
}

TEST(PairCorrelation, MarkovChainConditionals) {
    const double a = 0.3, b = 0.05;
    auto shots = markov_shots(a, b, 12, 40000, 5);
    auto lags = pair_correlation(shots);
    ASSERT_EQ(lags.size(), 3u);
    double pi = b / (1 - a + b);
    for (const auto &l : lags) {
        double want = pi + (1 - pi) * std::pow(a - b, l.lag);
        ASSERT_TRUE(l.conditional);
        double se = std::sqrt(want * (1 - want) / l.given);
        // Pairs overlap within a shot, so allow extra room over the binomial error.
        EXPECT_NEAR(*l.conditional, want, 6 * se) << "lag " << l.lag;
        EXPECT_NEAR(l.base_rate, pi, 0.01);
        EXPECT_LE(l.ci.low, *l.conditional);
        EXPECT_GE(l.ci.high, *l.conditional);
    }
    EXPECT_TRUE(lags[0].violation);
    EXPECT_GT(*lags[0].z, 10);
}

TEST(PairCorrelation, IndependentClicksAreNull) {
    auto lags = pair_correlation(markov_shots(0.08, 0.08, 12, 20000, 6));
    for (const auto &l : lags) {
        ASSERT_TRUE(l.z);
        EXPECT_LT(std::abs(*l.z), 3.5) << l.lag;
    }
}

TEST(PairCorrelation, NoClicksGivesNoConditional) {
    auto lags = pair_correlation(markov_shots(0.0, 0.0, 6, 100, 7));
    for (const auto &l : lags) {
        EXPECT_FALSE(l.conditional);
        EXPECT_FALSE(l.violation);
    }
}

TEST(Diagnose, PauliNoisePasses) {
    auto shots = phenomenological_shots(15, 3000, 21);
    auto report = diagnose(shots, kThree);
    EXPECT_EQ(report.r, 15);
    EXPECT_EQ(report.shots, 9000u);
    ASSERT_TRUE(report.homogeneity);
    EXPECT_TRUE(report.passed()) << (report.violations.empty() ? "" : report.violations.front());
    EXPECT_EQ(report.correlations.size(), 3u);
}

TEST(Diagnose, FlagsCorrelatedClicks) {
    auto report = diagnose(markov_shots(0.4, 0.05, 10, 20000, 8), kTwo);
    EXPECT_FALSE(report.passed());
}

TEST(Diagnose, ShortSequencesAreSkippedWithNotes) {
    auto report = diagnose(markov_shots(0.1, 0.1, 3, 500, 9), kTwo);
    EXPECT_TRUE(report.correlations.empty());
    EXPECT_FALSE(report.notes.empty());
    EXPECT_THROW(diagnose({}, kTwo), DiagnosticsError);
}

TEST(Diagnose, NullFalsePositiveRateIsNominal) {
    // 3-sigma flags across the three lag tests and the pooled slope of 60 null runs.
    int flags = 0, tests = 0;
    for (uint64_t seed = 100; seed < 160; seed++) {
        auto report = diagnose(phenomenological_shots(15, 1000, seed), kThree);
        for (const auto &l : report.correlations) {
            flags += l.violation;
            tests++;
        }
        flags += report.trend.back().violation;
        tests++;
    }
    // Expected 0.0027 * 240 = 0.65; four or more flags has probability below 0.5 %.
    EXPECT_LE(flags, 3) << tests;
}
