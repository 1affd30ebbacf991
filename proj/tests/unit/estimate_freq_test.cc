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

#include "lsd/estimate_freq.h"
#include "lsd/transform.h"

using namespace lsd;

namespace {

std::vector<AggregatedCell> exact_cells(double a, double b, const std::vector<double> &lambda,
                                        const std::vector<std::vector<int>> &counts, uint64_t n) {
    std::vector<AggregatedCell> out;
    for (size_t i = 0; i < counts.size(); i++) {
        AggregatedCell c;
        c.cell_id = static_cast<int>(i);
        c.counts = counts[i];
        c.n = n;
        double prod = 1;
        for (size_t d = 0; d < lambda.size(); d++) {
            prod *= std::pow(lambda[d], counts[i][d]);
        }
        c.q_bar = a * prod + b;
        c.var_q_bar = (1 - c.q_bar * c.q_bar) / n;
        out.push_back(c);
    }
    return out;
}

const std::vector<std::vector<int>> kGrid{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 1}, {2, 2}, {4, 0}};

ExperimentConfig phenomenological_run(uint64_t shots, uint64_t seed) {
    ExperimentConfig c;
    c.gadget.kind = GadgetKind::kPhenomenological;
    c.gadget.p = 0.1;
    c.gadget.q = 0.05;
    c.spam.meas = PauliDistribution::depolarizing(2, 0.03);
    c.lengths = {1, 2, 4, 8};
    c.shots_per_length.assign(4, shots);
    c.settings = {"X", "Y", "Z"};
    c.seed = seed;
    return c;
}

/// Depolarizing circuit noise keeps every eigenvalue inside (-1, 1).
ExperimentConfig circuit_run(uint64_t shots, uint64_t seed) {
    auto c = phenomenological_run(shots, seed);
    c.gadget.kind = GadgetKind::kCircuit;
    c.gadget.circuit_name = "flag_2_1_1";
    c.gadget.cnot_depolarizing = 0.03;
    return c;
}

/// X-type noise leaves lambda(XX) = 1, where A and B are not separable; the truth has B = 0.
FreqOptions fixed_offset() {
    FreqOptions o;
    o.fit.fix_b = true;
    return o;
}

}  // namespace

TEST(ProjectSimplex, Examples) {
    EXPECT_EQ(project_simplex({0.5, 0.5}), (std::vector<double>{0.5, 0.5}));
    auto a = project_simplex({2.0, 0.0});
    EXPECT_NEAR(a[0], 1.0, 1e-15);
    EXPECT_NEAR(a[1], 0.0, 1e-15);
    auto b = project_simplex({-0.1, 0.6, 0.6});
    EXPECT_NEAR(b[0], 0.0, 1e-15);
    EXPECT_NEAR(b[1], 0.5, 1e-15);
    EXPECT_NEAR(b[2], 0.5, 1e-15);
}

TEST(ProjectSimplex, IsTheNearestSimplexPoint) {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> g(0.25, 0.3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; trial++) {
        std::vector<double> v(4);
        for (auto &x : v) {
            x = g(gen);
        }
        auto p = project_simplex(v);
        double sum = 0, dist = 0;
        for (size_t i = 0; i < 4; i++) {
            EXPECT_GE(p[i], 0.0);
            sum += p[i];
            dist += (p[i] - v[i]) * (p[i] - v[i]);
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
        for (int k = 0; k < 20; k++) {
            std::vector<double> y(4);
            double t = 0;
            for (auto &x : y) {
                x = -std::log(u(gen));
                t += x;
            }
            double dy = 0;
            for (size_t i = 0; i < 4; i++) {
                dy += (y[i] / t - v[i]) * (y[i] / t - v[i]);
            }
            EXPECT_LE(dist, dy + 1e-12);
        }
    }
}

TEST(FitWls, RecoversExactDecay) {
    auto cells = exact_cells(0.93, 0, {0.97, 0.6}, kGrid, 1000000);
    auto fit = fit_wls_log(cells, 2);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.a, 0.93, 1e-10);
    EXPECT_NEAR(fit.lambda[0], 0.97, 1e-10);
    EXPECT_NEAR(fit.lambda[1], 0.6, 1e-10);
    EXPECT_NEAR(fit.chi2, 0.0, 1e-12);
    EXPECT_EQ(fit.dof, static_cast<int>(kGrid.size()) - 3);
    EXPECT_GT(fit.stderr_lambda(0), 0.0);
}

TEST(FitWls, DropsNonPositiveCells) {
    auto cells = exact_cells(0.9, 0, {0.9, 0.5}, kGrid, 1000);
    cells.push_back({99, {5, 5}, 1000, -0.01, 1e-3});
    auto fit = fit_wls_log(cells, 2);
    EXPECT_EQ(fit.dropped_cells, 1);
    EXPECT_EQ(fit.dropped_shots, 1000u);
    EXPECT_NEAR(fit.dropped_fraction, 1.0 / (kGrid.size() + 1), 1e-15);
}

TEST(FitWls, StderrMatchesDeltaMethodForOneParameter) {
    // One region: q_bar = A lambda^r with two lengths gives an exactly determined design.
    auto cells = exact_cells(1.0, 0, {0.8}, {{1}, {2}}, 10000);
    auto fit = fit_wls_log(cells, 1);
    // log lambda = log f2 - log f1, Var(log f) = (1 - f^2) / (N f^2).
    double f1 = 0.8, f2 = 0.64;
    double var_log = (1 - f1 * f1) / (1e4 * f1 * f1) + (1 - f2 * f2) / (1e4 * f2 * f2);
    EXPECT_NEAR(fit.stderr_lambda(0), 0.8 * std::sqrt(var_log), 1e-12);
}

TEST(FitWls, UnderIdentifiedNamesTheParameter) {
    auto cells = exact_cells(0.9, 0, {0.9, 0.5}, {{1, 0}, {2, 0}, {3, 0}}, 1000);
    try {
        fit_wls_log(cells, 2);
        FAIL() << "rank-deficient design accepted";
    } catch (const UnderIdentifiedError &e) {
        EXPECT_NE(std::string(e.what()).find("lambda[D=1]"), std::string::npos) << e.what();
    }
    EXPECT_THROW(fit_wls_log({}, 2), EmptyInputError);
}

TEST(FitNonlinear, RecoversOffsetModel) {
    auto cells = exact_cells(0.85, 0.05, {0.95, 0.4}, kGrid, 1000000);
    FitOptions opt;
    auto init = fit_wls_log(cells, 2, opt);
    auto fit = fit_nonlinear(cells, 2, init, opt);
    EXPECT_TRUE(fit.converged) << fit.message;
    EXPECT_FALSE(fit.b_fixed);
    EXPECT_NEAR(fit.a, 0.85, 1e-7);
    EXPECT_NEAR(fit.b, 0.05, 1e-7);
    EXPECT_NEAR(fit.lambda[0], 0.95, 1e-7);
    EXPECT_NEAR(fit.lambda[1], 0.4, 1e-7);
}

TEST(FitNonlinear, FixedOffsetStaysFixed) {
    auto cells = exact_cells(0.85, 0.0, {0.95, 0.4}, kGrid, 100000);
    FitOptions opt;
    opt.fix_b = true;
    auto fit = fit_nonlinear(cells, 2, fit_wls_log(cells, 2, opt), opt);
    EXPECT_TRUE(fit.b_fixed);
    EXPECT_DOUBLE_EQ(fit.b, 0.0);
    EXPECT_NEAR(fit.lambda[0], 0.95, 1e-8);
}

TEST(FitNonlinear, RespectsBounds) {
    // Eigenvalues above one are outside the model; the fit pins them to the bound.
    auto cells = exact_cells(0.9, 0, {1.0, 0.5}, kGrid, 1000);
    for (auto &c : cells) {
        if (c.counts[0] > 0 && c.counts[1] == 0) {
            c.q_bar = std::min(0.999, c.q_bar * std::pow(1.02, c.counts[0]));
        }
    }
    FitOptions opt;
    opt.fix_b = true;
    auto fit = fit_nonlinear(cells, 2, fit_wls_log(cells, 2, opt), opt);
    EXPECT_LE(fit.lambda[0], 1.0);
    EXPECT_LE(fit.a, 1.0);
}

TEST(DetectorRates, Counts) {
    std::vector<ShotRecord> shots(2);
    shots[0].detectors = {0, 0, 1};
    shots[1].detectors = {0};
    auto r = estimate_detector_rates(shots, 2);
    EXPECT_DOUBLE_EQ(r.at(0).p, 0.75);
    EXPECT_DOUBLE_EQ(r.at(1).p, 0.25);
    EXPECT_NEAR(r.at(0).stderr_, std::sqrt(0.75 * 0.25 / 4), 1e-15);
    EXPECT_THROW(estimate_detector_rates({}, 2), EmptyInputError);
    EXPECT_THROW(estimate_detector_rates(std::vector<ShotRecord>(3), 2), EmptyInputError);
}

TEST(Pipeline, RecoversInjectedTruth) {
    Experiment exp(phenomenological_run(20000, 31));
    auto shots = run_experiment(exp);
    auto est = run_freq_pipeline(shots, exp.code(), exp.settings(), fixed_offset());
    auto dets = detector_channels(exp.gadget());
    const auto &code = exp.code();
    for (const auto &fit : est.fit.per_q) {
        ASSERT_TRUE(fit.has_data);
        for (int d = 0; d < 2; d++) {
            double truth = eigenvalue_of_distribution(dets.at(d).dist, fit.q) / dets.at(d).probability();
            EXPECT_NEAR(fit.lambda[d], truth, 4.5 * fit.stderr_lambda(d) + 1e-9) << fit.q.str() << " D=" << d;
        }
        double a = spam_coefficients(exp.config().spam, fit.q).first;
        EXPECT_NEAR(fit.a, a, 4.5 * std::sqrt(fit.cov(0, 0)) + 1e-9) << fit.q.str();
    }
    for (const auto &det : est.channels.detectors) {
        auto truth = coset_marginals(dets.at(det.detector).dist.normalized(), code);
        for (size_t c = 0; c < truth.size(); c++) {
            double se = std::sqrt(std::max(det.coset_cov(c, c), 0.0));
            EXPECT_NEAR(det.coset[c], truth[c], 4.5 * se + 1e-9) << "D=" << det.detector << " c=" << c;
        }
        double p = dets.at(det.detector).probability();
        EXPECT_NEAR(det.rate.p, p, 4.5 * det.rate.stderr_);
    }
}

TEST(Pipeline, NoiselessDataGivesUnitEigenvalues) {
    auto cfg = phenomenological_run(200, 1);
    cfg.gadget.p = 0;
    cfg.gadget.q = 0.2;
    cfg.spam = {};
    Experiment exp(cfg);
    auto est = run_freq_pipeline(run_experiment(exp), exp.code(), exp.settings(), fixed_offset());
    for (const auto &fit : est.fit.per_q) {
        for (double l : fit.lambda) {
            EXPECT_NEAR(l, 1.0, 1e-9) << fit.q.str();
        }
    }
    EXPECT_NEAR(est.channels.detectors[0].coset[0], 1.0, 1e-9);
}

TEST(Pipeline, MissingSettingIsIncomplete) {
    auto cfg = phenomenological_run(500, 2);
    cfg.settings = {"X"};
    Experiment exp(cfg);
    EXPECT_THROW(run_freq_pipeline(run_experiment(exp), exp.code(), exp.settings(), fixed_offset()), IncompleteInputError);
    EXPECT_THROW(run_freq_pipeline({}, exp.code(), exp.settings()), EmptyInputError);
}

TEST(Bootstrap, DeterministicAndCloseToAnalytic) {
    Experiment exp(circuit_run(4000, 9));
    auto shots = run_experiment(exp);
    auto est = run_freq_pipeline(shots, exp.code(), exp.settings(), fixed_offset());
    auto b1 = bootstrap(est.table, 200, 77, fixed_offset());
    auto b2 = bootstrap(est.table, 200, 77, fixed_offset());
    EXPECT_EQ(b1.replicas, 200);
    EXPECT_TRUE(b1.cov.isApprox(b2.cov));
    ASSERT_EQ(b1.mean.size(), est.fit.lambda_cov.rows());
    for (Eigen::Index i = 0; i < b1.mean.size(); i++) {
        double analytic = std::sqrt(est.fit.lambda_cov(i, i));
        EXPECT_NEAR(b1.stderr_at(i) / analytic, 1.0, 0.35) << i;
        EXPECT_LE(b1.ci_low(i), b1.ci_high(i));
    }
    EXPECT_THROW(bootstrap(est.table, 0, 1), std::invalid_argument);
}

TEST(JointCovariance, DiagonalMatchesPerFit) {
    Experiment exp(phenomenological_run(3000, 4));
    auto est = run_freq_pipeline(run_experiment(exp), exp.code(), exp.settings(), fixed_offset());
    int s = est.fit.num_detectors;
    for (size_t j = 0; j < est.fit.per_q.size(); j++) {
        for (int d = 0; d < s; d++) {
            const auto &f = est.fit.per_q[j];
            EXPECT_NEAR(est.fit.lambda_cov(j * s + d, j * s + d), f.cov(2 + d, 2 + d),
                        1e-6 * f.cov(2 + d, 2 + d) + 1e-15);
        }
    }
    Eigen::MatrixXd sym = est.fit.lambda_cov - est.fit.lambda_cov.transpose();
    EXPECT_LT(sym.cwiseAbs().maxCoeff(), 1e-15);
}
