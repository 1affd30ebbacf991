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


#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsd/estimate_freq.h"

namespace lsd {

struct NotImplementedError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Beta(mu * nu, (1 - mu) * nu) on u = (lambda + 1) / 2.
struct ScaledBetaPrior {
    double mu = 0.5;
    double nu = 2.0;
};

/// Keyed by Q.str(), one prior per detector value. Missing entries are uniform.
using EigenvaluePriors = std::map<std::string, std::vector<ScaledBetaPrior>>;

struct BayesModelSpec {
    EigenvaluePriors priors;
    double alpha_a = 0.5;
    double alpha_b = 0.5;
    double alpha_c = 1.0;
    /// Cells with fewer shots share one pooled nu.
    uint64_t pooled_nu_below = 5;
    /// Dirichlet directly on error probabilities; reserved, not implemented.
    bool dirichlet_on_probabilities = false;
};

struct BayesCell {
    std::vector<int> counts;
    uint64_t n = 0;
    /// Shots with Q = +1.
    uint64_t successes = 0;
};

/// One observable's hierarchical model. Parameters live on the probability
/// scale p(Q = +1) = A prod lambda~^n + B, with (A, B, C) on the simplex.
struct BayesModel {
    PauliOperator q;
    int num_detectors = 0;
    std::vector<BayesCell> cells;
    std::vector<ScaledBetaPrior> lambda_priors;
    double alpha_a = 0.5;
    double alpha_b = 0.5;
    double alpha_c = 1.0;
    std::vector<int> nu_group;
    /// Gamma(shape, 1) prior per nu group.
    std::vector<double> nu_shape;
    bool likelihood_enabled = true;
    /// Starting point (lambda..., A, B) on the probability scale.
    std::vector<double> initial;

    int num_groups() const { return static_cast<int>(nu_shape.size()); }
    /// NaN when the mean leaves (0, 1).
    double cell_mean(const std::vector<double> &lambda, double a, double b, size_t cell) const;
    /// Log density of (lambda, A, B, nu) with every q_bar integrated out, up to a constant.
    double log_density(const std::vector<double> &lambda, double a, double b, const std::vector<double> &nu) const;
};

BayesModel build_model(const PauliOperator &q,
                       const std::vector<AggregatedCell> &cells,
                       int num_detectors,
                       const BayesModelSpec &spec);
/// One model per observable of the table.
std::vector<BayesModel> build_models(const ShotTable &table, const BayesModelSpec &spec);
/// Model with the likelihood switched off; samples the prior.
BayesModel prior_only_model(const PauliOperator &q, int num_detectors, const BayesModelSpec &spec);

struct SamplerOptions {
    int chains = 4;
    int warmup = 3000;
    int samples = 3000;
    uint64_t seed = 0;
    bool keep_cell_draws = false;
    double rhat_threshold = 1.05;
};

struct ParameterSummary {
    std::string name;
    double mean = 0;
    double median = 0;
    double sd = 0;
    double hdi_low = 0;
    double hdi_high = 0;
    double rhat = 1;
    double ess = 0;
    double mcse = 0;
};

struct PosteriorSamples {
    PauliOperator q;
    int num_detectors = 0;
    /// lambda_D<d> for each detector value, then A and B on the ±1 expectation scale.
    std::vector<std::string> names;
    /// chains * samples rows, chain-major.
    Eigen::MatrixXd draws;
    int chains = 0;
    int warmup = 0;
    int samples = 0;
    std::vector<double> acceptance_joint;
    std::vector<double> acceptance_nu;
    std::vector<ParameterSummary> summary;
    /// Posterior means of each cell's q_bar on the ±1 scale and of each nu group.
    std::vector<double> cell_q_bar_mean;
    std::vector<double> nu_mean;
    /// Rows match `draws`; filled only with keep_cell_draws.
    Eigen::MatrixXd cell_q_bar_draws;
    bool converged = true;
    std::string warning;

    size_t index_of(const std::string &name) const;
    const ParameterSummary &at(const std::string &name) const;
    const ParameterSummary &lambda(int d) const { return summary[static_cast<size_t>(d)]; }
};

PosteriorSamples sample_posterior(const BayesModel &model, const SamplerOptions &options);
/// Runs every (model, chain) pair as an independent task.
std::vector<PosteriorSamples> sample_posteriors(const std::vector<BayesModel> &models, const SamplerOptions &options);

/// Rank-free split R-hat over equal-length chains.
double split_rhat(const std::vector<std::vector<double>> &chains);
/// Multi-chain ESS with Geyer's initial monotone sequence.
double effective_sample_size(const std::vector<std::vector<double>> &chains);
/// Shortest interval holding `mass` of the draws.
std::pair<double, double> hdi(std::vector<double> draws, double mass = 0.94);
ParameterSummary summarize(const std::string &name, const std::vector<std::vector<double>> &chains);

/// Moment-matched scaled-Beta prior per detector value; nu is floored at 2.
std::vector<ScaledBetaPrior> informative_prior_from_posterior(const PosteriorSamples &samples,
                                                              std::vector<std::string> *warnings = nullptr);
EigenvaluePriors informative_priors(const std::vector<PosteriorSamples> &samples,
                                    std::vector<std::string> *warnings = nullptr);

struct CosetPosterior {
    uint64_t detector = 0;
    double p_detector = 0;
    /// draws x cosets, conditioned on the detector value.
    Eigen::MatrixXd coset_draws;
    std::vector<ParameterSummary> coset_summary;
    bool bounds_defined = false;
    /// draws x logical classes.
    Eigen::MatrixXd post_selected_draws;
    Eigen::MatrixXd ideal_decoder_draws;
    std::vector<ParameterSummary> post_selected_summary;
    std::vector<ParameterSummary> ideal_decoder_summary;
};

/// Pushes index-aligned draws of every nonidentity normalizer element through
/// the coset transform, per detector value.
std::vector<CosetPosterior> posterior_coset_distributions(const std::vector<PosteriorSamples> &samples,
                                                          const std::map<uint64_t, RateEstimate> &rates,
                                                          const StabilizerCode &code,
                                                          bool project_to_simplex = false);

}  // namespace lsd
