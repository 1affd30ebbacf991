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

#include "lsd/channels.h"
#include "lsd/simulator.h"

namespace lsd {

struct UnderIdentifiedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Per-shot view of an experiment: the detector-count cell of every shot
/// and its ±1 value for every observable it can read out (0 if it cannot).
struct ShotTable {
    int num_detectors = 0;
    /// Nonidentity normalizer elements, in normalizer order.
    std::vector<PauliOperator> observables;
    std::vector<uint64_t> normalizer_index;
    std::vector<std::vector<int>> count_vectors;
    std::vector<int> shot_cell;
    std::vector<int> shot_setting;
    std::vector<int> shot_r;
    std::vector<int8_t> values;

    size_t num_shots() const { return shot_cell.size(); }
    int8_t value(size_t shot, size_t obs) const { return values[shot * observables.size() + obs]; }
    /// Position of q in `observables`.
    size_t observable_position(const PauliOperator &q) const;
};

ShotTable build_shot_table(const std::vector<ShotRecord> &shots,
                           const StabilizerCode &code,
                           const std::vector<Setting> &settings);

struct AggregatedCell {
    int cell_id = 0;
    std::vector<int> counts;
    uint64_t n = 0;
    /// Mean of (-1)^q.
    double q_bar = 0;
    /// (1 - q_bar^2) / N.
    double var_q_bar = 0;
};

/// Cells for observable position `obs`, ordered by cell id.
std::vector<AggregatedCell> aggregate(const ShotTable &table, size_t obs);
/// Convenience form: cells of Q over the shots of one setting.
std::vector<AggregatedCell> aggregate(const std::vector<ShotRecord> &shots,
                                      const StabilizerCode &code,
                                      const Setting &setting,
                                      const PauliOperator &q);

struct FitOptions {
    bool fix_b = false;
    double fixed_b = 0;
    int max_iterations = 200;
    double tolerance = 1e-12;
};

/// Decay fit of one observable: E = A prod_D lambda_D^{n_D} + B.
struct QFit {
    PauliOperator q;
    uint64_t normalizer_index = 0;
    bool has_data = true;
    double a = 1;
    double b = 0;
    std::vector<double> lambda;
    /// Order [A, B, lambda_0 .. lambda_{S-1}].
    Eigen::MatrixXd cov;
    double chi2 = 0;
    int dof = 0;
    bool converged = true;
    bool b_fixed = true;
    std::string message;
    int dropped_cells = 0;
    uint64_t dropped_shots = 0;
    double dropped_fraction = 0;
    /// Linearized response of the parameters to each cell mean.
    std::vector<int> cell_ids;
    Eigen::MatrixXd influence;

    double model(const std::vector<int> &counts) const;
    std::vector<double> params() const;
    double stderr_lambda(size_t d) const { return std::sqrt(std::max(cov(2 + d, 2 + d), 0.0)); }
};

/// Log-linear weighted least squares with B = 0; cells with q_bar <= 0 are dropped.
QFit fit_wls_log(const std::vector<AggregatedCell> &cells, int num_detectors, const FitOptions &options = {});
/// Projected Levenberg-Marquardt on the bounded model, started from `init`.
QFit fit_nonlinear(const std::vector<AggregatedCell> &cells,
                   int num_detectors,
                   const QFit &init,
                   const FitOptions &options = {});

struct FitResult {
    int num_detectors = 0;
    std::vector<QFit> per_q;
    /// Joint covariance of lambda~_D(Q), index (obs position) * S + D.
    Eigen::MatrixXd lambda_cov;

    const QFit &fit_for(const PauliOperator &q) const;
};

/// Joint covariance across observables from within-cell cross moments.
Eigen::MatrixXd joint_lambda_covariance(const ShotTable &table, const std::vector<QFit> &fits);

struct RateEstimate {
    double p = 0;
    double stderr_ = 0;
};

/// Pooled per-slot detector frequencies.
std::map<uint64_t, RateEstimate> estimate_detector_rates(const std::vector<ShotRecord> &shots, int num_detectors);

struct DetectorEstimate {
    uint64_t detector = 0;
    RateEstimate rate;
    /// p(c | D) by coset index and its covariance.
    std::vector<double> coset;
    Eigen::MatrixXd coset_cov;
    /// p(D) p(c | D).
    std::vector<double> coset_total;
    std::vector<double> coset_total_stderr;
    bool bounds_defined = false;
    BoundChannels bounds;
    std::vector<double> post_selected_stderr;
    std::vector<double> ideal_decoder_stderr;
};

struct ChannelEstimateFreq {
    std::vector<DetectorEstimate> detectors;
    bool simplex_projected = false;
};

ChannelEstimateFreq invert_to_cosets(const FitResult &fit,
                                     const std::map<uint64_t, RateEstimate> &rates,
                                     const StabilizerCode &code,
                                     bool project_to_simplex = false);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(const std::vector<double> &v);

struct FreqOptions {
    bool nonlinear = true;
    FitOptions fit;
    bool project_to_simplex = false;
};

struct FreqEstimate {
    ShotTable table;
    FitResult fit;
    std::map<uint64_t, RateEstimate> rates;
    ChannelEstimateFreq channels;
};

FreqEstimate run_freq_pipeline(const std::vector<ShotRecord> &shots,
                               const StabilizerCode &code,
                               const std::vector<Setting> &settings,
                               const FreqOptions &options = {});

/// Fits every observable of `table` (no joint covariance).
std::vector<QFit> fit_all(const ShotTable &table, const FreqOptions &options);

struct BootstrapResult {
    int replicas = 0;
    /// Stacked lambda~ in FitResult::lambda_cov order.
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    Eigen::VectorXd ci_low;
    Eigen::VectorXd ci_high;

    double stderr_at(size_t i) const { return std::sqrt(std::max(cov(i, i), 0.0)); }
};

/// Resamples shots with replacement inside each (setting, length) stratum
/// and refits; replicas run in parallel.
BootstrapResult bootstrap(const ShotTable &table,
                          int replicas,
                          uint64_t seed,
                          const FreqOptions &options = {},
                          double ci_level = 0.6827);

}  // namespace lsd
