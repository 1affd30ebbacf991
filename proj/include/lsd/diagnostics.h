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

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsd/simulator.h"

namespace lsd {

struct DiagnosticsError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DiagnosticsOptions {
    /// Sequence length to analyse; -1 takes the longest one present.
    int r = -1;
    double threshold_sigma = 3.0;
    double ci_level = 0.95;
    std::vector<int> lags{1, 2, 3};
    bool by_state = true;
};

struct RatePoint {
    int position = 0;
    uint64_t trials = 0;
    uint64_t clicks = 0;
    double rate = 0;
    double stderr_ = 0;
};

struct TrendFit {
    /// Setting label, or "pooled".
    std::string state;
    std::vector<RatePoint> series;
    double slope = 0;
    double slope_stderr = 0;
    /// slope / stderr; nullopt when the stderr vanishes.
    std::optional<double> z;
    bool violation = false;
};

/// Per-state (when `by_state`) and pooled click-rate series with OLS slopes.
std::vector<TrendFit> click_rate_trend(const std::vector<ShotRecord> &shots,
                                       const std::vector<std::string> &state_labels,
                                       const DiagnosticsOptions &options = {});

struct StateCounts {
    std::string state;
    uint64_t trials = 0;
    uint64_t clicks = 0;
};

struct HomogeneityResult {
    std::vector<StateCounts> states;
    double chi2 = 0;
    int dof = 0;
    double p_value = 1;
    bool violation = false;
};

/// Chi-square homogeneity of click counts across states.
HomogeneityResult homogeneity_test(const std::vector<StateCounts> &states, double threshold_sigma = 3.0);
HomogeneityResult state_independence_test(const std::vector<ShotRecord> &shots,
                                          const std::vector<std::string> &state_labels,
                                          const DiagnosticsOptions &options = {});

struct Interval {
    double low = 0;
    double high = 0;
};

Interval wilson_interval(uint64_t successes, uint64_t trials, double level = 0.95);

struct ConditionalPoint {
    int first = 0;
    uint64_t given = 0;
    uint64_t both = 0;
    std::optional<double> conditional;
    Interval ci;
};

struct LagCorrelation {
    int lag = 0;
    /// Pairs with D_i = 1, and those with D_{i+lag} = 1 as well.
    uint64_t given = 0;
    uint64_t both = 0;
    /// Absent when no click was observed at a conditioning position.
    std::optional<double> conditional;
    Interval ci;
    double base_rate = 0;
    std::optional<double> z;
    bool violation = false;
    std::vector<ConditionalPoint> per_position;
};

std::vector<LagCorrelation> pair_correlation(const std::vector<ShotRecord> &shots,
                                             const DiagnosticsOptions &options = {});

struct DiagnosticsReport {
    int r = 0;
    uint64_t shots = 0;
    double threshold_sigma = 3.0;
    double ci_level = 0.95;
    std::string interval_method = "wilson";
    std::vector<TrendFit> trend;
    std::optional<HomogeneityResult> homogeneity;
    std::vector<LagCorrelation> correlations;
    std::vector<std::string> violations;
    std::vector<std::string> notes;

    bool passed() const { return violations.empty(); }
};

/// Runs the three tests; each is skipped with a note when its precondition fails.
DiagnosticsReport diagnose(const std::vector<ShotRecord> &shots,
                           const std::vector<std::string> &state_labels,
                           const DiagnosticsOptions &options = {});

}  // namespace lsd
