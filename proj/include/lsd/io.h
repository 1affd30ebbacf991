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

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "lsd/diagnostics.h"
#include "lsd/estimate_bayes.h"
#include "lsd/estimate_freq.h"
#include "lsd/simulator.h"
#include "lsd/statevec.h"

namespace lsd {

using json = nlohmann::ordered_json;

/// Malformed shot file; `line` is 1-based.
struct SchemaError : std::runtime_error {
    SchemaError(size_t line, const std::string &what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
    size_t line;
};

struct CoherentBlock {
    CoherentErrorSpec error;
    std::vector<char> inputs{'X', 'Y', 'Z'};
    uint64_t shots = 100000;
};

struct FreqAnalysis {
    FreqOptions options;
    int bootstrap = 0;
};

struct BayesAnalysis {
    BayesModelSpec model;
    SamplerOptions sampler;
    bool project_to_simplex = false;
};

struct RunConfig {
    ExperimentConfig experiment;
    std::optional<CoherentBlock> coherent;
    FreqAnalysis freq;
    BayesAnalysis bayes;
    DiagnosticsOptions diagnostics;
};

/// Throws ConfigError naming the offending field.
RunConfig parse_config(const json &doc);
RunConfig load_config(const std::string &path);

PauliDistribution parse_distribution(const json &node, int n, const std::string &path);
json distribution_to_json(const PauliDistribution &dist);
CliffordCircuitSpec parse_circuit(const json &node, const std::string &path);
SyndromeChannelSet parse_channel_table(const json &node, const StabilizerCode &code, const std::string &path);

/// Canonical document of a resolved config; channel gadgets are inlined.
json config_to_json(const ExperimentConfig &config);

/// Decimal text with 12 significant digits, as a JSON number.
json number12(double v);
/// {syndrome: [{pauli, probability}]} with 12-digit probabilities.
json channels_to_json(const SyndromeChannelSet &set);
json detector_channels_to_json(const DetectorChannels &channels, int num_stabilizers);

uint64_t fnv1a64(const std::string &bytes);
std::string hex64(uint64_t v);

struct RunManifest {
    std::string config_hash;
    uint64_t seed = 0;
    std::string tool_version;
    std::string created;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;

    json to_json() const;
};

/// Hash of the canonical config document (which includes the seed).
std::string config_hash(const ExperimentConfig &config);
RunManifest make_manifest(const ExperimentConfig &config);

std::string shot_to_line(const ShotRecord &rec,
                         const StabilizerCode &code,
                         const std::vector<Setting> &settings,
                         const std::string &manifest_hash);

struct ShotFile {
    std::string code_id;
    std::vector<std::string> labels;
    std::vector<Setting> settings;
    std::vector<ShotRecord> shots;
    std::string manifest_hash;
};

/// Settings are indexed in order of first appearance.
ShotFile parse_shots(std::istream &in);
ShotFile read_shots(const std::string &path);
void write_shots(std::ostream &out,
                 const std::vector<ShotRecord> &shots,
                 const StabilizerCode &code,
                 const std::vector<Setting> &settings,
                 const std::string &manifest_hash);

json freq_report(const FreqEstimate &est, const StabilizerCode &code);
/// counts..., q_bar, var, fitted; one row per (Q, cell).
void write_decay_csv(std::ostream &out, const FreqEstimate &est);
void write_matrix_csv(std::ostream &out, const Eigen::MatrixXd &m);

json posterior_report(const std::vector<PosteriorSamples> &samples,
                      const std::vector<CosetPosterior> &cosets,
                      const StabilizerCode &code);
/// One row per draw: chain, draw, then the parameter names.
void write_draws_csv(std::ostream &out, const PosteriorSamples &samples);
/// coset, detector, value.
void write_violin_csv(std::ostream &out, const std::vector<CosetPosterior> &cosets, const StabilizerCode &code);

json priors_to_json(const EigenvaluePriors &priors);
EigenvaluePriors parse_priors(const json &doc);

json diagnostics_to_json(const DiagnosticsReport &report);
void write_trend_csv(std::ostream &out, const DiagnosticsReport &report);
void write_lag_csv(std::ostream &out, const DiagnosticsReport &report);

json click_rate_to_json(const ClickRate &rate);

}  // namespace lsd
