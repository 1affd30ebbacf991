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

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsd/channels.h"
#include "lsd/circuit.h"
#include "lsd/rng.h"

namespace lsd {

struct ZeroProbabilityCondition : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class GadgetKind { kPhenomenological, kJointDistribution, kCircuit, kChannels };

struct NoisyGadgetSpec {
    GadgetKind kind = GadgetKind::kPhenomenological;
    double p = 0;
    double q = 0;
    PauliDistribution joint;
    MeasurementLayout layout;
    /// Builtin circuit name when the circuit came from the catalogue.
    std::string circuit_name;
    double cnot_depolarizing = 0;
    CliffordCircuitSpec circuit;
    std::shared_ptr<const SyndromeChannelSet> channels;
};

SyndromeChannelSet resolve_gadget(const NoisyGadgetSpec &spec, const StabilizerCode &code);

struct SpamModel {
    /// Empty distributions mean noiseless preparation / measurement.
    PauliDistribution prep;
    PauliDistribution meas;
    double readout_offset_eta = 0;
};

struct PfrOptions {
    bool enabled = false;
    int frames = 1;
};

struct LeakageOptions {
    bool enabled = false;
    double per_gate_rate = 0;
    /// Single-qubit kick on the unleaked partner of a suppressed CNOT.
    PauliDistribution kick = PauliDistribution(1, {{"I", 0.25}, {"X", 0.25}, {"Y", 0.25}, {"Z", 0.25}});
};

/// Product of k logical factors, one per logical qubit. Factor i is
/// X̄_i, Z̄_i or X̄_i·Z̄_i; the prepared state is their joint +1 eigenstate.
struct Setting {
    std::vector<PauliOperator> factors;
    std::vector<uint64_t> factor_logical_bits;

    /// Physical strings joined by ','.
    std::string label() const;
    PauliOperator product() const;
};

/// Builds a setting from one character per logical qubit over {X, Y, Z}.
Setting make_setting(const StabilizerCode &code, const std::string &logical_axes);
/// Parses Setting::label() back.
Setting setting_from_label(const StabilizerCode &code, const std::string &label);

struct SettingPlan {
    Setting setting;
    /// L_b·S for every nonempty factor subset b and stabilizer S.
    std::vector<PauliOperator> observables;
};

std::vector<SettingPlan> plan_settings(const StabilizerCode &code);

/// How a normalizer element Q is read out in a setting: Q = L_b · S_a.
struct Readout {
    uint64_t logical_subset = 0;
    uint64_t stabilizer_bits = 0;
};

/// nullopt when Q is not of the form L_b·S for this setting.
std::optional<Readout> readout_of(const StabilizerCode &code, const Setting &setting, const PauliOperator &q);

struct ExperimentConfig {
    std::string code_id = "2_1_1";
    NoisyGadgetSpec gadget;
    SpamModel spam;
    std::vector<int> lengths;
    std::vector<uint64_t> shots_per_length;
    /// Logical axis strings such as "X" or "XZ"; empty means plan_settings.
    std::vector<std::string> settings;
    int copies = 1;
    PfrOptions pfr;
    bool lp = false;
    LeakageOptions leakage;
    uint64_t seed = 0;
};

struct ShotRecord {
    int setting = 0;
    int copy = 0;
    int r = 0;
    uint64_t shot_index = 0;
    std::vector<uint64_t> syndromes;
    std::vector<uint64_t> detectors;
    /// k bits for the logical factors.
    uint64_t final_l = 0;
    /// n-k bits for the stabilizer generators.
    uint64_t final_o = 0;
    int frame_id = -1;

    std::map<uint64_t, int> detector_counts() const;
    bool operator==(const ShotRecord &other) const = default;
};

/// Validated experiment with resolved channels and samplers.
class Experiment {
   public:
    explicit Experiment(ExperimentConfig config);

    const ExperimentConfig &config() const { return config_; }
    const StabilizerCode &code() const { return code_; }
    const SyndromeChannelSet &gadget() const { return *gadget_; }
    const std::vector<Setting> &settings() const { return settings_; }
    uint64_t total_shots() const;
    /// Global index of shot `shot` for (setting, copy, length position).
    uint64_t shot_offset(int setting, int copy, size_t length_pos) const;

    struct GadgetEvent {
        uint64_t m;
        PauliOperator error;
    };
    const DiscreteSampler<GadgetEvent> &event_sampler() const { return events_; }
    const DiscreteSampler<PauliOperator> &prep_sampler() const { return prep_; }
    const DiscreteSampler<PauliOperator> &meas_sampler() const { return meas_; }
    /// Frame for gadget g of randomization `frame`, setting and length position.
    PauliOperator pfr_frame(int frame, int setting, int r, int gadget) const;

   private:
    ExperimentConfig config_;
    StabilizerCode code_;
    std::shared_ptr<const SyndromeChannelSet> gadget_;
    std::vector<Setting> settings_;
    DiscreteSampler<GadgetEvent> events_;
    DiscreteSampler<PauliOperator> prep_;
    DiscreteSampler<PauliOperator> meas_;
};

ShotRecord run_shot(const Experiment &exp, int setting, int copy, int r, uint64_t shot_index);
/// All shots in order setting x copy x length x shot, in parallel.
std::vector<ShotRecord> run_experiment(const Experiment &exp);
/// Single-threaded reference for run_experiment.
std::vector<ShotRecord> run_experiment_serial(const Experiment &exp);

/// l · b xor o · a.
int derived_q(const ShotRecord &record, const Readout &readout);

/// A_Q prod_D lambda~_D(Q)^{n_D} + B_Q, expectation scale.
double exact_expectation(const SyndromeChannelSet &gadget,
                         const SpamModel &spam,
                         const PauliOperator &q,
                         const std::map<uint64_t, int> &detector_counts);
/// Same, from precomputed detector channels of a code with `num_stabilizers` generators.
double exact_expectation(const DetectorChannels &detectors,
                         int num_stabilizers,
                         const SpamModel &spam,
                         const PauliOperator &q,
                         const std::map<uint64_t, int> &detector_counts);

/// Conditional expectation by summing over every history of 2r gadgets
/// consistent with `detector_sequence`.
double brute_force_expectation(const SyndromeChannelSet &gadget,
                               const SpamModel &spam,
                               const PauliOperator &q,
                               const std::vector<uint64_t> &detector_sequence,
                               size_t state_cap = size_t{1} << 20);
/// brute_force_expectation for several observables over one history sum.
std::vector<double> brute_force_expectations(const SyndromeChannelSet &gadget,
                                             const SpamModel &spam,
                                             const std::vector<PauliOperator> &qs,
                                             const std::vector<uint64_t> &detector_sequence,
                                             size_t state_cap = size_t{1} << 20);

/// A_Q and B_Q implied by a SPAM model.
std::pair<double, double> spam_coefficients(const SpamModel &spam, const PauliOperator &q);

}  // namespace lsd
