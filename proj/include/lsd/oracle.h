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

#include <string>
#include <vector>

#include "lsd/simulator.h"

namespace lsd {

struct OracleCheck {
    std::string name;
    double max_deviation = 0;
    size_t cases = 0;
    bool skipped = false;
    std::string detail;
};

struct OracleReport {
    double tolerance = 1e-10;
    std::vector<OracleCheck> checks;

    bool passed() const;
};

struct OracleOptions {
    /// Longest detector sequence enumerated; -1 picks 3.
    int max_r = -1;
    int random_cases = 100;
    uint64_t seed = 0;
    double tolerance = 1e-10;
};

/// Closed-form D = 0 channel of the [[2,1,1]] phenomenological gadget.
PauliDistribution phenomenological_d0_closed_form(double p, double q);

/// Exact-expectation, closed-form, transform and marginalization checks for
/// the gadget and SPAM model of `config`. Throws InvariantError when the
/// gadget channels are malformed.
OracleReport run_oracle_suite(const ExperimentConfig &config, const OracleOptions &options = {});

}  // namespace lsd
