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

#include <array>
#include <string>
#include <vector>

#include "lsd/simulator.h"

namespace lsd {

/// Operating point for the tuned [[2,1,1]] ground truth. Rates are per
/// detector region with a trivial detector, ordered (X, Y, Z).
struct TableITargets {
    double p_detector_zero = 0.9896;
    std::array<double, 3> post_selected{2e-4, 1e-4, 37e-4};
    std::array<double, 3> decoded{10e-4, 8e-4, 39e-4};
    /// Share of the D=0 region carrying the IX pure error.
    double pure_error_share = 0.005;
};

/// Gadget instrument whose D=0 detector channel reproduces `targets`.
/// Syndrome 0 carries logical errors XX, YX, ZI; syndrome 1 carries a bare
/// readout flip and the four IX-coset data errors caught immediately.
SyndromeChannelSet tuned_table1_gadget(const TableITargets &targets = {});

/// Names accepted by preset_config.
std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string &name);

}  // namespace lsd
