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

#include "lsd/simulator.h"

namespace lsd {

/// Shot of the [[2,1,1]] circuit with classical leakage flags layered on
/// frame tracking. Without LP the flag gadget runs every round; with LP the
/// two leakage-protected variants alternate so that each physical qubit is
/// measured and re-prepared within three gadgets.
ShotRecord run_leakage_circuit_shot(const Experiment &exp, int setting, int copy, int r, uint64_t shot_index);

/// Physical qubit measured by each gadget of a 2r-gadget LP sequence.
std::vector<int> lp_measured_qubits(int gadgets);

}  // namespace lsd
