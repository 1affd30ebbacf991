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
#include <string>

#include "lsd/pauli.h"

namespace lsd {

/// Sparse, possibly sub-normalized distribution over n-qubit Paulis.
class PauliDistribution {
   public:
    PauliDistribution() = default;
    explicit PauliDistribution(int n) : n_(n) {}
    PauliDistribution(int n, std::initializer_list<std::pair<const char *, double>> items);

    static PauliDistribution point(const PauliOperator &p, double weight = 1.0);
    /// 1-p on the identity, p spread evenly over the 4^n - 1 others.
    static PauliDistribution depolarizing(int n, double p);

    int n() const { return n_; }
    /// Adds weight to an entry; negative weights are rejected.
    void add(const PauliOperator &p, double weight);
    double get(const PauliOperator &p) const;
    double mass() const;
    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }
    void scale(double factor);
    PauliDistribution normalized() const;

    const std::map<PauliOperator, double> &entries() const { return entries_; }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

   private:
    int n_ = 0;
    std::map<PauliOperator, double> entries_;
};

}  // namespace lsd
