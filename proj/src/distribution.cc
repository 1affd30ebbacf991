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

#include "lsd/distribution.h"

#include <cmath>
#include <stdexcept>

namespace lsd {

PauliDistribution::PauliDistribution(int n, std::initializer_list<std::pair<const char *, double>> items)
    : n_(n) {
    for (const auto &[text, w] : items) {
        add(PauliOperator::from_string(text), w);
    }
}

PauliDistribution PauliDistribution::point(const PauliOperator &p, double weight) {
    PauliDistribution out(p.n);
    out.add(p, weight);
    return out;
}

PauliDistribution PauliDistribution::depolarizing(int n, double p) {
    if (n < 1 || n > 8) {
        throw DimensionError("depolarizing: n must be in [1, 8]");
    }
    if (!(p >= 0 && p <= 1)) {
        throw std::invalid_argument("depolarizing: probability must be in [0, 1]");
    }
    PauliDistribution out(n);
    uint64_t total = uint64_t{1} << (2 * n);
    out.add(PauliOperator::identity(n), 1 - p);
    for (uint64_t i = 1; i < total; i++) {
        out.add(PauliOperator::from_dense_index(n, i), p / static_cast<double>(total - 1));
    }
    return out;
}

void PauliDistribution::add(const PauliOperator &p, double weight) {
    if (p.n != n_) {
        throw DimensionError("PauliDistribution over " + std::to_string(n_) + " qubits got " + p.str());
    }
    if (!(weight >= 0) || !std::isfinite(weight)) {
        throw std::invalid_argument("PauliDistribution weights must be finite and >= 0");
    }
    if (weight == 0) {
        return;
    }
    entries_[p] += weight;
}

double PauliDistribution::get(const PauliOperator &p) const {
    auto it = entries_.find(p);
    return it == entries_.end() ? 0.0 : it->second;
}

double PauliDistribution::mass() const {
    double total = 0;
    for (const auto &[p, w] : entries_) {
        total += w;
    }
    return total;
}

void PauliDistribution::scale(double factor) {
    for (auto &[p, w] : entries_) {
        w *= factor;
    }
}

PauliDistribution PauliDistribution::normalized() const {
    double m = mass();
    if (m <= 0) {
        throw std::domain_error("cannot normalize a distribution with zero mass");
    }
    PauliDistribution out = *this;
    out.scale(1 / m);
    return out;
}

}  // namespace lsd
