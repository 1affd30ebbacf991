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

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace lsd {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Key for counter-based stream derivation from (seed, stream tag, index).
inline uint64_t derive_key(uint64_t seed, uint64_t stream, uint64_t index) {
    return splitmix64(splitmix64(seed ^ splitmix64(stream)) + index);
}

enum StreamTag : uint64_t {
    kStreamShot = 1,
    kStreamFrame = 2,
    kStreamBootstrap = 3,
    kStreamChain = 4,
    kStreamCircuitSample = 5,
    kStreamStatevec = 6,
    kStreamPosterior = 7,
};

/// Per-task generator; identical (seed, stream, index) give identical draws.
class Rng {
   public:
    Rng(uint64_t seed, uint64_t stream, uint64_t index) : engine_(derive_key(seed, stream, index)) {}
    explicit Rng(uint64_t key) : engine_(key) {}

    uint64_t bits() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    uint64_t below(uint64_t n) { return std::uniform_int_distribution<uint64_t>(0, n - 1)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
    double beta(double a, double b) {
        double x = gamma(a);
        double y = gamma(b);
        return x / (x + y);
    }

    std::mt19937_64 &engine() { return engine_; }

   private:
    std::mt19937_64 engine_;
};

/// Samples values with probability proportional to their weights.
template <typename T>
class DiscreteSampler {
   public:
    DiscreteSampler() = default;

    void add(T value, double weight) {
        if (weight <= 0) {
            return;
        }
        total_ += weight;
        values_.push_back(std::move(value));
        cumulative_.push_back(total_);
    }

    bool empty() const { return values_.empty(); }
    double total() const { return total_; }
    const std::vector<T> &values() const { return values_; }

    const T &sample(Rng &rng) const {
        if (values_.empty()) {
            throw std::logic_error("DiscreteSampler::sample on an empty table");
        }
        double u = rng.uniform() * total_;
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        size_t i = std::min(static_cast<size_t>(it - cumulative_.begin()), values_.size() - 1);
        return values_[i];
    }

   private:
    std::vector<T> values_;
    std::vector<double> cumulative_;
    double total_ = 0;
};

}  // namespace lsd
