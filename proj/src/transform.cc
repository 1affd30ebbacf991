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

#include "lsd/transform.h"

#include <cmath>

#include "lsd/parallel.h"

namespace lsd {

namespace {

void check_dense(size_t size, int n, int max_n) {
    if (n < 1 || n > max_n) {
        throw DimensionError(
            "dense transform supports 1 <= n <= " + std::to_string(max_n) + ", got " + std::to_string(n));
    }
    if (size != (size_t{1} << (2 * n))) {
        throw DimensionError("dense transform expects 4^n entries");
    }
}

uint64_t swap_halves(uint64_t index, int n) {
    uint64_t m = (uint64_t{1} << n) - 1;
    return ((index & m) << n) | (index >> n);
}

std::vector<double> finish(const std::vector<double> &h, int n, TransformDirection direction) {
    double scale = direction == TransformDirection::kToProbabilities ? std::ldexp(1.0, -2 * n) : 1.0;
    std::vector<double> out(h.size());
    for (uint64_t i = 0; i < h.size(); i++) {
        out[i] = h[swap_halves(i, n)] * scale;
    }
    return out;
}

}  // namespace

double eigenvalue_of_distribution(const PauliDistribution &dist, const PauliOperator &q) {
    double total = 0;
    for (const auto &[p, w] : dist) {
        total += symplectic_product(p, q) ? -w : w;
    }
    return total;
}

std::vector<double> to_dense(const PauliDistribution &dist, int max_n) {
    int n = dist.n();
    if (n < 1 || n > max_n) {
        throw DimensionError("to_dense: n=" + std::to_string(n) + " exceeds cap " + std::to_string(max_n));
    }
    std::vector<double> out(size_t{1} << (2 * n), 0.0);
    for (const auto &[p, w] : dist) {
        out[p.dense_index()] += w;
    }
    return out;
}

PauliDistribution from_dense(const std::vector<double> &values, int n, double drop_below) {
    PauliDistribution out(n);
    for (uint64_t i = 0; i < values.size(); i++) {
        if (values[i] > drop_below) {
            out.add(PauliOperator::from_dense_index(n, i), values[i]);
        }
    }
    return out;
}

std::vector<double> walsh_hadamard_full_serial(
    std::vector<double> values, int n, TransformDirection direction, int max_n) {
    check_dense(values.size(), n, max_n);
    size_t size = values.size();
    for (size_t h = 1; h < size; h <<= 1) {
        for (size_t i = 0; i < size; i += h << 1) {
            for (size_t j = i; j < i + h; j++) {
                double a = values[j];
                double b = values[j + h];
                values[j] = a + b;
                values[j + h] = a - b;
            }
        }
    }
    return finish(values, n, direction);
}

std::vector<double> walsh_hadamard_full(
    std::vector<double> values, int n, TransformDirection direction, int max_n) {
    check_dense(values.size(), n, max_n);
    const int64_t size = static_cast<int64_t>(values.size());
    double *v = values.data();
    if (size < 4096 || omp_get_max_threads() == 1) {
        return walsh_hadamard_full_serial(std::move(values), n, direction, max_n);
    }
    for (int64_t h = 1; h < size; h <<= 1) {
        const int64_t blocks = size / (h << 1);
        // Split over blocks while there are enough of them, then inside each block.
        if (blocks >= 64) {
            LSD_OMP_PARALLEL_FOR
            for (int64_t blk = 0; blk < blocks; blk++) {
                double *base = v + blk * (h << 1);
                for (int64_t j = 0; j < h; j++) {
                    double a = base[j];
                    double b = base[j + h];
                    base[j] = a + b;
                    base[j + h] = a - b;
                }
            }
        } else {
            for (int64_t blk = 0; blk < blocks; blk++) {
                double *base = v + blk * (h << 1);
                LSD_OMP_PARALLEL_FOR
                for (int64_t j = 0; j < h; j++) {
                    double a = base[j];
                    double b = base[j + h];
                    base[j] = a + b;
                    base[j + h] = a - b;
                }
            }
        }
    }
    return finish(values, n, direction);
}

std::vector<std::vector<double>> coset_sign_matrix(const StabilizerCode &code) {
    auto elements = code.normalizer_elements();
    int c = code.num_cosets();
    double scale = std::ldexp(1.0, -(code.n() + code.k()));
    std::vector<std::vector<double>> s(c, std::vector<double>(elements.size()));
    for (int i = 0; i < c; i++) {
        PauliOperator rep = code.coset_representative(i);
        for (size_t j = 0; j < elements.size(); j++) {
            s[i][j] = symplectic_product(rep, elements[j]) ? -scale : scale;
        }
    }
    return s;
}

std::vector<double> coset_probabilities_from_eigenvalues(
    const std::vector<double> &lams, const StabilizerCode &code) {
    if (static_cast<int>(lams.size()) != code.num_cosets()) {
        throw IncompleteInputError("need one eigenvalue per normalizer element");
    }
    auto s = coset_sign_matrix(code);
    std::vector<double> out(s.size(), 0.0);
    for (size_t i = 0; i < s.size(); i++) {
        for (size_t j = 0; j < lams.size(); j++) {
            out[i] += s[i][j] * lams[j];
        }
    }
    return out;
}

std::vector<double> coset_probabilities_from_eigenvalues(
    const std::map<PauliOperator, double> &lams, const StabilizerCode &code) {
    auto elements = code.normalizer_elements();
    std::vector<double> ordered;
    ordered.reserve(elements.size());
    std::string missing;
    for (const auto &q : elements) {
        auto it = lams.find(q);
        if (it == lams.end()) {
            missing += (missing.empty() ? "" : ", ") + q.str();
            ordered.push_back(0);
        } else {
            ordered.push_back(it->second);
        }
    }
    if (!missing.empty()) {
        throw IncompleteInputError("missing eigenvalues for normalizer elements: " + missing);
    }
    return coset_probabilities_from_eigenvalues(ordered, code);
}

std::vector<double> coset_marginals(const PauliDistribution &dist, const StabilizerCode &code) {
    std::vector<double> out(code.num_cosets(), 0.0);
    for (const auto &[p, w] : dist) {
        out[code.coset_index(p)] += w;
    }
    return out;
}

std::vector<double> normalizer_eigenvalues(const PauliDistribution &dist, const StabilizerCode &code) {
    std::vector<double> out;
    for (const auto &q : code.normalizer_elements()) {
        out.push_back(eigenvalue_of_distribution(dist, q));
    }
    return out;
}

}  // namespace lsd
