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


#include "lsd/oracle.h"

#include <algorithm>
#include <cmath>

#include "lsd/transform.h"

namespace lsd {

namespace {

double max_abs_diff(const PauliDistribution &a, const PauliDistribution &b) {
    double m = 0;
    for (const auto &[p, w] : a) {
        m = std::max(m, std::abs(w - b.get(p)));
    }
    for (const auto &[p, w] : b) {
        m = std::max(m, std::abs(w - a.get(p)));
    }
    return m;
}

PauliDistribution random_distribution(int n, Rng &rng) {
    PauliDistribution d(n);
    uint64_t dim = uint64_t{1} << (2 * n);
    std::vector<double> w(dim);
    double total = 0;
    for (auto &x : w) {
        x = rng.uniform() < 0.5 ? 0.0 : -std::log(1 - rng.uniform());
        total += x;
    }
    if (total == 0) {
        w[0] = total = 1;
    }
    for (uint64_t i = 0; i < dim; i++) {
        if (w[i] > 0) {
            d.add(PauliOperator::from_dense_index(n, i), w[i] / total);
        }
    }
    return d;
}

OracleCheck lemma2_check(const Experiment &exp, int max_r) {
    OracleCheck c{"exact_expectation vs brute-force enumeration", 0, 0, false, ""};
    const auto &code = exp.code();
    auto elems = code.normalizer_elements();
    std::vector<PauliOperator> qs(elems.begin() + 1, elems.end());
    auto dets = detector_channels(exp.gadget());
    uint64_t values = static_cast<uint64_t>(code.num_syndromes());
    for (int r = 1; r <= max_r; r++) {
        uint64_t patterns = 1;
        for (int i = 0; i < r; i++) {
            patterns *= values;
        }
        for (uint64_t pat = 0; pat < patterns; pat++) {
            std::vector<uint64_t> seq;
            std::map<uint64_t, int> counts;
            uint64_t rest = pat;
            for (int i = 0; i < r; i++) {
                seq.push_back(rest % values);
                counts[rest % values]++;
                rest /= values;
            }
            auto brute = brute_force_expectations(exp.gadget(), exp.config().spam, qs, seq);
            for (size_t j = 0; j < qs.size(); j++) {
                double a = exact_expectation(dets, code.num_stabilizers(), exp.config().spam, qs[j], counts);
                c.max_deviation = std::max(c.max_deviation, std::abs(a - brute[j]));
                c.cases++;
            }
        }
    }
    c.detail = "all detector patterns with r <= " + std::to_string(max_r);
    return c;
}

OracleCheck closed_form_check(const ExperimentConfig &config, const Experiment &exp) {
    OracleCheck c{"phenomenological closed-form D=0 channel", 0, 0, false, ""};
    if (config.gadget.kind != GadgetKind::kPhenomenological) {
        c.skipped = true;
        c.detail = "gadget is not phenomenological";
        return c;
    }
    auto dets = detector_channels(exp.gadget());
    PauliDistribution closed = phenomenological_d0_closed_form(config.gadget.p, config.gadget.q);
    c.max_deviation = max_abs_diff(dets.at(0).dist, closed);
    c.cases = closed.size();
    c.detail = "p(D=0) = " + std::to_string(closed.mass());
    return c;
}

OracleCheck transform_check(int n, const OracleOptions &options) {
    OracleCheck c{"Walsh-Hadamard round trip and direct eigenvalues", 0, 0, false, ""};
    Rng rng(options.seed, kStreamStatevec, 0xacedULL);
    for (int i = 0; i < options.random_cases; i++) {
        PauliDistribution d = random_distribution(n, rng);
        auto dense = to_dense(d);
        auto lam = walsh_hadamard_full(dense, n, TransformDirection::kToEigenvalues);
        auto back = walsh_hadamard_full(lam, n, TransformDirection::kToProbabilities);
        for (size_t k = 0; k < dense.size(); k++) {
            c.max_deviation = std::max(c.max_deviation, std::abs(back[k] - dense[k]));
            double direct = eigenvalue_of_distribution(d, PauliOperator::from_dense_index(n, k));
            c.max_deviation = std::max(c.max_deviation, std::abs(direct - lam[k]));
        }
        c.cases++;
    }
    c.detail = std::to_string(options.random_cases) + " random channels on " + std::to_string(n) + " qubits";
    return c;
}

OracleCheck marginalization_check(const Experiment &exp) {
    OracleCheck c{"detector marginalization and coset inversion", 0, 0, false, ""};
    const auto &code = exp.code();
    auto dets = detector_channels(exp.gadget());
    PauliDistribution avg = exp.gadget().average();
    PauliDistribution twice = compose(avg, avg);
    PauliDistribution sum(code.n());
    for (const auto &[d, ch] : dets) {
        for (const auto &[p, w] : ch.dist) {
            sum.add(p, w);
        }
        auto direct = coset_marginals(ch.dist, code);
        auto inverted = coset_probabilities_from_eigenvalues(normalizer_eigenvalues(ch.dist, code), code);
        for (size_t k = 0; k < direct.size(); k++) {
            c.max_deviation = std::max(c.max_deviation, std::abs(direct[k] - inverted[k]));
        }
        c.cases++;
    }
    c.max_deviation = std::max(c.max_deviation, max_abs_diff(sum, twice));
    c.detail = "sum over D of p(D) E^D against the averaged channel applied twice";
    return c;
}

}  // namespace

bool OracleReport::passed() const {
    for (const auto &c : checks) {
        if (!c.skipped && !(c.max_deviation <= tolerance)) {
            return false;
        }
    }
    return true;
}

PauliDistribution phenomenological_d0_closed_form(double p, double q) {
    PauliDistribution li(2, {{"II", (1 - p) * (1 - p)}, {"XX", p * p}});
    PauliDistribution lix(2, {{"IX", (1 - p) * p}, {"XI", (1 - p) * p}});
    PauliDistribution out(2);
    auto add = [&](const PauliDistribution &d, double f) {
        for (const auto &[pp, w] : d) {
            out.add(pp, f * w);
        }
    };
    add(compose(li, li), 1 - 2 * q + 2 * q * q);
    add(compose(lix, lix), 2 * (1 - q) * q);
    add(compose(lix, li), 1);
    return out;
}

OracleReport run_oracle_suite(const ExperimentConfig &config, const OracleOptions &options) {
    ExperimentConfig c = config;
    if (c.lengths.empty()) {
        c.lengths = {1};
        c.shots_per_length = {0};
    }
    Experiment exp(c);
    exp.gadget().validate(1e-12);
    int max_r = options.max_r >= 0 ? options.max_r : 3;
    OracleReport rep;
    rep.tolerance = options.tolerance;
    rep.checks.push_back(lemma2_check(exp, max_r));
    rep.checks.push_back(closed_form_check(c, exp));
    rep.checks.push_back(transform_check(exp.code().n(), options));
    rep.checks.push_back(marginalization_check(exp));
    return rep;
}

}  // namespace lsd
