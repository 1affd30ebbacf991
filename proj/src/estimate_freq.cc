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


#include "lsd/estimate_freq.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lsd/parallel.h"
#include "lsd/rng.h"
#include "lsd/transform.h"

namespace lsd {

namespace {

double cell_variance(double f, uint64_t n) {
    double nn = static_cast<double>(n);
    return std::max(1 - f * f, 1 / nn) / nn;
}

std::string param_name(int col, bool log_scale) {
    if (col == 0) {
        return log_scale ? "log A" : "A";
    }
    if (col == 1 && !log_scale) {
        return "B";
    }
    int d = log_scale ? col - 1 : col - 2;
    return std::string(log_scale ? "log lambda[D=" : "lambda[D=") + std::to_string(d) + "]";
}

// Names of the columns a column-pivoted QR leaves out of the rank.
std::vector<int> dependent_columns(const Eigen::MatrixXd &m, int &rank) {
    if (m.cols() == 0 || m.rows() == 0) {
        rank = 0;
        std::vector<int> all(static_cast<size_t>(m.cols()));
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    qr.setThreshold(1e-10);
    rank = static_cast<int>(qr.rank());
    std::vector<int> out;
    for (int i = rank; i < m.cols(); i++) {
        out.push_back(qr.colsPermutation().indices()(i));
    }
    std::sort(out.begin(), out.end());
    return out;
}

double model_value(double a, double b, const std::vector<double> &lambda, const std::vector<int> &counts) {
    double prod = 1;
    for (size_t d = 0; d < counts.size(); d++) {
        if (counts[d]) {
            prod *= std::pow(lambda[d], counts[d]);
        }
    }
    return a * prod + b;
}

}  // namespace

size_t ShotTable::observable_position(const PauliOperator &q) const {
    for (size_t i = 0; i < observables.size(); i++) {
        if (observables[i] == q) {
            return i;
        }
    }
    throw std::invalid_argument("observable " + q.str() + " is not a nonidentity normalizer element");
}

ShotTable build_shot_table(const std::vector<ShotRecord> &shots,
                           const StabilizerCode &code,
                           const std::vector<Setting> &settings) {
    ShotTable t;
    t.num_detectors = code.num_syndromes();
    auto normalizer = code.normalizer_elements();
    for (size_t j = 1; j < normalizer.size(); j++) {
        t.observables.push_back(normalizer[j]);
        t.normalizer_index.push_back(j);
    }
    const size_t nobs = t.observables.size();
    std::vector<std::vector<std::optional<Readout>>> readouts(settings.size());
    for (size_t s = 0; s < settings.size(); s++) {
        for (const auto &q : t.observables) {
            readouts[s].push_back(readout_of(code, settings[s], q));
        }
    }
    std::map<std::vector<int>, int> cells;
    std::vector<std::vector<int>> shot_counts(shots.size());
    for (size_t i = 0; i < shots.size(); i++) {
        std::vector<int> counts(t.num_detectors, 0);
        for (uint64_t d : shots[i].detectors) {
            if (d >= static_cast<uint64_t>(t.num_detectors)) {
                throw std::invalid_argument("shot " + std::to_string(i) + " has a detector outside the code");
            }
            counts[d]++;
        }
        cells.emplace(counts, 0);
        shot_counts[i] = std::move(counts);
    }
    int id = 0;
    for (auto &[counts, cid] : cells) {
        cid = id++;
        t.count_vectors.push_back(counts);
    }
    t.shot_cell.resize(shots.size());
    t.shot_setting.resize(shots.size());
    t.shot_r.resize(shots.size());
    t.values.assign(shots.size() * nobs, 0);
    for (size_t i = 0; i < shots.size(); i++) {
        const auto &rec = shots[i];
        if (rec.setting < 0 || rec.setting >= static_cast<int>(settings.size())) {
            throw std::invalid_argument("shot " + std::to_string(i) + " refers to an unknown setting");
        }
        t.shot_cell[i] = cells.at(shot_counts[i]);
        t.shot_setting[i] = rec.setting;
        t.shot_r[i] = rec.r;
        for (size_t j = 0; j < nobs; j++) {
            const auto &ro = readouts[rec.setting][j];
            if (ro) {
                t.values[i * nobs + j] = derived_q(rec, *ro) ? -1 : 1;
            }
        }
    }
    return t;
}

std::vector<AggregatedCell> aggregate(const ShotTable &table, size_t obs) {
    std::vector<uint64_t> n(table.count_vectors.size(), 0);
    std::vector<double> sum(table.count_vectors.size(), 0);
    for (size_t i = 0; i < table.num_shots(); i++) {
        int8_t v = table.value(i, obs);
        if (v != 0) {
            n[table.shot_cell[i]]++;
            sum[table.shot_cell[i]] += v;
        }
    }
    std::vector<AggregatedCell> out;
    for (size_t c = 0; c < n.size(); c++) {
        if (n[c] == 0) {
            continue;
        }
        AggregatedCell cell;
        cell.cell_id = static_cast<int>(c);
        cell.counts = table.count_vectors[c];
        cell.n = n[c];
        cell.q_bar = sum[c] / static_cast<double>(n[c]);
        cell.var_q_bar = (1 - cell.q_bar * cell.q_bar) / static_cast<double>(n[c]);
        out.push_back(std::move(cell));
    }
    return out;
}

std::vector<AggregatedCell> aggregate(const std::vector<ShotRecord> &shots,
                                      const StabilizerCode &code,
                                      const Setting &setting,
                                      const PauliOperator &q) {
    if (shots.empty()) {
        throw EmptyInputError("aggregate: no shots");
    }
    auto ro = readout_of(code, setting, q);
    if (!ro) {
        throw std::invalid_argument("aggregate: " + q.str() + " is not measurable in setting " + setting.label());
    }
    std::map<std::vector<int>, std::pair<uint64_t, double>> acc;
    for (const auto &rec : shots) {
        std::vector<int> counts(code.num_syndromes(), 0);
        for (uint64_t d : rec.detectors) {
            counts.at(d)++;
        }
        auto &slot = acc[counts];
        slot.first++;
        slot.second += derived_q(rec, *ro) ? -1 : 1;
    }
    std::vector<AggregatedCell> out;
    int id = 0;
    for (const auto &[counts, ns] : acc) {
        AggregatedCell cell;
        cell.cell_id = id++;
        cell.counts = counts;
        cell.n = ns.first;
        cell.q_bar = ns.second / static_cast<double>(ns.first);
        cell.var_q_bar = (1 - cell.q_bar * cell.q_bar) / static_cast<double>(ns.first);
        out.push_back(std::move(cell));
    }
    return out;
}

double QFit::model(const std::vector<int> &counts) const { return model_value(a, b, lambda, counts); }

std::vector<double> QFit::params() const {
    std::vector<double> p{a, b};
    p.insert(p.end(), lambda.begin(), lambda.end());
    return p;
}

QFit fit_wls_log(const std::vector<AggregatedCell> &cells, int num_detectors, const FitOptions &options) {
    if (cells.empty()) {
        throw EmptyInputError("fit_wls_log: no cells");
    }
    QFit out;
    out.b_fixed = true;
    std::vector<const AggregatedCell *> kept;
    uint64_t total_shots = 0;
    for (const auto &c : cells) {
        total_shots += c.n;
        if (c.q_bar > 0) {
            kept.push_back(&c);
        } else {
            out.dropped_cells++;
            out.dropped_shots += c.n;
        }
    }
    out.dropped_fraction = static_cast<double>(out.dropped_shots) / static_cast<double>(total_shots);
    const int p = 1 + num_detectors;
    const int k = static_cast<int>(kept.size());
    Eigen::MatrixXd m(k, p);
    Eigen::VectorXd y(k);
    for (int i = 0; i < k; i++) {
        m(i, 0) = 1;
        for (int d = 0; d < num_detectors; d++) {
            m(i, 1 + d) = kept[i]->counts[d];
        }
        y(i) = std::log(kept[i]->q_bar);
    }
    int rank = 0;
    auto missing = dependent_columns(m, rank);
    if (rank < p) {
        std::string names;
        for (int col : missing) {
            names += (names.empty() ? "" : ", ") + param_name(col, true);
        }
        throw UnderIdentifiedError("fit_wls_log: design is rank deficient; unidentified: " + names);
    }

    Eigen::VectorXd f(k);
    for (int i = 0; i < k; i++) {
        f(i) = kept[i]->q_bar;
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd w(k);
    Eigen::MatrixXd h;
    out.converged = false;
    for (int iter = 0; iter < options.max_iterations; iter++) {
        for (int i = 0; i < k; i++) {
            double fi = std::min(std::max(f(i), 1e-12), 1.0);
            w(i) = fi * fi / cell_variance(fi, kept[i]->n);
        }
        h = m.transpose() * w.asDiagonal() * m;
        Eigen::VectorXd next = h.ldlt().solve(m.transpose() * w.asDiagonal() * y);
        double change = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        f = (m * beta).array().exp().matrix();
        if (change < 1e-13 && iter > 0) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged) {
        out.message = "fit_wls_log: weights did not settle; returning last iterate";
    }
    Eigen::MatrixXd hinv = h.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::VectorXd resid = y - m * beta;
    out.chi2 = resid.dot(w.asDiagonal() * resid);
    out.dof = k - p;

    out.a = std::exp(beta(0));
    out.b = 0;
    out.lambda.resize(num_detectors);
    for (int d = 0; d < num_detectors; d++) {
        out.lambda[d] = std::exp(beta(1 + d));
    }
    // theta = [A, B, lambda] against beta = [log A, log lambda].
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 + num_detectors, p);
    jac(0, 0) = out.a;
    for (int d = 0; d < num_detectors; d++) {
        jac(2 + d, 1 + d) = out.lambda[d];
    }
    out.cov = jac * hinv * jac.transpose();
    out.influence = Eigen::MatrixXd::Zero(2 + num_detectors, k);
    for (int i = 0; i < k; i++) {
        out.cell_ids.push_back(kept[i]->cell_id);
        out.influence.col(i) = jac * hinv * m.row(i).transpose() * (w(i) / f(i));
    }
    return out;
}

QFit fit_nonlinear(const std::vector<AggregatedCell> &cells,
                   int num_detectors,
                   const QFit &init,
                   const FitOptions &options) {
    if (cells.empty()) {
        throw EmptyInputError("fit_nonlinear: no cells");
    }
    const int np = 2 + num_detectors;
    const int k = static_cast<int>(cells.size());
    // With `tied` the constraint A + B <= 1 is active and B = 1 - A;
    // `pinned` parameters sit on a box bound.
    bool tied = false;
    std::vector<bool> pinned(np, false);
    std::vector<int> free_idx;
    auto set_free = [&]() {
        free_idx.clear();
        for (int j = 0; j < np; j++) {
            if ((j == 1 && (options.fix_b || tied)) || pinned[j]) {
                continue;
            }
            free_idx.push_back(j);
        }
    };
    set_free();

    auto project = [&](std::vector<double> &t) {
        t[0] = std::clamp(t[0], 0.0, 1.0);
        t[1] = options.fix_b ? options.fixed_b : std::clamp(t[1], -1.0, 1.0);
        for (int d = 0; d < num_detectors; d++) {
            t[2 + d] = std::clamp(t[2 + d], -1.0, 1.0);
        }
        if (tied) {
            t[1] = 1 - t[0];
        } else if (t[0] + t[1] > 1) {
            if (options.fix_b) {
                t[0] = 1 - t[1];
            } else {
                double excess = (t[0] + t[1] - 1) / 2;
                t[0] -= excess;
                t[1] -= excess;
            }
        }
    };
    auto eval = [&](const std::vector<double> &t, const std::vector<int> &counts, double *grad) {
        double prod = 1;
        for (int d = 0; d < num_detectors; d++) {
            if (counts[d]) {
                prod *= std::pow(t[2 + d], counts[d]);
            }
        }
        if (grad) {
            grad[0] = tied ? prod - 1 : prod;
            grad[1] = 1;
            for (int d = 0; d < num_detectors; d++) {
                if (counts[d] == 0) {
                    grad[2 + d] = 0;
                    continue;
                }
                double others = 1;
                for (int e = 0; e < num_detectors; e++) {
                    if (e != d && counts[e]) {
                        others *= std::pow(t[2 + e], counts[e]);
                    }
                }
                grad[2 + d] = t[0] * counts[d] * std::pow(t[2 + d], counts[d] - 1) * others;
            }
        }
        return t[0] * prod + t[1];
    };

    std::vector<double> theta = init.params();
    if (theta.size() != static_cast<size_t>(np)) {
        theta.assign(np, 1.0);
        theta[1] = 0;
    }
    if (options.fix_b) {
        theta[1] = options.fixed_b;
    }
    project(theta);

    Eigen::MatrixXd jac;
    Eigen::VectorXd w(k);
    Eigen::VectorXd resid(k);
    std::vector<double> grad(np);
    auto linearize = [&](const std::vector<double> &t) {
        jac.resize(k, static_cast<int>(free_idx.size()));
        for (int i = 0; i < k; i++) {
            double f = eval(t, cells[i].counts, grad.data());
            w(i) = 1 / cell_variance(f, cells[i].n);
            resid(i) = cells[i].q_bar - f;
            for (int j = 0; j < static_cast<int>(free_idx.size()); j++) {
                jac(i, j) = grad[free_idx[j]];
            }
        }
    };
    auto cost = [&](const std::vector<double> &t, const Eigen::VectorXd &weights) {
        double s = 0;
        for (int i = 0; i < k; i++) {
            double r = cells[i].q_bar - eval(t, cells[i].counts, nullptr);
            s += weights(i) * r * r;
        }
        return s;
    };
    auto minimize = [&]() {
        const int nf = static_cast<int>(free_idx.size());
        double mu = 1e-3;
        for (int iter = 0; iter < options.max_iterations; iter++) {
            linearize(theta);
            Eigen::MatrixXd h = jac.transpose() * w.asDiagonal() * jac;
            Eigen::VectorXd g = jac.transpose() * w.asDiagonal() * resid;
            double current = cost(theta, w);
            bool accepted = false;
            double step = 0;
            for (int attempt = 0; attempt < 30; attempt++) {
                Eigen::MatrixXd damped = h;
                for (int j = 0; j < nf; j++) {
                    damped(j, j) += mu * std::max(h(j, j), 1e-12);
                }
                Eigen::VectorXd delta = damped.ldlt().solve(g);
                std::vector<double> trial = theta;
                for (int j = 0; j < nf; j++) {
                    trial[free_idx[j]] += delta(j);
                }
                project(trial);
                double c = cost(trial, w);
                if (c <= current) {
                    step = 0;
                    for (int j = 0; j < np; j++) {
                        step = std::max(step, std::abs(trial[j] - theta[j]));
                    }
                    theta = trial;
                    mu = std::max(mu / 3, 1e-12);
                    accepted = true;
                    break;
                }
                mu *= 4;
            }
            if (!accepted || step < options.tolerance) {
                return true;
            }
        }
        return false;
    };

    QFit out = init;
    out.b_fixed = options.fix_b;
    out.message.clear();
    out.dropped_cells = 0;
    out.dropped_shots = 0;
    out.dropped_fraction = 0;
    out.converged = minimize();
    const double edge = 1e-9;
    bool active = false;
    if (!options.fix_b && theta[0] + theta[1] >= 1 - edge) {
        tied = true;
        active = true;
    }
    if (theta[0] <= edge || (!tied && theta[0] >= 1 - edge)) {
        pinned[0] = true;
        active = true;
    }
    for (int d = 0; d < num_detectors; d++) {
        if (std::abs(theta[2 + d]) >= 1 - edge) {
            pinned[2 + d] = true;
            active = true;
        }
    }
    if (active) {
        set_free();
        project(theta);
        out.converged = minimize();
        out.message = "fit_nonlinear: solution on the parameter boundary";
    }
    if (!out.converged) {
        out.message = "fit_nonlinear: reached max iterations; returning best iterate";
    }
    const int nf = static_cast<int>(free_idx.size());

    linearize(theta);
    Eigen::MatrixXd h = jac.transpose() * w.asDiagonal() * jac;
    int rank = 0;
    Eigen::MatrixXd scaled = w.cwiseSqrt().asDiagonal() * jac;
    auto missing = dependent_columns(scaled, rank);
    if (rank < nf) {
        std::string names;
        for (int col : missing) {
            names += (names.empty() ? "" : ", ") + param_name(free_idx[col], false);
        }
        throw UnderIdentifiedError("fit_nonlinear: model is under-identified; unidentified: " + names);
    }
    Eigen::MatrixXd hinv = h.ldlt().solve(Eigen::MatrixXd::Identity(nf, nf));
    // Maps free parameters to all parameters; B follows -A when tied.
    Eigen::MatrixXd embed = Eigen::MatrixXd::Zero(np, nf);
    for (int j = 0; j < nf; j++) {
        embed(free_idx[j], j) = 1;
    }
    if (tied && !pinned[0]) {
        embed(1, 0) = -1;
    }
    out.a = theta[0];
    out.b = theta[1];
    out.lambda.assign(theta.begin() + 2, theta.end());
    out.cov = embed * hinv * embed.transpose();
    out.chi2 = resid.dot(w.asDiagonal() * resid);
    out.dof = k - nf;
    out.cell_ids.clear();
    out.influence = Eigen::MatrixXd::Zero(np, k);
    for (int i = 0; i < k; i++) {
        out.cell_ids.push_back(cells[i].cell_id);
        out.influence.col(i) = embed * (hinv * jac.row(i).transpose() * w(i));
    }
    return out;
}

const QFit &FitResult::fit_for(const PauliOperator &q) const {
    for (const auto &f : per_q) {
        if (f.q == q) {
            return f;
        }
    }
    throw std::invalid_argument("no fit for observable " + q.str());
}

Eigen::MatrixXd joint_lambda_covariance(const ShotTable &table, const std::vector<QFit> &fits) {
    const size_t nobs = table.observables.size();
    const int s = table.num_detectors;
    if (fits.size() != nobs) {
        throw std::invalid_argument("joint_lambda_covariance: one fit per observable expected");
    }
    const size_t ncells = table.count_vectors.size();
    // Influence column of each (observable, cell), -1 when the fit ignores the cell.
    std::vector<std::vector<int>> column(nobs, std::vector<int>(ncells, -1));
    for (size_t j = 0; j < nobs; j++) {
        for (size_t i = 0; i < fits[j].cell_ids.size(); i++) {
            column[j][fits[j].cell_ids[i]] = static_cast<int>(i);
        }
    }
    std::vector<std::vector<size_t>> shots_of(ncells);
    for (size_t i = 0; i < table.num_shots(); i++) {
        shots_of[table.shot_cell[i]].push_back(i);
    }
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(nobs * s, nobs * s);
    for (size_t c = 0; c < ncells; c++) {
        std::vector<size_t> active;
        for (size_t j = 0; j < nobs; j++) {
            if (column[j][c] >= 0) {
                active.push_back(j);
            }
        }
        if (active.empty()) {
            continue;
        }
        const size_t na = active.size();
        std::vector<double> n(na, 0);
        for (size_t a = 0; a < na; a++) {
            for (size_t i : shots_of[c]) {
                if (table.value(i, active[a]) != 0) {
                    n[a]++;
                }
            }
        }
        Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(na, na);
        for (size_t a = 0; a < na; a++) {
            double f = fits[active[a]].model(table.count_vectors[c]);
            sigma(a, a) = cell_variance(f, static_cast<uint64_t>(n[a]));
            for (size_t b = a + 1; b < na; b++) {
                double sx = 0;
                double sy = 0;
                double sxy = 0;
                double ns = 0;
                for (size_t i : shots_of[c]) {
                    int8_t x = table.value(i, active[a]);
                    int8_t y = table.value(i, active[b]);
                    if (x != 0 && y != 0) {
                        sx += x;
                        sy += y;
                        sxy += x * y;
                        ns++;
                    }
                }
                if (ns < 2) {
                    continue;
                }
                double per_shot = (sxy - sx * sy / ns) / (ns - 1);
                sigma(a, b) = sigma(b, a) = per_shot * ns / (n[a] * n[b]);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
        Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
        sigma = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(nobs * s, na);
        for (size_t a = 0; a < na; a++) {
            const auto &fit = fits[active[a]];
            for (int d = 0; d < s; d++) {
                g(active[a] * s + d, a) = fit.influence(2 + d, column[active[a]][c]);
            }
        }
        cov += g * sigma * g.transpose();
    }
    return cov;
}

std::map<uint64_t, RateEstimate> estimate_detector_rates(const std::vector<ShotRecord> &shots, int num_detectors) {
    if (shots.empty()) {
        throw EmptyInputError("estimate_detector_rates: no shots");
    }
    std::vector<uint64_t> counts(num_detectors, 0);
    uint64_t total = 0;
    for (const auto &rec : shots) {
        for (uint64_t d : rec.detectors) {
            counts.at(d)++;
            total++;
        }
    }
    if (total == 0) {
        throw EmptyInputError("estimate_detector_rates: no detector slots");
    }
    std::map<uint64_t, RateEstimate> out;
    for (int d = 0; d < num_detectors; d++) {
        double p = static_cast<double>(counts[d]) / static_cast<double>(total);
        out[d] = {p, std::sqrt(p * (1 - p) / static_cast<double>(total))};
    }
    return out;
}

std::vector<double> project_simplex(const std::vector<double> &v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0;
    double tau = 0;
    for (size_t i = 0; i < u.size(); i++) {
        cum += u[i];
        double t = (cum - 1) / static_cast<double>(i + 1);
        if (u[i] - t > 0) {
            tau = t;
        }
    }
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); i++) {
        out[i] = std::max(v[i] - tau, 0.0);
    }
    return out;
}

namespace {

struct BoundValues {
    std::vector<double> post_selected;
    std::vector<double> ideal_decoder;
};

BoundValues bounds_with_relabel(const std::vector<double> &coset,
                                const StabilizerCode &code,
                                const std::vector<uint64_t> &relabel) {
    const uint64_t nsyn = static_cast<uint64_t>(code.num_syndromes());
    const size_t nlog = static_cast<size_t>(code.num_logicals());
    BoundValues out{std::vector<double>(nlog, 0.0), std::vector<double>(nlog, 0.0)};
    double trivial = 0;
    double total = 0;
    for (size_t c = 0; c < coset.size(); c++) {
        uint64_t syn = c & (nsyn - 1);
        uint64_t l = c >> code.num_stabilizers();
        total += coset[c];
        out.ideal_decoder[l ^ relabel[syn]] += coset[c];
        if (syn == 0) {
            trivial += coset[c];
            out.post_selected[l] += coset[c];
        }
    }
    for (auto &v : out.post_selected) {
        v /= trivial;
    }
    for (auto &v : out.ideal_decoder) {
        v /= total;
    }
    return out;
}

}  // namespace

ChannelEstimateFreq invert_to_cosets(const FitResult &fit,
                                     const std::map<uint64_t, RateEstimate> &rates,
                                     const StabilizerCode &code,
                                     bool project_to_simplex) {
    const int s = fit.num_detectors;
    const size_t ncos = static_cast<size_t>(code.num_cosets());
    if (fit.per_q.size() + 1 != ncos) {
        throw IncompleteInputError("invert_to_cosets: need one fit per nonidentity normalizer element");
    }
    std::string absent;
    for (const auto &q : fit.per_q) {
        if (!q.has_data) {
            absent += (absent.empty() ? "" : ", ") + q.q.str();
        }
    }
    if (!absent.empty()) {
        throw IncompleteInputError("invert_to_cosets: no data for observables " + absent);
    }
    auto sign = coset_sign_matrix(code);
    Eigen::MatrixXd sm(ncos, ncos - 1);
    for (size_t c = 0; c < ncos; c++) {
        for (size_t j = 1; j < ncos; j++) {
            sm(c, j - 1) = sign[c][j];
        }
    }
    ChannelEstimateFreq out;
    out.simplex_projected = project_to_simplex;
    for (int d = 0; d < s; d++) {
        DetectorEstimate est;
        est.detector = static_cast<uint64_t>(d);
        auto it = rates.find(est.detector);
        if (it != rates.end()) {
            est.rate = it->second;
        }
        std::vector<double> lams(ncos, 1.0);
        std::vector<int> idx;
        for (size_t j = 1; j < ncos; j++) {
            lams[j] = fit.per_q[j - 1].lambda[d];
            idx.push_back(static_cast<int>((j - 1) * s + d));
        }
        est.coset = coset_probabilities_from_eigenvalues(lams, code);
        Eigen::MatrixXd block(ncos - 1, ncos - 1);
        for (size_t a = 0; a + 1 < ncos; a++) {
            for (size_t b = 0; b + 1 < ncos; b++) {
                block(a, b) = fit.lambda_cov(idx[a], idx[b]);
            }
        }
        est.coset_cov = sm * block * sm.transpose();
        if (project_to_simplex) {
            est.coset = project_simplex(est.coset);
        }
        double p = est.rate.p;
        double vp = est.rate.stderr_ * est.rate.stderr_;
        for (size_t c = 0; c < ncos; c++) {
            est.coset_total.push_back(p * est.coset[c]);
            est.coset_total_stderr.push_back(
                std::sqrt(std::max(p * p * est.coset_cov(c, c) + est.coset[c] * est.coset[c] * vp, 0.0)));
        }

        LogicalSplit split;
        split.k = code.k();
        for (size_t c = 0; c < ncos; c++) {
            split.parts[c & (code.num_syndromes() - 1)][c >> code.num_stabilizers()] += est.coset[c];
        }
        try {
            est.bounds = bound_channels(split);
            est.bounds_defined = true;
        } catch (const UndefinedChannelError &) {
            est.bounds_defined = false;
        }
        if (est.bounds_defined) {
            const size_t nlog = static_cast<size_t>(code.num_logicals());
            std::vector<uint64_t> relabel(code.num_syndromes(), 0);
            size_t pos = 0;
            for (const auto &[e, part] : split.parts) {
                relabel[e] = est.bounds.decoder_relabel[pos++];
            }
            Eigen::MatrixXd jac_ps(nlog, ncos);
            Eigen::MatrixXd jac_dec(nlog, ncos);
            for (size_t c = 0; c < ncos; c++) {
                double h = 1e-7;
                auto up = est.coset;
                auto down = est.coset;
                up[c] += h;
                down[c] -= h;
                auto bu = bounds_with_relabel(up, code, relabel);
                auto bd = bounds_with_relabel(down, code, relabel);
                for (size_t l = 0; l < nlog; l++) {
                    jac_ps(l, c) = (bu.post_selected[l] - bd.post_selected[l]) / (2 * h);
                    jac_dec(l, c) = (bu.ideal_decoder[l] - bd.ideal_decoder[l]) / (2 * h);
                }
            }
            Eigen::MatrixXd cps = jac_ps * est.coset_cov * jac_ps.transpose();
            Eigen::MatrixXd cdec = jac_dec * est.coset_cov * jac_dec.transpose();
            for (size_t l = 0; l < nlog; l++) {
                est.post_selected_stderr.push_back(std::sqrt(std::max(cps(l, l), 0.0)));
                est.ideal_decoder_stderr.push_back(std::sqrt(std::max(cdec(l, l), 0.0)));
            }
        }
        out.detectors.push_back(std::move(est));
    }
    return out;
}

namespace {

// Log-WLS start refined by the bounded fit; a rank-deficient start falls back to lambda = 1.
QFit fit_cells(const std::vector<AggregatedCell> &cells, int num_detectors, const FreqOptions &options) {
    QFit init;
    bool have_init = true;
    try {
        init = fit_wls_log(cells, num_detectors, options.fit);
    } catch (const UnderIdentifiedError &) {
        if (!options.nonlinear) {
            throw;
        }
        have_init = false;
    }
    if (!options.nonlinear) {
        return init;
    }
    if (!have_init) {
        init.lambda.assign(num_detectors, 1.0);
        init.a = 1;
        init.b = 0;
    }
    QFit fit = fit_nonlinear(cells, num_detectors, init, options.fit);
    if (have_init) {
        fit.dropped_cells = init.dropped_cells;
        fit.dropped_shots = init.dropped_shots;
        fit.dropped_fraction = init.dropped_fraction;
    }
    return fit;
}

}  // namespace

std::vector<QFit> fit_all(const ShotTable &table, const FreqOptions &options) {
    std::vector<QFit> fits;
    for (size_t j = 0; j < table.observables.size(); j++) {
        auto cells = aggregate(table, j);
        QFit fit;
        if (cells.empty()) {
            fit.has_data = false;
            fit.message = "no shots read out this observable";
            fit.lambda.assign(table.num_detectors, 1.0);
            fit.cov = Eigen::MatrixXd::Zero(2 + table.num_detectors, 2 + table.num_detectors);
        } else {
            try {
                fit = fit_cells(cells, table.num_detectors, options);
            } catch (const std::exception &e) {
                throw UnderIdentifiedError("observable " + table.observables[j].str() + ": " + e.what());
            }
        }
        fit.q = table.observables[j];
        fit.normalizer_index = table.normalizer_index[j];
        fits.push_back(std::move(fit));
    }
    return fits;
}

FreqEstimate run_freq_pipeline(const std::vector<ShotRecord> &shots,
                               const StabilizerCode &code,
                               const std::vector<Setting> &settings,
                               const FreqOptions &options) {
    if (shots.empty()) {
        throw EmptyInputError("run_freq_pipeline: no shots");
    }
    FreqEstimate out;
    out.table = build_shot_table(shots, code, settings);
    out.fit.num_detectors = out.table.num_detectors;
    out.fit.per_q = fit_all(out.table, options);
    out.fit.lambda_cov = joint_lambda_covariance(out.table, out.fit.per_q);
    out.rates = estimate_detector_rates(shots, out.table.num_detectors);
    out.channels = invert_to_cosets(out.fit, out.rates, code, options.project_to_simplex);
    return out;
}

BootstrapResult bootstrap(const ShotTable &table,
                          int replicas,
                          uint64_t seed,
                          const FreqOptions &options,
                          double ci_level) {
    if (replicas < 1) {
        throw std::invalid_argument("bootstrap: replicas must be positive");
    }
    std::map<std::pair<int, int>, std::vector<size_t>> strata;
    for (size_t i = 0; i < table.num_shots(); i++) {
        strata[{table.shot_setting[i], table.shot_r[i]}].push_back(i);
    }
    for (const auto &[key, members] : strata) {
        if (members.size() < 2) {
            throw std::invalid_argument("bootstrap: stratum (setting " + std::to_string(key.first) + ", r " +
                                        std::to_string(key.second) + ") has fewer than 2 shots");
        }
    }
    const size_t nobs = table.observables.size();
    const int s = table.num_detectors;
    const size_t ncells = table.count_vectors.size();
    const size_t dim = nobs * s;
    std::vector<Eigen::VectorXd> draws(replicas);
    std::vector<char> ok(replicas, 0);

    LSD_OMP_PARALLEL_FOR_DYNAMIC
    for (int b = 0; b < replicas; b++) {
        Rng rng(seed, kStreamBootstrap, static_cast<uint64_t>(b));
        std::vector<uint64_t> n(ncells * nobs, 0);
        std::vector<double> sum(ncells * nobs, 0);
        for (const auto &[key, members] : strata) {
            for (size_t t = 0; t < members.size(); t++) {
                size_t i = members[rng.below(members.size())];
                size_t c = table.shot_cell[i];
                for (size_t j = 0; j < nobs; j++) {
                    int8_t v = table.value(i, j);
                    if (v != 0) {
                        n[c * nobs + j]++;
                        sum[c * nobs + j] += v;
                    }
                }
            }
        }
        Eigen::VectorXd draw(dim);
        bool good = true;
        for (size_t j = 0; j < nobs && good; j++) {
            std::vector<AggregatedCell> cells;
            for (size_t c = 0; c < ncells; c++) {
                uint64_t nn = n[c * nobs + j];
                if (nn == 0) {
                    continue;
                }
                AggregatedCell cell;
                cell.cell_id = static_cast<int>(c);
                cell.counts = table.count_vectors[c];
                cell.n = nn;
                cell.q_bar = sum[c * nobs + j] / static_cast<double>(nn);
                cell.var_q_bar = (1 - cell.q_bar * cell.q_bar) / static_cast<double>(nn);
                cells.push_back(std::move(cell));
            }
            if (cells.empty()) {
                good = false;
                break;
            }
            try {
                QFit fit = fit_cells(cells, s, options);
                for (int d = 0; d < s; d++) {
                    draw(j * s + d) = fit.lambda[d];
                }
            } catch (const std::exception &) {
                good = false;
            }
        }
        if (good) {
            draws[b] = std::move(draw);
            ok[b] = 1;
        }
    }

    std::vector<Eigen::VectorXd> valid;
    for (int b = 0; b < replicas; b++) {
        if (ok[b]) {
            valid.push_back(draws[b]);
        }
    }
    if (valid.size() < 2) {
        throw UnderIdentifiedError("bootstrap: fewer than two replicas could be fitted");
    }
    BootstrapResult out;
    out.replicas = static_cast<int>(valid.size());
    out.mean = Eigen::VectorXd::Zero(dim);
    for (const auto &v : valid) {
        out.mean += v;
    }
    out.mean /= static_cast<double>(valid.size());
    out.cov = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto &v : valid) {
        Eigen::VectorXd d = v - out.mean;
        out.cov += d * d.transpose();
    }
    out.cov /= static_cast<double>(valid.size() - 1);
    out.ci_low.resize(dim);
    out.ci_high.resize(dim);
    std::vector<double> col(valid.size());
    double lo_q = (1 - ci_level) / 2;
    double hi_q = 1 - lo_q;
    for (size_t i = 0; i < dim; i++) {
        for (size_t b = 0; b < valid.size(); b++) {
            col[b] = valid[b](i);
        }
        std::sort(col.begin(), col.end());
        auto at = [&](double qq) {
            double pos = qq * static_cast<double>(col.size() - 1);
            size_t lo = static_cast<size_t>(std::floor(pos));
            size_t hi = std::min(lo + 1, col.size() - 1);
            return col[lo] + (pos - lo) * (col[hi] - col[lo]);
        };
        out.ci_low(i) = at(lo_q);
        out.ci_high(i) = at(hi_q);
    }
    return out;
}

}  // namespace lsd
