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


#include "lsd/estimate_bayes.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lsd/parallel.h"
#include "lsd/rng.h"
#include "lsd/transform.h"

namespace lsd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double beta_binomial_kernel(uint64_t k, uint64_t n, double mean, double nu) {
    double a = mean * nu;
    double b = (1 - mean) * nu;
    return std::lgamma(static_cast<double>(k) + a) + std::lgamma(static_cast<double>(n - k) + b) -
           std::lgamma(static_cast<double>(n) + nu) + std::lgamma(nu) - std::lgamma(a) - std::lgamma(b);
}

void check_spec(const BayesModelSpec &spec) {
    if (spec.dirichlet_on_probabilities) {
        throw NotImplementedError("dirichlet_on_probabilities: model not implemented");
    }
    if (spec.alpha_a <= 0 || spec.alpha_b <= 0 || spec.alpha_c <= 0) {
        throw std::invalid_argument("Dirichlet concentrations must be positive (alpha_c = 0 is improper)");
    }
}

std::vector<ScaledBetaPrior> priors_for(const PauliOperator &q, int num_detectors, const BayesModelSpec &spec) {
    auto it = spec.priors.find(q.str());
    if (it == spec.priors.end()) {
        return std::vector<ScaledBetaPrior>(num_detectors);
    }
    if (static_cast<int>(it->second.size()) != num_detectors) {
        throw std::invalid_argument("prior/parameter mismatch for " + q.str() + ": " +
                                    std::to_string(it->second.size()) + " priors for " +
                                    std::to_string(num_detectors) + " detector values");
    }
    for (const auto &p : it->second) {
        if (!(p.mu > 0 && p.mu < 1) || !(p.nu > 0)) {
            throw std::invalid_argument("scaled-Beta prior for " + q.str() + " needs 0 < mu < 1 and nu > 0");
        }
    }
    return it->second;
}

// Unconstrained coordinates: logit((lambda + 1) / 2) per detector value,
// logit(w) with w = C^alpha_c, and log(t) < 0 with t = A / (A + B). Under the
// Dirichlet prior t ~ Beta(alpha_a, alpha_b) independently of C, and w
// keeps the C -> 0 tail at unit scale. The last coordinate is sheared to
// log t + log(1 - lambda_ref^n_ref), which straightens the weakly identified
// ridge A (1 - lambda^n) = const; the shear has unit Jacobian.
struct Shear {
    int detector = 0;
    int count = 0;
    /// Shot-weighted 20% and 80% quantiles of the reference count.
    int low = 0;
    int high = 0;

    double offset(double lambda) const { return count > 0 ? std::log1p(-std::pow(lambda, count)) : 0.0; }
};

Shear shear_for(const BayesModel &model) {
    Shear sh;
    std::vector<double> weight(model.num_detectors, 0);
    double shots = 0;
    for (const auto &cell : model.cells) {
        shots += static_cast<double>(cell.n);
        for (int d = 0; d < model.num_detectors; d++) {
            weight[d] += static_cast<double>(cell.n) * cell.counts[d];
        }
    }
    if (shots <= 0 || model.num_detectors == 0) {
        return sh;
    }
    sh.detector = static_cast<int>(std::max_element(weight.begin(), weight.end()) - weight.begin());
    sh.count = static_cast<int>(std::lround(weight[sh.detector] / shots));
    std::vector<std::pair<int, double>> mass;
    for (const auto &cell : model.cells) {
        mass.emplace_back(cell.counts[sh.detector], static_cast<double>(cell.n));
    }
    std::sort(mass.begin(), mass.end());
    double seen = 0;
    for (const auto &[count, n] : mass) {
        seen += n;
        if (sh.low == 0 && seen >= 0.2 * shots) {
            sh.low = count;
        }
        if (sh.high == 0 && seen >= 0.8 * shots) {
            sh.high = count;
        }
    }
    return sh;
}

double one_minus_power(double lambda, int n) { return -std::expm1(n * std::log(lambda)); }

// Solves for (t', lambda') keeping the model mean at counts na < nb fixed when
// the intercept factor 1 - C becomes (1 - C) / rho. Returns the log Jacobian
// of the map in sampler coordinates, or NaN when no solution exists.
double regime_jump(double t, double lam, double rho, int na, int nb, double &t_new, double &lam_new) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (!(lam > 0 && lam < 1) || na < 1 || nb <= na) {
        return nan;
    }
    double ra = 1 - rho + rho * t * one_minus_power(lam, na);
    double rb = 1 - rho + rho * t * one_minus_power(lam, nb);
    if (!(ra > 0 && rb > ra)) {
        return nan;
    }
    const double q = ra / rb;
    const double floor = static_cast<double>(na) / nb;
    if (!(q > floor && q < 1)) {
        return nan;
    }
    // g_a / g_b falls from 1 to na / nb as lambda goes from 0 to 1; bisect in
    // v = -log(1 - lambda) for resolution near 1.
    double lo = 1e-12;
    double hi = 60;
    for (int i = 0; i < 200; i++) {
        double mid = (lo + hi) / 2;
        double l = -std::expm1(-mid);
        double h = one_minus_power(l, na) / one_minus_power(l, nb);
        (h > q ? lo : hi) = mid;
    }
    lam_new = -std::expm1(-(lo + hi) / 2);
    if (!(lam_new > 0 && lam_new < 1)) {
        return nan;
    }
    t_new = ra / one_minus_power(lam_new, na);
    if (!(t_new > 0 && t_new < 1)) {
        return nan;
    }
    auto wronskian = [&](double l) {
        double ga = one_minus_power(l, na);
        double gb = one_minus_power(l, nb);
        double dga = -na * std::pow(l, na - 1);
        double dgb = -nb * std::pow(l, nb - 1);
        return ga * dgb - gb * dga;
    };
    return 2 * std::log(rho) + 2 * (std::log(t) - std::log(t_new)) + std::log1p(-lam * lam) -
           std::log1p(-lam_new * lam_new) + std::log(std::abs(wronskian(lam))) -
           std::log(std::abs(wronskian(lam_new)));
}

struct Coordinates {
    std::vector<double> lambda;
    double a = 0;
    double b = 0;
    double w = 0;
    double t = 0;
    double c = 0;
};

double sigmoid(double x) { return x >= 0 ? 1 / (1 + std::exp(-x)) : std::exp(x) / (1 + std::exp(x)); }

Coordinates from_unconstrained(const Eigen::VectorXd &x, int s, double alpha_c, const Shear &shear) {
    Coordinates c;
    c.lambda.resize(s);
    for (int d = 0; d < s; d++) {
        c.lambda[d] = std::tanh(x(d) / 2);
    }
    c.w = sigmoid(x(s));
    c.t = std::exp(x(s + 1) - shear.offset(c.lambda[shear.detector]));
    c.c = std::exp(std::log(c.w) / alpha_c);
    c.a = (1 - c.c) * c.t;
    c.b = (1 - c.c) * (1 - c.t);
    return c;
}

double logit(double p) { return std::log(p / (1 - p)); }

Eigen::VectorXd to_unconstrained(const std::vector<double> &init, int s, double alpha_c, const Shear &shear) {
    Eigen::VectorXd x(s + 2);
    for (int d = 0; d < s; d++) {
        double lam = std::clamp(init[d], -0.999, 0.999);
        x(d) = 2 * std::atanh(lam);
    }
    double a = std::max(init[s], 1e-3);
    double b = std::max(init[s + 1], 1e-3);
    double c = std::clamp(1 - a - b, 1e-6, 1 - 1e-6);
    x(s) = logit(std::clamp(std::pow(c, alpha_c), 1e-9, 1 - 1e-9));
    x(s + 1) = std::log(std::min(a / (a + b), 1 - 1e-9)) + shear.offset(std::tanh(x(shear.detector) / 2));
    return x;
}

struct ChainOutput {
    Eigen::MatrixXd draws;
    Eigen::MatrixXd cell_draws;
    std::vector<double> cell_sum;
    std::vector<double> nu_sum;
    double acceptance_joint = 0;
    double acceptance_nu = 0;
};

uint64_t chain_index(const BayesModel &model, int chain) {
    return splitmix64(model.q.x ^ splitmix64(model.q.z ^ splitmix64(static_cast<uint64_t>(model.q.n)))) +
           static_cast<uint64_t>(chain);
}

ChainOutput run_chain(const BayesModel &model, const SamplerOptions &options, int chain) {
    const int s = model.num_detectors;
    const int dim = s + 2;
    const int ng = model.num_groups();
    const size_t nc = model.cells.size();
    Rng rng(options.seed, kStreamChain, chain_index(model, chain));
    const Shear shear = shear_for(model);

    std::vector<std::vector<size_t>> group_cells(ng);
    for (size_t c = 0; c < nc; c++) {
        group_cells[model.nu_group[c]].push_back(c);
    }

    Eigen::VectorXd x = to_unconstrained(model.initial, s, model.alpha_c, shear);
    for (int j = 0; j < dim; j++) {
        x(j) += 0.1 * rng.normal();
    }
    std::vector<double> nu(ng);
    for (int g = 0; g < ng; g++) {
        nu[g] = model.nu_shape[g];
    }

    std::vector<double> means(nc);
    auto cell_means = [&](const Coordinates &c, std::vector<double> &out) {
        for (size_t i = 0; i < nc; i++) {
            out[i] = model.cell_mean(c.lambda, c.a, c.b, i);
            if (!(out[i] > 0 && out[i] < 1)) {
                return false;
            }
        }
        return true;
    };
    auto group_loglik = [&](int g, double nu_g, const std::vector<double> &m) {
        double total = 0;
        for (size_t i : group_cells[g]) {
            total += beta_binomial_kernel(model.cells[i].successes, model.cells[i].n, m[i], nu_g);
        }
        return total;
    };
    // Log target in unconstrained coordinates for the (lambda, A, B) block.
    auto joint_target = [&](const Eigen::VectorXd &y, std::vector<double> &m) {
        Coordinates c = from_unconstrained(y, s, model.alpha_c, shear);
        if (!(c.w > 0 && c.w < 1 && c.t > 0 && c.t < 1 && c.c < 1 && std::isfinite(c.t))) {
            return kNegInf;
        }
        // Densities below include the coordinate Jacobians.
        double lp = std::log(c.w) + std::log1p(-c.w) + (model.alpha_a + model.alpha_b - 1) * std::log1p(-c.c) +
                    model.alpha_a * std::log(c.t) + (model.alpha_b - 1) * std::log1p(-c.t);
        for (int d = 0; d < s; d++) {
            double u = sigmoid(y(d));
            if (!(u > 0 && u < 1) || std::abs(c.lambda[d]) >= 1) {
                return kNegInf;
            }
            const auto &p = model.lambda_priors[d];
            lp += p.mu * p.nu * std::log(u) + (1 - p.mu) * p.nu * std::log1p(-u);
        }
        if (!model.likelihood_enabled) {
            return lp;
        }
        if (!cell_means(c, m)) {
            return kNegInf;
        }
        for (int g = 0; g < ng; g++) {
            lp += group_loglik(g, nu[g], m);
        }
        return lp;
    };

    double current = joint_target(x, means);
    for (int attempt = 0; attempt < 100 && !std::isfinite(current); attempt++) {
        x = to_unconstrained(model.initial, s, model.alpha_c, shear);
        for (int j = 0; j < dim; j++) {
            x(j) += 0.01 * rng.normal();
        }
        current = joint_target(x, means);
    }
    if (!std::isfinite(current)) {
        throw std::runtime_error("sample_posterior: no finite starting point for " + model.q.str());
    }

    Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(dim, dim) * 0.1;
    double log_scale = 0;
    // Windowed warmup: scale only in the first and last 15%, covariance
    // re-estimated over doubling windows in between.
    const int slow_begin = options.warmup * 15 / 100;
    const int slow_end = options.warmup * 85 / 100;
    int window_size = std::max(25, (slow_end - slow_begin) / 15);
    int window_start = 0;
    int window_end = slow_begin + window_size;
    if (window_end + 2 * window_size > slow_end) {
        window_end = slow_end;
    }
    Eigen::VectorXd run_mean = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd run_m2 = Eigen::MatrixXd::Zero(dim, dim);
    int run_n = 0;
    std::vector<double> nu_step(ng);
    for (int g = 0; g < ng; g++) {
        nu_step[g] = 1 / std::sqrt(std::max(model.nu_shape[g], 1.0));
    }

    ChainOutput out;
    out.draws.resize(options.samples, dim);
    out.cell_sum.assign(nc, 0);
    out.nu_sum.assign(ng, 0);
    if (options.keep_cell_draws) {
        out.cell_draws.resize(options.samples, static_cast<Eigen::Index>(nc));
    }
    std::vector<double> trial_means(nc);
    std::vector<double> current_means = means;
    long accepted_joint = 0;
    long accepted_nu = 0;
    const int total = options.warmup + options.samples;
    for (int it = 0; it < total; it++) {
        const bool warm = it < options.warmup;
        const double gain = 1 / std::pow(it + 1.0, 0.6);

        Eigen::VectorXd z(dim);
        for (int j = 0; j < dim; j++) {
            z(j) = rng.normal();
        }
        Eigen::VectorXd y = x + std::exp(log_scale) * (chol * z);
        double proposed = joint_target(y, trial_means);
        double log_alpha = proposed - current;
        double accept_prob = std::isfinite(log_alpha) ? std::min(1.0, std::exp(log_alpha)) : 0.0;
        if (rng.uniform() < accept_prob) {
            x = y;
            current = proposed;
            current_means.swap(trial_means);
            if (!warm) {
                accepted_joint++;
            }
        }
        if (warm) {
            log_scale += 1 / std::pow(it - window_start + 1.0, 0.6) * (accept_prob - 0.3);
            if (it >= slow_begin && it < slow_end) {
                run_n++;
                Eigen::VectorXd delta = x - run_mean;
                run_mean += delta / run_n;
                run_m2 += delta * (x - run_mean).transpose();
            }
            if (it + 1 == window_end && it + 1 <= slow_end && run_n > 2) {
                // Regularized window covariance, then restart scale adaptation.
                double n = run_n;
                Eigen::MatrixXd cov = (n / (n + 5)) * run_m2 / (n - 1) +
                                      1e-3 * (5 / (n + 5)) * Eigen::MatrixXd::Identity(dim, dim);
                Eigen::LLT<Eigen::MatrixXd> llt(cov * (2.38 * 2.38 / dim));
                if (llt.info() == Eigen::Success) {
                    chol = llt.matrixL();
                    log_scale = 0;
                }
                run_n = 0;
                run_mean.setZero();
                run_m2.setZero();
                window_start = it + 1;
                window_size *= 2;
                window_end = window_start + window_size;
                if (window_end + 2 * window_size > slow_end) {
                    window_end = slow_end;
                }
            }
        }

        // Independence proposal for w from its uniform prior. The likelihood
        // is flat once C is negligible while the prior piles up there, so the
        // posterior of w has a long slab next to a narrow bump, and the two
        // regions favour different (t, lambda). The jump moves t and the
        // reference lambda so the mean at two reference counts is unchanged;
        // for a fixed pair (C, C') the map is an involution.
        if (model.likelihood_enabled) {
            Eigen::VectorXd y = x;
            double u = std::clamp(rng.uniform(), 1e-12, 1 - 1e-12);
            y(s) = logit(u);
            Coordinates from = from_unconstrained(x, s, model.alpha_c, shear);
            Coordinates to = from_unconstrained(y, s, model.alpha_c, shear);
            double t_new = 0;
            double lam_new = 0;
            double log_jac = regime_jump(from.t, from.lambda[shear.detector], (1 - from.c) / (1 - to.c), shear.low,
                                         shear.high, t_new, lam_new);
            if (std::isfinite(log_jac)) {
                y(shear.detector) = 2 * std::atanh(lam_new);
                y(s + 1) = std::log(t_new) + shear.offset(lam_new);
                double proposed = joint_target(y, trial_means);
                double w_old = sigmoid(x(s));
                double log_alpha = proposed - current - (std::log(u) + std::log1p(-u)) +
                                   (std::log(w_old) + std::log1p(-w_old)) + log_jac;
                if (std::isfinite(log_alpha) && std::log(rng.uniform()) < log_alpha) {
                    x = y;
                    current = proposed;
                    current_means.swap(trial_means);
                }
            }
        }

        if (model.likelihood_enabled) {
            for (int g = 0; g < ng; g++) {
                double old_ll = group_loglik(g, nu[g], current_means);
                double log_nu = std::log(nu[g]);
                double log_trial = log_nu + nu_step[g] * rng.normal();
                double trial = std::exp(log_trial);
                double new_ll = group_loglik(g, trial, current_means);
                // Gamma(shape, 1) prior with the log-nu Jacobian.
                double la = new_ll + model.nu_shape[g] * log_trial - trial -
                            (old_ll + model.nu_shape[g] * log_nu - nu[g]);
                double ap = std::isfinite(la) ? std::min(1.0, std::exp(la)) : 0.0;
                if (rng.uniform() < ap) {
                    nu[g] = trial;
                    if (!warm) {
                        accepted_nu++;
                    }
                }
                if (warm) {
                    nu_step[g] *= std::exp(gain * (ap - 0.3));
                }
            }
            // The joint target depends on nu through the cached likelihood.
            current = joint_target(x, current_means);
        } else {
            for (int g = 0; g < ng; g++) {
                nu[g] = rng.gamma(model.nu_shape[g]);
            }
        }

        if (!warm) {
            int row = it - options.warmup;
            Coordinates c = from_unconstrained(x, s, model.alpha_c, shear);
            for (int d = 0; d < s; d++) {
                out.draws(row, d) = c.lambda[d];
            }
            out.draws(row, s) = 2 * c.a;
            out.draws(row, s + 1) = 2 * c.b - 1;
            for (size_t i = 0; i < nc; i++) {
                const auto &cell = model.cells[i];
                double m = current_means[i];
                double v = nu[model.nu_group[i]];
                double q = rng.beta(static_cast<double>(cell.successes) + m * v,
                                    static_cast<double>(cell.n - cell.successes) + (1 - m) * v);
                out.cell_sum[i] += 2 * q - 1;
                if (options.keep_cell_draws) {
                    out.cell_draws(row, static_cast<Eigen::Index>(i)) = 2 * q - 1;
                }
            }
            for (int g = 0; g < ng; g++) {
                out.nu_sum[g] += nu[g];
            }
        }
    }
    if (options.samples > 0) {
        out.acceptance_joint = static_cast<double>(accepted_joint) / options.samples;
        out.acceptance_nu = ng > 0 && model.likelihood_enabled
                                ? static_cast<double>(accepted_nu) / (static_cast<double>(options.samples) * ng)
                                : 0.0;
    }
    return out;
}

PosteriorSamples assemble(const BayesModel &model, const SamplerOptions &options, std::vector<ChainOutput> &chains) {
    const int s = model.num_detectors;
    const int dim = s + 2;
    PosteriorSamples out;
    out.q = model.q;
    out.num_detectors = s;
    for (int d = 0; d < s; d++) {
        out.names.push_back("lambda_D" + std::to_string(d));
    }
    out.names.push_back("A");
    out.names.push_back("B");
    out.chains = options.chains;
    out.warmup = options.warmup;
    out.samples = options.samples;
    out.draws.resize(static_cast<Eigen::Index>(options.chains) * options.samples, dim);
    if (options.keep_cell_draws) {
        out.cell_q_bar_draws.resize(out.draws.rows(), static_cast<Eigen::Index>(model.cells.size()));
    }
    out.cell_q_bar_mean.assign(model.cells.size(), 0);
    out.nu_mean.assign(model.num_groups(), 0);
    const double denom = static_cast<double>(options.chains) * std::max(options.samples, 1);
    for (int c = 0; c < options.chains; c++) {
        out.draws.middleRows(static_cast<Eigen::Index>(c) * options.samples, options.samples) = chains[c].draws;
        if (options.keep_cell_draws) {
            out.cell_q_bar_draws.middleRows(static_cast<Eigen::Index>(c) * options.samples, options.samples) =
                chains[c].cell_draws;
        }
        for (size_t i = 0; i < model.cells.size(); i++) {
            out.cell_q_bar_mean[i] += chains[c].cell_sum[i] / denom;
        }
        for (int g = 0; g < model.num_groups(); g++) {
            out.nu_mean[g] += chains[c].nu_sum[g] / denom;
        }
        out.acceptance_joint.push_back(chains[c].acceptance_joint);
        out.acceptance_nu.push_back(chains[c].acceptance_nu);
    }
    for (int j = 0; j < dim; j++) {
        std::vector<std::vector<double>> per_chain(options.chains);
        for (int c = 0; c < options.chains; c++) {
            per_chain[c].assign(chains[c].draws.col(j).data(), chains[c].draws.col(j).data() + options.samples);
        }
        out.summary.push_back(summarize(out.names[j], per_chain));
        if (!(out.summary.back().rhat <= options.rhat_threshold)) {
            out.converged = false;
            out.warning += (out.warning.empty() ? "R-hat above " + std::to_string(options.rhat_threshold) + " for " : ", ") +
                           model.q.str() + ":" + out.names[j];
        }
    }
    return out;
}

void check_options(const SamplerOptions &options) {
    if (options.chains < 2) {
        throw std::invalid_argument("sample_posterior: at least 2 chains are required");
    }
    if (options.samples < 4 || options.warmup < 0) {
        throw std::invalid_argument("sample_posterior: need samples >= 4 and warmup >= 0");
    }
}

}  // namespace

double BayesModel::cell_mean(const std::vector<double> &lambda, double a, double b, size_t cell) const {
    double prod = 1;
    const auto &counts = cells[cell].counts;
    for (int d = 0; d < num_detectors; d++) {
        if (counts[d]) {
            prod *= std::pow(lambda[d], counts[d]);
        }
    }
    double m = a * prod + b;
    return m > 0 && m < 1 ? m : std::numeric_limits<double>::quiet_NaN();
}

double BayesModel::log_density(const std::vector<double> &lambda,
                               double a,
                               double b,
                               const std::vector<double> &nu) const {
    double c = 1 - a - b;
    if (!(a > 0 && b > 0 && c > 0) || static_cast<int>(lambda.size()) != num_detectors ||
        static_cast<int>(nu.size()) != num_groups()) {
        return kNegInf;
    }
    double lp = (alpha_a - 1) * std::log(a) + (alpha_b - 1) * std::log(b) + (alpha_c - 1) * std::log(c);
    for (int d = 0; d < num_detectors; d++) {
        double u = (lambda[d] + 1) / 2;
        if (!(u > 0 && u < 1)) {
            return kNegInf;
        }
        const auto &p = lambda_priors[d];
        lp += (p.mu * p.nu - 1) * std::log(u) + ((1 - p.mu) * p.nu - 1) * std::log1p(-u);
    }
    for (int g = 0; g < num_groups(); g++) {
        if (!(nu[g] > 0)) {
            return kNegInf;
        }
        lp += (nu_shape[g] - 1) * std::log(nu[g]) - nu[g];
    }
    if (!likelihood_enabled) {
        return lp;
    }
    for (size_t i = 0; i < cells.size(); i++) {
        double m = cell_mean(lambda, a, b, i);
        if (!(m > 0 && m < 1)) {
            return kNegInf;
        }
        lp += beta_binomial_kernel(cells[i].successes, cells[i].n, m, nu[nu_group[i]]);
    }
    return lp;
}

BayesModel build_model(const PauliOperator &q,
                       const std::vector<AggregatedCell> &cells,
                       int num_detectors,
                       const BayesModelSpec &spec) {
    check_spec(spec);
    if (cells.empty()) {
        throw EmptyInputError("build_model: no cells for " + q.str());
    }
    BayesModel model;
    model.q = q;
    model.num_detectors = num_detectors;
    model.lambda_priors = priors_for(q, num_detectors, spec);
    model.alpha_a = spec.alpha_a;
    model.alpha_b = spec.alpha_b;
    model.alpha_c = spec.alpha_c;
    int pooled = -1;
    double pooled_n = 0;
    int pooled_members = 0;
    for (const auto &cell : cells) {
        if (cell.n == 0) {
            throw EmptyInputError("build_model: cell " + std::to_string(cell.cell_id) + " of " + q.str() +
                                  " has no shots");
        }
        if (static_cast<int>(cell.counts.size()) != num_detectors) {
            throw std::invalid_argument("build_model: count vector width does not match the detector count");
        }
        BayesCell bc;
        bc.counts = cell.counts;
        bc.n = cell.n;
        double k = std::round(static_cast<double>(cell.n) * (1 + cell.q_bar) / 2);
        bc.successes = static_cast<uint64_t>(std::clamp(k, 0.0, static_cast<double>(cell.n)));
        model.cells.push_back(std::move(bc));
        if (cell.n < spec.pooled_nu_below) {
            if (pooled < 0) {
                pooled = model.num_groups();
                model.nu_shape.push_back(0);
            }
            model.nu_group.push_back(pooled);
            pooled_n += static_cast<double>(cell.n);
            pooled_members++;
        } else {
            model.nu_group.push_back(model.num_groups());
            model.nu_shape.push_back(static_cast<double>(cell.n));
        }
    }
    if (pooled >= 0) {
        model.nu_shape[pooled] = pooled_n / pooled_members;
    }

    model.initial.assign(num_detectors + 2, 0.0);
    for (int d = 0; d < num_detectors; d++) {
        model.initial[d] = 0.9;
    }
    model.initial[num_detectors] = 0.45;
    model.initial[num_detectors + 1] = 0.5;
    try {
        QFit fit = fit_wls_log(cells, num_detectors, {});
        fit = fit_nonlinear(cells, num_detectors, fit, {});
        for (int d = 0; d < num_detectors; d++) {
            model.initial[d] = std::clamp(fit.lambda[d], -0.99, 0.995);
        }
        double a = std::clamp(fit.a / 2, 0.01, 0.49);
        double b = std::clamp((fit.b + 1) / 2, 0.01, 0.98 - a);
        model.initial[num_detectors] = a;
        model.initial[num_detectors + 1] = b;
    } catch (const std::exception &) {
        // Under-identified data keep the generic start.
    }
    return model;
}

std::vector<BayesModel> build_models(const ShotTable &table, const BayesModelSpec &spec) {
    check_spec(spec);
    for (const auto &[name, priors] : spec.priors) {
        bool found = false;
        for (const auto &q : table.observables) {
            found = found || q.str() == name;
        }
        if (!found) {
            throw std::invalid_argument("prior/parameter mismatch: no observable " + name + " in the data");
        }
    }
    std::vector<BayesModel> models;
    for (size_t j = 0; j < table.observables.size(); j++) {
        models.push_back(build_model(table.observables[j], aggregate(table, j), table.num_detectors, spec));
    }
    return models;
}

BayesModel prior_only_model(const PauliOperator &q, int num_detectors, const BayesModelSpec &spec) {
    check_spec(spec);
    BayesModel model;
    model.q = q;
    model.num_detectors = num_detectors;
    model.lambda_priors = priors_for(q, num_detectors, spec);
    model.alpha_a = spec.alpha_a;
    model.alpha_b = spec.alpha_b;
    model.alpha_c = spec.alpha_c;
    model.likelihood_enabled = false;
    model.initial.assign(num_detectors + 2, 0.0);
    model.initial[num_detectors] = 1.0 / 3;
    model.initial[num_detectors + 1] = 1.0 / 3;
    return model;
}

size_t PosteriorSamples::index_of(const std::string &name) const {
    for (size_t i = 0; i < names.size(); i++) {
        if (names[i] == name) {
            return i;
        }
    }
    throw std::out_of_range("no posterior parameter " + name);
}

const ParameterSummary &PosteriorSamples::at(const std::string &name) const { return summary[index_of(name)]; }

PosteriorSamples sample_posterior(const BayesModel &model, const SamplerOptions &options) {
    return sample_posteriors({model}, options).front();
}

std::vector<PosteriorSamples> sample_posteriors(const std::vector<BayesModel> &models, const SamplerOptions &options) {
    check_options(options);
    const int nm = static_cast<int>(models.size());
    const int tasks = nm * options.chains;
    std::vector<ChainOutput> outputs(tasks);
    std::vector<std::string> errors(tasks);
    LSD_OMP_PARALLEL_FOR_DYNAMIC
    for (int t = 0; t < tasks; t++) {
        try {
            outputs[t] = run_chain(models[t / options.chains], options, t % options.chains);
        } catch (const std::exception &e) {
            errors[t] = e.what();
        }
    }
    for (const auto &e : errors) {
        if (!e.empty()) {
            throw std::runtime_error(e);
        }
    }
    std::vector<PosteriorSamples> out;
    for (int m = 0; m < nm; m++) {
        std::vector<ChainOutput> chains(std::make_move_iterator(outputs.begin() + m * options.chains),
                                        std::make_move_iterator(outputs.begin() + (m + 1) * options.chains));
        out.push_back(assemble(models[m], options, chains));
    }
    return out;
}

double split_rhat(const std::vector<std::vector<double>> &chains) {
    std::vector<std::vector<double>> halves;
    for (const auto &c : chains) {
        size_t h = c.size() / 2;
        if (h < 2) {
            throw std::invalid_argument("split_rhat: chains need at least 4 draws");
        }
        halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(h));
        halves.emplace_back(c.end() - static_cast<std::ptrdiff_t>(h), c.end());
    }
    const double n = static_cast<double>(halves.front().size());
    const double m = static_cast<double>(halves.size());
    std::vector<double> means;
    double w = 0;
    for (const auto &h : halves) {
        double mu = std::accumulate(h.begin(), h.end(), 0.0) / n;
        double v = 0;
        for (double x : h) {
            v += (x - mu) * (x - mu);
        }
        w += v / (n - 1);
        means.push_back(mu);
    }
    w /= m;
    double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
    double b = 0;
    for (double mu : means) {
        b += (mu - grand) * (mu - grand);
    }
    b *= n / (m - 1);
    if (w <= 0) {
        return b <= 0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    double var_plus = (n - 1) / n * w + b / n;
    return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<std::vector<double>> &chains) {
    const size_t m = chains.size();
    const size_t n = chains.front().size();
    std::vector<double> means(m);
    double w = 0;
    for (size_t c = 0; c < m; c++) {
        means[c] = std::accumulate(chains[c].begin(), chains[c].end(), 0.0) / static_cast<double>(n);
        double v = 0;
        for (double x : chains[c]) {
            v += (x - means[c]) * (x - means[c]);
        }
        w += v / static_cast<double>(n - 1);
    }
    w /= static_cast<double>(m);
    double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
    double b = 0;
    for (double mu : means) {
        b += (mu - grand) * (mu - grand);
    }
    b = m > 1 ? b * static_cast<double>(n) / static_cast<double>(m - 1) : 0.0;
    double var_plus = (static_cast<double>(n) - 1) / static_cast<double>(n) * w + b / static_cast<double>(n);
    if (var_plus <= 0) {
        return static_cast<double>(m * n);
    }
    auto rho = [&](size_t lag) {
        double acov = 0;
        for (size_t c = 0; c < m; c++) {
            double s = 0;
            for (size_t t = 0; t + lag < n; t++) {
                s += (chains[c][t] - means[c]) * (chains[c][t + lag] - means[c]);
            }
            acov += s / static_cast<double>(n);
        }
        acov /= static_cast<double>(m);
        return 1 - (w - acov) / var_plus;
    };
    double tau = -1;
    double prev = std::numeric_limits<double>::infinity();
    for (size_t k = 0; 2 * k + 1 < n; k++) {
        double pair = rho(2 * k) + rho(2 * k + 1);
        if (pair < 0) {
            break;
        }
        pair = std::min(pair, prev);
        prev = pair;
        tau += 2 * pair;
    }
    tau = std::max(tau, 1.0 / std::log10(static_cast<double>(m * n)));
    return static_cast<double>(m * n) / tau;
}

std::pair<double, double> hdi(std::vector<double> draws, double mass) {
    if (draws.empty()) {
        throw std::invalid_argument("hdi: no draws");
    }
    std::sort(draws.begin(), draws.end());
    const size_t n = draws.size();
    size_t width = std::max<size_t>(1, static_cast<size_t>(std::ceil(mass * static_cast<double>(n))));
    width = std::min(width, n);
    size_t best = 0;
    double best_width = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + width - 1 < n; i++) {
        double w = draws[i + width - 1] - draws[i];
        if (w < best_width) {
            best_width = w;
            best = i;
        }
    }
    return {draws[best], draws[best + width - 1]};
}

ParameterSummary summarize(const std::string &name, const std::vector<std::vector<double>> &chains) {
    ParameterSummary s;
    s.name = name;
    std::vector<double> all;
    for (const auto &c : chains) {
        all.insert(all.end(), c.begin(), c.end());
    }
    const double n = static_cast<double>(all.size());
    s.mean = std::accumulate(all.begin(), all.end(), 0.0) / n;
    double v = 0;
    for (double x : all) {
        v += (x - s.mean) * (x - s.mean);
    }
    s.sd = all.size() > 1 ? std::sqrt(v / (n - 1)) : 0.0;
    std::vector<double> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2;
    auto [lo, hi] = hdi(sorted, 0.94);
    s.hdi_low = lo;
    s.hdi_high = hi;
    if (chains.size() >= 2 && chains.front().size() >= 4) {
        s.rhat = split_rhat(chains);
        s.ess = effective_sample_size(chains);
    } else {
        s.ess = n;
    }
    s.mcse = s.ess > 0 ? s.sd / std::sqrt(s.ess) : 0.0;
    return s;
}

std::vector<ScaledBetaPrior> informative_prior_from_posterior(const PosteriorSamples &samples,
                                                              std::vector<std::string> *warnings) {
    if (!samples.converged && warnings) {
        warnings->push_back("informative prior from unconverged samples of " + samples.q.str());
    }
    std::vector<ScaledBetaPrior> out;
    for (int d = 0; d < samples.num_detectors; d++) {
        const auto col = samples.draws.col(d);
        const double n = static_cast<double>(col.size());
        double mean = 0;
        for (Eigen::Index i = 0; i < col.size(); i++) {
            mean += (col(i) + 1) / 2;
        }
        mean /= n;
        double var = 0;
        for (Eigen::Index i = 0; i < col.size(); i++) {
            double u = (col(i) + 1) / 2;
            var += (u - mean) * (u - mean);
        }
        var /= n - 1;
        ScaledBetaPrior p;
        if (var > 0 && var < mean * (1 - mean)) {
            p.mu = mean;
            p.nu = std::max(mean * (1 - mean) / var - 1, 2.0);
        } else if (warnings) {
            warnings->push_back("moment matching failed for " + samples.q.str() + " D" + std::to_string(d) +
                                "; using the uniform prior");
        }
        out.push_back(p);
    }
    return out;
}

EigenvaluePriors informative_priors(const std::vector<PosteriorSamples> &samples, std::vector<std::string> *warnings) {
    EigenvaluePriors out;
    for (const auto &s : samples) {
        out[s.q.str()] = informative_prior_from_posterior(s, warnings);
    }
    return out;
}

std::vector<CosetPosterior> posterior_coset_distributions(const std::vector<PosteriorSamples> &samples,
                                                          const std::map<uint64_t, RateEstimate> &rates,
                                                          const StabilizerCode &code,
                                                          bool project_to_simplex) {
    const auto normalizer = code.normalizer_elements();
    const size_t ncos = normalizer.size();
    std::vector<const PosteriorSamples *> by_index(ncos, nullptr);
    for (const auto &s : samples) {
        for (size_t j = 1; j < ncos; j++) {
            if (normalizer[j] == s.q) {
                by_index[j] = &s;
            }
        }
    }
    std::string missing;
    for (size_t j = 1; j < ncos; j++) {
        if (!by_index[j]) {
            missing += (missing.empty() ? "" : ", ") + normalizer[j].str();
        }
    }
    if (!missing.empty()) {
        throw IncompleteInputError("posterior_coset_distributions: missing samples for " + missing);
    }
    const int s = by_index[1]->num_detectors;
    Eigen::Index ndraws = by_index[1]->draws.rows();
    for (size_t j = 1; j < ncos; j++) {
        if (by_index[j]->num_detectors != s) {
            throw std::invalid_argument("posterior_coset_distributions: detector counts differ between observables");
        }
        ndraws = std::min(ndraws, by_index[j]->draws.rows());
    }
    const size_t nlog = static_cast<size_t>(code.num_logicals());
    std::vector<CosetPosterior> out;
    for (int d = 0; d < s; d++) {
        CosetPosterior cp;
        cp.detector = static_cast<uint64_t>(d);
        auto rit = rates.find(cp.detector);
        cp.p_detector = rit == rates.end() ? std::numeric_limits<double>::quiet_NaN() : rit->second.p;
        cp.coset_draws.resize(ndraws, static_cast<Eigen::Index>(ncos));
        cp.post_selected_draws.resize(ndraws, static_cast<Eigen::Index>(nlog));
        cp.ideal_decoder_draws.resize(ndraws, static_cast<Eigen::Index>(nlog));
        cp.bounds_defined = true;
        std::vector<double> lams(ncos, 1.0);
        for (Eigen::Index i = 0; i < ndraws; i++) {
            for (size_t j = 1; j < ncos; j++) {
                lams[j] = by_index[j]->draws(i, d);
            }
            auto coset = coset_probabilities_from_eigenvalues(lams, code);
            if (project_to_simplex) {
                coset = project_simplex(coset);
            }
            LogicalSplit split;
            split.k = code.k();
            for (size_t c = 0; c < ncos; c++) {
                cp.coset_draws(i, static_cast<Eigen::Index>(c)) = coset[c];
                split.parts[c & (code.num_syndromes() - 1)][c >> code.num_stabilizers()] += coset[c];
            }
            if (!cp.bounds_defined) {
                continue;
            }
            try {
                auto bounds = bound_channels(split);
                for (size_t l = 0; l < nlog; l++) {
                    cp.post_selected_draws(i, static_cast<Eigen::Index>(l)) = bounds.post_selected[l];
                    cp.ideal_decoder_draws(i, static_cast<Eigen::Index>(l)) = bounds.ideal_decoder[l];
                }
            } catch (const UndefinedChannelError &) {
                cp.bounds_defined = false;
            }
        }
        auto summarize_columns = [&](const Eigen::MatrixXd &m, const std::string &prefix) {
            std::vector<ParameterSummary> sums;
            const int chains = by_index[1]->chains;
            const Eigen::Index per = chains > 0 ? ndraws / chains : ndraws;
            for (Eigen::Index c = 0; c < m.cols(); c++) {
                std::vector<std::vector<double>> per_chain;
                for (int ch = 0; ch < std::max(chains, 1); ch++) {
                    per_chain.emplace_back(m.col(c).data() + ch * per, m.col(c).data() + (ch + 1) * per);
                }
                sums.push_back(summarize(prefix + std::to_string(c), per_chain));
            }
            return sums;
        };
        cp.coset_summary = summarize_columns(cp.coset_draws, "coset_");
        if (cp.bounds_defined) {
            cp.post_selected_summary = summarize_columns(cp.post_selected_draws, "post_selected_");
            cp.ideal_decoder_summary = summarize_columns(cp.ideal_decoder_draws, "ideal_decoder_");
        } else {
            cp.post_selected_draws.resize(0, 0);
            cp.ideal_decoder_draws.resize(0, 0);
        }
        out.push_back(std::move(cp));
    }
    return out;
}

}  // namespace lsd
