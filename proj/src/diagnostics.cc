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


#include "lsd/diagnostics.h"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <map>

namespace lsd {

namespace {

int select_length(const std::vector<ShotRecord> &shots, int r) {
    if (shots.empty()) {
        throw DiagnosticsError("no shots");
    }
    if (r >= 0) {
        return r;
    }
    int best = 0;
    for (const auto &s : shots) {
        best = std::max(best, s.r);
    }
    return best;
}

std::vector<const ShotRecord *> shots_at(const std::vector<ShotRecord> &shots, int r) {
    std::vector<const ShotRecord *> out;
    for (const auto &s : shots) {
        if (s.r == r) {
            if (static_cast<int>(s.detectors.size()) != r) {
                throw DiagnosticsError("shot " + std::to_string(s.shot_index) + " has " +
                                       std::to_string(s.detectors.size()) + " detectors for r=" + std::to_string(r));
            }
            out.push_back(&s);
        }
    }
    if (out.empty()) {
        throw DiagnosticsError("no shots with r=" + std::to_string(r));
    }
    return out;
}

double two_sided_tail(double sigma) {
    boost::math::normal n;
    return 2 * boost::math::cdf(boost::math::complement(n, sigma));
}

std::string state_name(const std::vector<std::string> &labels, int setting) {
    if (setting >= 0 && setting < static_cast<int>(labels.size())) {
        return labels[setting];
    }
    return "setting" + std::to_string(setting);
}

TrendFit fit_trend(std::string state, const std::vector<RatePoint> &series, double threshold) {
    TrendFit t;
    t.state = std::move(state);
    t.series = series;
    double n = static_cast<double>(series.size());
    double jbar = (n - 1) / 2;
    double sxx = 0;
    for (const auto &p : series) {
        sxx += (p.position - jbar) * (p.position - jbar);
    }
    double slope = 0;
    double var = 0;
    for (const auto &p : series) {
        double w = (p.position - jbar) / sxx;
        slope += w * p.rate;
        var += w * w * p.stderr_ * p.stderr_;
    }
    t.slope = slope;
    t.slope_stderr = std::sqrt(var);
    if (t.slope_stderr > 0) {
        t.z = slope / t.slope_stderr;
        t.violation = std::abs(*t.z) > threshold;
    }
    return t;
}

std::vector<RatePoint> rate_series(const std::vector<uint64_t> &clicks, uint64_t shots) {
    std::vector<RatePoint> out;
    for (size_t j = 0; j < clicks.size(); j++) {
        RatePoint p;
        p.position = static_cast<int>(j);
        p.trials = shots;
        p.clicks = clicks[j];
        p.rate = static_cast<double>(clicks[j]) / static_cast<double>(shots);
        p.stderr_ = std::sqrt(p.rate * (1 - p.rate) / static_cast<double>(shots));
        out.push_back(p);
    }
    return out;
}

}  // namespace

std::vector<TrendFit> click_rate_trend(const std::vector<ShotRecord> &shots,
                                       const std::vector<std::string> &state_labels,
                                       const DiagnosticsOptions &options) {
    int r = select_length(shots, options.r);
    if (r < 3) {
        throw DiagnosticsError("click_rate_trend needs r >= 3, got " + std::to_string(r));
    }
    auto sel = shots_at(shots, r);
    std::map<int, std::vector<uint64_t>> clicks;
    std::map<int, uint64_t> counts;
    std::vector<uint64_t> pooled(r, 0);
    for (const auto *s : sel) {
        auto &c = clicks[s->setting];
        c.resize(r, 0);
        counts[s->setting]++;
        for (int j = 0; j < r; j++) {
            if (s->detectors[j] != 0) {
                c[j]++;
                pooled[j]++;
            }
        }
    }
    std::vector<TrendFit> out;
    if (options.by_state && clicks.size() > 1) {
        for (const auto &[setting, c] : clicks) {
            out.push_back(fit_trend(state_name(state_labels, setting), rate_series(c, counts[setting]),
                                    options.threshold_sigma));
        }
    }
    out.push_back(fit_trend("pooled", rate_series(pooled, sel.size()), options.threshold_sigma));
    return out;
}

HomogeneityResult homogeneity_test(const std::vector<StateCounts> &states, double threshold_sigma) {
    if (states.size() < 2) {
        throw DiagnosticsError("homogeneity test needs at least two states");
    }
    HomogeneityResult h;
    h.states = states;
    double trials = 0;
    double clicks = 0;
    for (const auto &s : states) {
        if (s.trials == 0) {
            throw DiagnosticsError("state " + s.state + " has no shots");
        }
        if (s.clicks > s.trials) {
            throw DiagnosticsError("state " + s.state + " has more clicks than trials");
        }
        trials += static_cast<double>(s.trials);
        clicks += static_cast<double>(s.clicks);
    }
    h.dof = static_cast<int>(states.size()) - 1;
    double pbar = clicks / trials;
    if (pbar <= 0 || pbar >= 1) {
        return h;
    }
    for (const auto &s : states) {
        double n = static_cast<double>(s.trials);
        double e1 = n * pbar;
        double e0 = n - e1;
        double o1 = static_cast<double>(s.clicks);
        double o0 = n - o1;
        h.chi2 += (o1 - e1) * (o1 - e1) / e1 + (o0 - e0) * (o0 - e0) / e0;
    }
    boost::math::chi_squared dist(h.dof);
    h.p_value = boost::math::cdf(boost::math::complement(dist, h.chi2));
    h.violation = h.p_value < two_sided_tail(threshold_sigma);
    return h;
}

HomogeneityResult state_independence_test(const std::vector<ShotRecord> &shots,
                                          const std::vector<std::string> &state_labels,
                                          const DiagnosticsOptions &options) {
    int r = select_length(shots, options.r);
    auto sel = shots_at(shots, r);
    std::map<int, StateCounts> by;
    for (size_t i = 0; i < state_labels.size(); i++) {
        by[static_cast<int>(i)].state = state_labels[i];
    }
    for (const auto *s : sel) {
        auto &c = by[s->setting];
        if (c.state.empty()) {
            c.state = state_name(state_labels, s->setting);
        }
        c.trials += static_cast<uint64_t>(r);
        for (int j = 0; j < r; j++) {
            c.clicks += s->detectors[j] != 0;
        }
    }
    std::vector<StateCounts> states;
    for (auto &[k, v] : by) {
        states.push_back(v);
    }
    return homogeneity_test(states, options.threshold_sigma);
}

Interval wilson_interval(uint64_t successes, uint64_t trials, double level) {
    if (trials == 0) {
        return {0, 1};
    }
    boost::math::normal n;
    double z = boost::math::quantile(boost::math::complement(n, (1 - level) / 2));
    double nn = static_cast<double>(trials);
    double p = static_cast<double>(successes) / nn;
    double denom = 1 + z * z / nn;
    double centre = (p + z * z / (2 * nn)) / denom;
    double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<LagCorrelation> pair_correlation(const std::vector<ShotRecord> &shots, const DiagnosticsOptions &options) {
    int r = select_length(shots, options.r);
    if (r < 4) {
        throw DiagnosticsError("pair_correlation needs r >= 4, got " + std::to_string(r));
    }
    auto sel = shots_at(shots, r);
    uint64_t total_clicks = 0;
    for (const auto *s : sel) {
        for (int j = 0; j < r; j++) {
            total_clicks += s->detectors[j] != 0;
        }
    }
    double trials = static_cast<double>(sel.size()) * r;
    double base = static_cast<double>(total_clicks) / trials;
    std::vector<LagCorrelation> out;
    for (int lag : options.lags) {
        if (lag < 1 || lag >= r) {
            throw DiagnosticsError("lag " + std::to_string(lag) + " out of range for r=" + std::to_string(r));
        }
        LagCorrelation c;
        c.lag = lag;
        c.base_rate = base;
        c.per_position.resize(r - lag);
        for (int i = 0; i + lag < r; i++) {
            c.per_position[i].first = i;
        }
        for (const auto *s : sel) {
            for (int i = 0; i + lag < r; i++) {
                if (s->detectors[i] != 0) {
                    auto &pt = c.per_position[i];
                    pt.given++;
                    pt.both += s->detectors[i + lag] != 0;
                }
            }
        }
        for (auto &pt : c.per_position) {
            c.given += pt.given;
            c.both += pt.both;
            if (pt.given > 0) {
                pt.conditional = static_cast<double>(pt.both) / static_cast<double>(pt.given);
            }
            pt.ci = wilson_interval(pt.both, pt.given, options.ci_level);
        }
        c.ci = wilson_interval(c.both, c.given, options.ci_level);
        if (c.given > 0) {
            double cond = static_cast<double>(c.both) / static_cast<double>(c.given);
            c.conditional = cond;
            // Targets are distinct positions, so they are a subset of the base-rate trials.
            double var = base * (1 - base) * (1 / static_cast<double>(c.given) - 1 / trials);
            if (var > 0) {
                c.z = (cond - base) / std::sqrt(var);
                c.violation = std::abs(*c.z) > options.threshold_sigma;
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

DiagnosticsReport diagnose(const std::vector<ShotRecord> &shots,
                           const std::vector<std::string> &state_labels,
                           const DiagnosticsOptions &options) {
    DiagnosticsReport rep;
    DiagnosticsOptions opt = options;
    opt.r = select_length(shots, options.r);
    rep.r = opt.r;
    rep.shots = shots_at(shots, opt.r).size();
    rep.threshold_sigma = opt.threshold_sigma;
    rep.ci_level = opt.ci_level;
    if (opt.r >= 3) {
        rep.trend = click_rate_trend(shots, state_labels, opt);
        for (const auto &t : rep.trend) {
            if (t.violation) {
                rep.violations.push_back("click-rate trend (" + t.state + "): z=" + std::to_string(*t.z));
            }
        }
    } else {
        rep.notes.push_back("click-rate trend skipped: r < 3");
    }
    std::map<int, int> settings;
    for (const auto &s : shots) {
        settings[s.setting]++;
    }
    if (settings.size() >= 2) {
        rep.homogeneity = state_independence_test(shots, state_labels, opt);
        if (rep.homogeneity->violation) {
            rep.violations.push_back("state dependence: p=" + std::to_string(rep.homogeneity->p_value));
        }
    } else {
        rep.notes.push_back("state independence skipped: fewer than two input states");
    }
    if (opt.r >= 4) {
        rep.correlations = pair_correlation(shots, opt);
        for (const auto &c : rep.correlations) {
            if (c.violation) {
                rep.violations.push_back("lag-" + std::to_string(c.lag) + " correlation: z=" + std::to_string(*c.z));
            }
            if (!c.conditional) {
                rep.notes.push_back("lag-" + std::to_string(c.lag) + " conditional absent: no clicks");
            }
        }
    } else {
        rep.notes.push_back("pair correlation skipped: r < 4");
    }
    return rep;
}

}  // namespace lsd
