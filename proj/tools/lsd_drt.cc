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


#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "lsd/io.h"
#include "lsd/oracle.h"
#include "lsd/parallel.h"
#include "lsd/presets.h"

namespace {

using namespace lsd;

constexpr int kExitOk = 0;
constexpr int kExitCheck = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Shared {
    std::string config;
    std::string out;
    std::optional<uint64_t> seed;
    int threads = 0;
};

void add_shared(CLI::App *cmd, Shared &s, bool out_required) {
    cmd->add_option("--config", s.config, "Config document (JSON)");
    auto *o = cmd->add_option("--out", s.out, "Output path or prefix");
    if (out_required) {
        o->required();
    }
    cmd->add_option("--seed", s.seed, "Override the config seed");
    cmd->add_option("--threads", s.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

RunConfig load(const Shared &s, const std::string &preset) {
    RunConfig rc;
    if (!s.config.empty() && !preset.empty()) {
        throw UsageError("--config and --preset are mutually exclusive");
    }
    if (!s.config.empty()) {
        rc = load_config(s.config);
    } else if (!preset.empty()) {
        rc = parse_config(json{{"preset", preset}});
    }
    if (s.seed) {
        rc.experiment.seed = *s.seed;
    }
    set_thread_count(s.threads);
    return rc;
}

std::ofstream open_out(const std::string &path) {
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error(path + ": cannot write");
    }
    return f;
}

void write_json(const std::string &path, const json &doc) {
    auto f = open_out(path);
    f << doc.dump(2) << '\n';
}

ShotFile load_shots(const std::string &path) {
    if (path.empty()) {
        throw UsageError("--shots is required");
    }
    ShotFile f = read_shots(path);
    if (f.shots.empty()) {
        throw UsageError(path + ": shot file is empty");
    }
    return f;
}

int cmd_simulate(const Shared &s, const std::string &preset) {
    RunConfig rc = load(s, preset);
    if (s.config.empty() && preset.empty()) {
        throw UsageError("simulate needs --config or --preset");
    }
    const ExperimentConfig &cfg = rc.experiment;
    RunManifest manifest = make_manifest(cfg);
    if (!s.config.empty()) {
        manifest.inputs.push_back(s.config);
    }
    manifest.outputs.push_back(s.out);
    if (rc.coherent) {
        const auto &g = cfg.gadget;
        if (g.kind != GadgetKind::kCircuit) {
            throw ConfigError("coherent_error: needs a circuit gadget");
        }
        CliffordCircuitSpec circuit = g.circuit_name.empty() ? g.circuit : builtin_circuit(g.circuit_name);
        std::vector<StateCounts> counts;
        json rates = json::array();
        for (char in : rc.coherent->inputs) {
            ClickRate cr = simulate_gadget_clicks(circuit, rc.coherent->error, in, cfg.pfr.enabled, rc.coherent->shots,
                                                  derive_key(cfg.seed, kStreamStatevec, static_cast<uint64_t>(in)));
            counts.push_back({std::string(1, in), cr.shots, cr.clicks});
            rates.push_back(click_rate_to_json(cr));
            std::cerr << "input " << in << ": click rate " << cr.rate << " +- " << cr.stderr_ << "\n";
        }
        json doc{{"manifest", manifest.config_hash}, {"pfr", cfg.pfr.enabled}, {"click_rates", rates}};
        if (counts.size() >= 2) {
            HomogeneityResult h = homogeneity_test(counts, rc.diagnostics.threshold_sigma);
            doc["homogeneity"] = json{{"chi2", h.chi2}, {"dof", h.dof}, {"p_value", h.p_value}};
            std::cerr << "cross-state homogeneity p = " << h.p_value << "\n";
        }
        write_json(s.out, doc);
        write_json(s.out + ".manifest.json", manifest.to_json());
        return kExitOk;
    }
    Experiment exp(cfg);
    auto f = open_out(s.out);
    if (exp.total_shots() == 0) {
        std::cerr << "warning: config requests zero shots; wrote an empty shot file\n";
        write_json(s.out + ".manifest.json", manifest.to_json());
        return kExitOk;
    }
    auto shots = run_experiment(exp);
    write_shots(f, shots, exp.code(), exp.settings(), manifest.config_hash);
    write_json(s.out + ".manifest.json", manifest.to_json());
    uint64_t trivial = 0;
    uint64_t detectors = 0;
    for (const auto &rec : shots) {
        for (uint64_t d : rec.detectors) {
            trivial += d == 0;
            detectors++;
        }
    }
    std::cerr << "wrote " << shots.size() << " shots over " << exp.settings().size() << " settings to " << s.out
              << "; trivial detector fraction " << static_cast<double>(trivial) / static_cast<double>(detectors)
              << "\n";
    return kExitOk;
}

int cmd_estimate_freq(const Shared &s, const std::string &shots_path, std::optional<int> bootstrap, bool linear) {
    RunConfig rc = load(s, "");
    ShotFile sf = load_shots(shots_path);
    StabilizerCode code = builtin_code(sf.code_id);
    FreqOptions opt = rc.freq.options;
    if (linear) {
        opt.nonlinear = false;
    }
    FreqEstimate est = run_freq_pipeline(sf.shots, code, sf.settings, opt);
    json rep = freq_report(est, code);
    rep["manifest"] = sf.manifest_hash;
    rep["covariance_file"] = s.out + ".cov.csv";
    int reps = bootstrap.value_or(rc.freq.bootstrap);
    if (reps > 0) {
        BootstrapResult b = lsd::bootstrap(est.table, reps, rc.experiment.seed, opt);
        json se = json::array();
        for (Eigen::Index i = 0; i < b.mean.size(); i++) {
            se.push_back(json{{"mean", b.mean(i)}, {"stderr", b.stderr_at(static_cast<size_t>(i))},
                              {"ci_low", b.ci_low(i)}, {"ci_high", b.ci_high(i)}});
        }
        rep["bootstrap"] = json{{"replicas", reps}, {"lambda", se}};
    }
    write_json(s.out + ".json", rep);
    {
        auto f = open_out(s.out + ".decay.csv");
        write_decay_csv(f, est);
    }
    {
        auto f = open_out(s.out + ".cov.csv");
        write_matrix_csv(f, est.fit.lambda_cov);
    }
    bool ok = true;
    for (const auto &q : est.fit.per_q) {
        if (!q.converged) {
            std::cerr << "warning: fit for " << q.q.str() << " did not converge: " << q.message << "\n";
            ok = false;
        }
    }
    std::cerr << "fitted " << est.fit.per_q.size() << " observables from " << sf.shots.size() << " shots\n";
    return ok ? kExitOk : kExitCheck;
}

struct BayesFlags {
    std::string priors;
    std::string write_priors;
    std::optional<int> chains;
    std::optional<int> warmup;
    std::optional<int> samples;
    bool draws = false;
};

int cmd_estimate_bayes(const Shared &s, const std::string &shots_path, const BayesFlags &flags) {
    RunConfig rc = load(s, "");
    ShotFile sf = load_shots(shots_path);
    StabilizerCode code = builtin_code(sf.code_id);
    BayesAnalysis b = rc.bayes;
    if (!flags.priors.empty()) {
        std::ifstream in(flags.priors);
        if (!in) {
            throw UsageError(flags.priors + ": cannot open");
        }
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error &e) {
            throw ConfigError(flags.priors + ": " + e.what());
        }
        b.model.priors = parse_priors(doc);
    }
    if (flags.chains) {
        b.sampler.chains = *flags.chains;
    }
    if (flags.warmup) {
        b.sampler.warmup = *flags.warmup;
    }
    if (flags.samples) {
        b.sampler.samples = *flags.samples;
    }
    b.sampler.seed = rc.experiment.seed;
    ShotTable table = build_shot_table(sf.shots, code, sf.settings);
    auto models = build_models(table, b.model);
    auto posts = sample_posteriors(models, b.sampler);
    auto rates = estimate_detector_rates(sf.shots, table.num_detectors);
    auto cosets = posterior_coset_distributions(posts, rates, code, b.project_to_simplex);
    json rep = posterior_report(posts, cosets, code);
    rep["manifest"] = sf.manifest_hash;
    write_json(s.out + ".json", rep);
    {
        auto f = open_out(s.out + ".violin.csv");
        write_violin_csv(f, cosets, code);
    }
    if (flags.draws) {
        for (const auto &p : posts) {
            auto f = open_out(s.out + ".draws_" + p.q.str() + ".csv");
            write_draws_csv(f, p);
        }
    }
    if (!flags.write_priors.empty()) {
        std::vector<std::string> warnings;
        write_json(flags.write_priors, priors_to_json(informative_priors(posts, &warnings)));
        for (const auto &w : warnings) {
            std::cerr << "warning: " << w << "\n";
        }
    }
    for (const auto &p : posts) {
        if (!p.converged) {
            std::cerr << "warning: " << p.q.str() << ": " << p.warning << "\n";
        }
    }
    std::cerr << "sampled " << posts.size() << " observables with " << b.sampler.chains << " chains\n";
    return kExitOk;
}

int cmd_diagnose(const Shared &s, const std::string &shots_path) {
    RunConfig rc = load(s, "");
    ShotFile sf = load_shots(shots_path);
    DiagnosticsReport rep = diagnose(sf.shots, sf.labels, rc.diagnostics);
    json doc = diagnostics_to_json(rep);
    doc["manifest"] = sf.manifest_hash;
    write_json(s.out + ".json", doc);
    {
        auto f = open_out(s.out + ".trend.csv");
        write_trend_csv(f, rep);
    }
    {
        auto f = open_out(s.out + ".lags.csv");
        write_lag_csv(f, rep);
    }
    for (const auto &n : rep.notes) {
        std::cerr << "note: " << n << "\n";
    }
    if (!rep.passed()) {
        std::cerr << "violations:\n";
        for (const auto &v : rep.violations) {
            std::cerr << "  " << v << "\n";
        }
        return kExitCheck;
    }
    std::cerr << "all diagnostics consistent with Pauli noise at " << rep.threshold_sigma << " sigma\n";
    return kExitOk;
}

int cmd_oracle(const Shared &s, const std::string &preset, int max_r) {
    if (s.config.empty() && preset.empty()) {
        throw UsageError("oracle needs --config or --preset");
    }
    RunConfig rc = load(s, preset);
    OracleOptions opt;
    opt.max_r = max_r;
    opt.seed = rc.experiment.seed;
    OracleReport rep = run_oracle_suite(rc.experiment, opt);
    json checks = json::array();
    for (const auto &c : rep.checks) {
        std::cout << (c.skipped ? "SKIP" : (c.max_deviation <= rep.tolerance ? "PASS" : "FAIL")) << "  " << c.name
                  << "  max_dev=" << c.max_deviation << "  cases=" << c.cases << "  (" << c.detail << ")\n";
        checks.push_back(json{{"name", c.name}, {"max_deviation", c.max_deviation}, {"cases", c.cases},
                              {"skipped", c.skipped}, {"detail", c.detail}});
    }
    if (!s.out.empty()) {
        write_json(s.out, json{{"tolerance", rep.tolerance}, {"passed", rep.passed()}, {"checks", checks}});
    }
    return rep.passed() ? kExitOk : kExitCheck;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Detector-conditioned logical channel estimation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", LSD_VERSION);

    Shared shared;
    std::string preset;
    std::string shots_path;
    std::optional<int> bootstrap;
    bool linear = false;
    BayesFlags bayes;
    std::string method;
    int max_r = -1;

    auto *sim = app.add_subcommand("simulate", "Generate a shot file");
    add_shared(sim, shared, true);
    sim->add_option("--preset", preset, "Named preset instead of --config");

    auto add_shots = [&](CLI::App *cmd) { cmd->add_option("--shots", shots_path, "Shot file")->required(); };
    auto add_freq = [&](CLI::App *cmd) {
        cmd->add_option("--bootstrap", bootstrap, "Bootstrap replicas")->check(CLI::NonNegativeNumber);
        cmd->add_flag("--linear", linear, "Log-linear WLS only");
    };
    auto add_bayes = [&](CLI::App *cmd) {
        cmd->add_option("--priors", bayes.priors, "Prior file");
        cmd->add_option("--write-priors", bayes.write_priors, "Write moment-matched priors from this posterior");
        cmd->add_option("--chains", bayes.chains)->check(CLI::PositiveNumber);
        cmd->add_option("--warmup", bayes.warmup)->check(CLI::NonNegativeNumber);
        cmd->add_option("--samples", bayes.samples)->check(CLI::PositiveNumber);
        cmd->add_flag("--draws", bayes.draws, "Dump every draw as CSV");
    };

    auto *ef = app.add_subcommand("estimate-freq", "Weighted least-squares estimation");
    add_shared(ef, shared, true);
    add_shots(ef);
    add_freq(ef);

    auto *eb = app.add_subcommand("estimate-bayes", "Hierarchical Bayesian estimation");
    add_shared(eb, shared, true);
    add_shots(eb);
    add_bayes(eb);

    auto *est = app.add_subcommand("estimate", "Estimate with --method freq or bayes");
    add_shared(est, shared, true);
    add_shots(est);
    est->add_option("--method", method, "freq or bayes")->required();
    add_freq(est);
    add_bayes(est);

    auto *dg = app.add_subcommand("diagnose", "Noise diagnostics");
    add_shared(dg, shared, true);
    add_shots(dg);

    auto *orc = app.add_subcommand("oracle", "Exactness checks");
    add_shared(orc, shared, false);
    orc->add_option("--preset", preset, "Named preset instead of --config");
    orc->add_option("--max-r", max_r, "Longest enumerated detector sequence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sim->parsed()) {
            return cmd_simulate(shared, preset);
        }
        if (ef->parsed()) {
            return cmd_estimate_freq(shared, shots_path, bootstrap, linear);
        }
        if (eb->parsed()) {
            return cmd_estimate_bayes(shared, shots_path, bayes);
        }
        if (est->parsed()) {
            if (method == "freq") {
                return cmd_estimate_freq(shared, shots_path, bootstrap, linear);
            }
            if (method == "bayes") {
                return cmd_estimate_bayes(shared, shots_path, bayes);
            }
            throw UsageError("unknown method '" + method + "' (expected freq or bayes)");
        }
        if (dg->parsed()) {
            return cmd_diagnose(shared, shots_path);
        }
        if (orc->parsed()) {
            return cmd_oracle(shared, preset, max_r);
        }
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SchemaError &e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DiagnosticsError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const EmptyInputError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NotImplementedError &e) {
        std::cerr << "not implemented: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvariantError &e) {
        std::cerr << "invariant failure: " << e.what() << "\n";
        return kExitCheck;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheck;
    }
    return kExitUsage;
}
