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


#include <gtest/gtest.h>

#include <sstream>

#include "lsd/io.h"
#include "lsd/oracle.h"
#include "lsd/presets.h"

using namespace lsd;

namespace {

json minimal() {
    return json::parse(R"({
        "code": "2_1_1",
        "gadget": {"type": "phenomenological", "p": 0.1, "q": 0.05},
        "lengths": [1, 2],
        "shots_per_length": [10, 20],
        "seed": 3
    })");
}

/// Message of the ConfigError raised by parsing `doc`, or "" when it parses.
std::string config_error(const json &doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError &e) {
        return e.what();
    }
    return "";
}

bool mentions(const std::string &msg, const std::string &needle) { return msg.find(needle) != std::string::npos; }

}  // namespace

TEST(Config, ParsesMinimalDocument) {
    auto rc = parse_config(minimal());
    const auto &c = rc.experiment;
    EXPECT_EQ(c.gadget.kind, GadgetKind::kPhenomenological);
    EXPECT_DOUBLE_EQ(c.gadget.p, 0.1);
    EXPECT_EQ(c.lengths, (std::vector<int>{1, 2}));
    EXPECT_EQ(c.shots_per_length, (std::vector<uint64_t>{10, 20}));
    EXPECT_EQ(c.seed, 3u);
    EXPECT_FALSE(rc.coherent);
}

TEST(Config, ErrorsNameTheField) {
    auto doc = minimal();
    doc["gadget"]["p"] = 1.5;
    EXPECT_TRUE(mentions(config_error(doc), "gadget.p")) << config_error(doc);
    doc = minimal();
    doc["bogus"] = 1;
    EXPECT_TRUE(mentions(config_error(doc), "bogus")) << config_error(doc);
    doc = minimal();
    doc["shots_per_length"] = {10};
    EXPECT_TRUE(mentions(config_error(doc), "shots_per_length"));
    doc = minimal();
    doc["settings"] = {"X", "Q"};
    EXPECT_TRUE(mentions(config_error(doc), "settings[1]"));
    doc = minimal();
    doc["gadget"] = json{{"type", "mystery"}};
    EXPECT_TRUE(mentions(config_error(doc), "gadget.type"));
    doc = minimal();
    doc["spam"] = json{{"prep", {{"IQ", 0.1}}}};
    EXPECT_TRUE(mentions(config_error(doc), "spam.prep"));
    doc = minimal();
    doc["preset"] = "nope";
    EXPECT_TRUE(mentions(config_error(doc), "preset"));
    doc = minimal();
    doc["bayes"] = json{{"alpha_c", 0}};
    EXPECT_TRUE(mentions(config_error(doc), "bayes.alpha_c"));
    doc = minimal();
    doc["coherent_error"] = json{{"eta", 0.05}, {"transversal", {{"axis", "W"}, {"theta", 0.3}}}};
    EXPECT_TRUE(mentions(config_error(doc), "coherent_error.transversal.axis"));
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, DistributionForms) {
    auto a = parse_distribution(json::parse(R"({"II": 0.9, "XY": 0.1})"), 2, "d");
    auto b = parse_distribution(json::parse(R"([{"pauli": "II", "probability": 0.9}, {"pauli": "XY", "probability": 0.1}])"),
                                2, "d");
    EXPECT_EQ(a.entries(), b.entries());
    auto dep = parse_distribution(json::parse(R"({"depolarizing": 0.15, "n": 1})"), 1, "d");
    EXPECT_NEAR(dep.get(PauliOperator::from_string("Y")), 0.05, 1e-15);
    EXPECT_THROW(parse_distribution(json::parse(R"({"XXX": 0.1})"), 2, "d"), ConfigError);
    EXPECT_THROW(parse_distribution(json::parse(R"({"XX": -0.1})"), 2, "d"), ConfigError);
}

TEST(Config, CoherentBlock) {
    auto doc = minimal();
    doc["coherent_error"] = json{{"eta", 0.05}, {"transversal", {{"axis", "X"}, {"theta", 0.3}}}, {"shots", 500}};
    auto rc = parse_config(doc);
    ASSERT_TRUE(rc.coherent);
    EXPECT_EQ(rc.coherent->error.rotations.size(), 2u);
    EXPECT_EQ(rc.coherent->shots, 500u);
    EXPECT_EQ(rc.coherent->inputs, (std::vector<char>{'X', 'Y', 'Z'}));
}

TEST(Config, CanonicalDocumentRoundTrips) {
    for (const auto &name : preset_names()) {
        auto c = preset_config(name);
        auto doc = config_to_json(c);
        auto back = parse_config(doc).experiment;
        EXPECT_EQ(config_to_json(back).dump(), doc.dump()) << name;
        EXPECT_EQ(config_hash(back), config_hash(c)) << name;
    }
}

TEST(Config, HashTracksContent) {
    auto c = preset_config("phenomenological_211");
    auto h = config_hash(c);
    EXPECT_EQ(h.size(), 16u);
    EXPECT_EQ(config_hash(c), h);
    c.seed++;
    EXPECT_NE(config_hash(c), h);
    EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
    EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
    auto m = make_manifest(c).to_json();
    EXPECT_EQ(m["config_hash"], config_hash(c));
    EXPECT_EQ(m["seed"], c.seed);
}

TEST(Io, Number12) {
    EXPECT_EQ(number12(0.1).dump(), "0.1");
    EXPECT_EQ(number12(1.0 / 3).dump(), "0.333333333333");
    EXPECT_EQ(number12(2.0).dump(), "2");
}

TEST(Shots, RoundTrip) {
    auto cfg = preset_config("lsd_211_tableI");
    cfg.lengths = {2, 3};
    cfg.shots_per_length = {5, 5};
    cfg.copies = 1;
    Experiment exp(cfg);
    auto shots = run_experiment(exp);
    std::stringstream ss;
    write_shots(ss, shots, exp.code(), exp.settings(), "abc");
    auto file = parse_shots(ss);
    EXPECT_EQ(file.code_id, "2_1_1");
    EXPECT_EQ(file.manifest_hash, "abc");
    EXPECT_EQ(file.labels.size(), 3u);
    EXPECT_EQ(file.shots, shots);
}

TEST(Shots, SchemaErrorsCarryLineNumbers) {
    Experiment exp(preset_config("phenomenological_211"));
    ShotRecord rec;
    rec.r = 1;
    rec.syndromes = {0, 1};
    rec.detectors = {1};
    std::string good = shot_to_line(rec, exp.code(), exp.settings(), "h");
    auto line_of = [](const std::string &text) -> size_t {
        std::stringstream ss(text);
        try {
            parse_shots(ss);
        } catch (const SchemaError &e) {
            return e.line;
        }
        return 0;
    };
    auto bad = json::parse(good);
    bad["detectors"] = {"0"};
    EXPECT_EQ(line_of(good + "\n" + bad.dump() + "\n"), 2u);
    EXPECT_EQ(line_of(good + "\n" + good + "\n{oops\n"), 3u);
    bad = json::parse(good);
    bad.erase("final_o");
    EXPECT_EQ(line_of(bad.dump() + "\n"), 1u);
    bad = json::parse(good);
    bad["syndromes"] = {"0", "11"};
    bad["detectors"] = {"11"};
    EXPECT_EQ(line_of(bad.dump() + "\n"), 1u);
    bad = json::parse(good);
    bad["code"] = "4_2_2";
    EXPECT_EQ(line_of(good + "\n" + bad.dump() + "\n"), 2u);
    EXPECT_EQ(line_of(good + "\n\n" + good + "\n"), 0u);
}

TEST(Channels, TableParsesUnvalidated) {
    auto code = code_2_1_1();
    auto doc = json::parse(R"({"0": {"II": 0.6}, "1": {"IX": 0.5}})");
    auto set = parse_channel_table(doc, code, "gadget.channels");
    EXPECT_THROW(set.validate(), InvariantError);
    EXPECT_THROW(parse_channel_table(json::parse(R"({"01": {"II": 1}})"), code, "c"), ConfigError);
    auto round = parse_channel_table(channels_to_json(tuned_table1_gadget())["channels"], code, "c");
    EXPECT_NO_THROW(round.validate(1e-9));
}

TEST(Priors, RoundTrip) {
    EigenvaluePriors p{{"XX", {{0.9, 40}, {0.6, 3}}}, {"ZI", {{0.5, 2}, {0.7, 10}}}};
    auto back = parse_priors(priors_to_json(p));
    ASSERT_EQ(back.size(), 2u);
    EXPECT_DOUBLE_EQ(back.at("XX")[0].mu, 0.9);
    EXPECT_DOUBLE_EQ(back.at("ZI")[1].nu, 10);
}

TEST(Io, MatrixCsv) {
    Eigen::MatrixXd m(2, 2);
    m << 1, 2, 3, 4.5;
    std::stringstream ss;
    write_matrix_csv(ss, m);
    EXPECT_EQ(ss.str(), "1,2\n3,4.5\n");
}

TEST(Oracle, PhenomenologicalAndFourTwoTwoPass) {
    for (const char *name : {"phenomenological_211", "circuit_422"}) {
        auto report = run_oracle_suite(preset_config(name));
        EXPECT_TRUE(report.passed()) << name;
        for (const auto &c : report.checks) {
            if (!c.skipped) {
                EXPECT_LT(c.max_deviation, report.tolerance) << name << " " << c.name;
                EXPECT_GT(c.cases, 0u) << c.name;
            }
        }
    }
}

TEST(Oracle, ClosedFormMatchesPhenomenologicalInstrument) {
    auto d0 = phenomenological_d0_closed_form(0.1, 0.05);
    EXPECT_NEAR(d0.mass(), 0.7592, 1e-12);
}
