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

#include <random>

#include "lsd/code.h"
#include "lsd/transform.h"

using namespace lsd;

namespace {

PauliOperator P(const char *s) { return PauliOperator::from_string(s); }

std::vector<PauliOperator> all_paulis(int n) {
    std::vector<PauliOperator> out;
    for (uint64_t i = 0; i < (uint64_t{1} << (2 * n)); i++) {
        out.push_back(PauliOperator::from_dense_index(n, i));
    }
    return out;
}

PauliDistribution random_distribution(int n, std::mt19937_64 &gen) {
    std::exponential_distribution<double> e(1.0);
    PauliDistribution d(n);
    double total = 0;
    std::vector<double> w;
    for (size_t i = 0; i < (size_t{1} << (2 * n)); i++) {
        w.push_back(e(gen));
        total += w.back();
    }
    for (size_t i = 0; i < w.size(); i++) {
        d.add(PauliOperator::from_dense_index(n, i), w[i] / total);
    }
    return d;
}

/// Sum over P.S of dist, computed by multiplying each representative with every stabilizer.
std::vector<double> brute_marginals(const PauliDistribution &dist, const StabilizerCode &code) {
    std::vector<double> out(code.num_cosets(), 0.0);
    for (int c = 0; c < code.num_cosets(); c++) {
        PauliOperator rep = code.coset_representative(c);
        for (uint64_t s = 0; s < (uint64_t{1} << code.num_stabilizers()); s++) {
            out[c] += dist.get(pauli_multiply(rep, code.stabilizer_from_bits(s)));
        }
    }
    return out;
}

}  // namespace

TEST(Pauli, SymplecticProductExamples) {
    EXPECT_EQ(symplectic_product(P("X"), P("Z")), 1);
    EXPECT_EQ(symplectic_product(P("XX"), P("ZZ")), 0);
    EXPECT_EQ(symplectic_product(P("IX"), P("ZZ")), 1);
    EXPECT_THROW(symplectic_product(P("X"), P("ZZ")), DimensionError);
}

TEST(Pauli, MultiplyExamples) {
    EXPECT_EQ(pauli_multiply(P("II"), P("IX")), P("IX"));
    EXPECT_EQ(pauli_multiply(P("IX"), P("ZZ")), P("ZY"));
    EXPECT_EQ(pauli_multiply(P("XX"), P("XX")), P("II"));
    EXPECT_THROW(pauli_multiply(P("X"), P("XX")), DimensionError);
}

TEST(Pauli, StringRoundTrip) {
    for (const auto &p : all_paulis(3)) {
        EXPECT_EQ(PauliOperator::from_string(p.str()), p);
        EXPECT_EQ(PauliOperator::from_dense_index(3, p.dense_index()), p);
    }
    EXPECT_TRUE(PauliOperator::identity(4).is_identity());
    EXPECT_THROW(PauliOperator::from_string("XQ"), std::invalid_argument);
}

TEST(Code211, SyndromeExamples) {
    auto code = code_2_1_1();
    EXPECT_EQ(code.syndrome_bits(P("IX")), 1u);
    EXPECT_EQ(code.syndrome_bits(P("II")), 0u);
    EXPECT_EQ(code.syndrome_bits(P("YX")), 0u);
    EXPECT_THROW(code.syndrome_bits(P("XXX")), DimensionError);
}

TEST(Code211, DecomposeExamples) {
    auto code = code_2_1_1();
    auto xx = code.decompose(P("XX"));
    EXPECT_TRUE(xx.pure_error.is_identity());
    EXPECT_EQ(xx.logical, P("XX"));
    auto ii = code.decompose(P("II"));
    EXPECT_TRUE(ii.pure_error.is_identity());
    EXPECT_TRUE(ii.logical.is_identity());
    auto yx = code.decompose(P("YX"));
    EXPECT_TRUE(yx.pure_error.is_identity());
    // YX = XX . ZI up to the stabilizer ZZ and phase.
    EXPECT_EQ(code.logical_bits(yx.logical), 3u);
}

TEST(Code211, NormalizerElements) {
    auto code = code_2_1_1();
    auto elems = code.normalizer_elements();
    std::set<PauliOperator> got(elems.begin(), elems.end());
    std::set<PauliOperator> want{P("II"), P("ZZ"), P("XX"), P("YY"), P("ZI"), P("IZ"), P("XY"), P("YX")};
    EXPECT_EQ(got, want);
    for (size_t j = 0; j < elems.size(); j++) {
        EXPECT_EQ(code.logical_bits(elems[j]), j >> 1);
    }
}

TEST(Code422, Examples) {
    auto code = code_4_2_2();
    EXPECT_EQ(code.normalizer_elements().size(), 64u);
    EXPECT_EQ(code.syndrome_of(P("IIIX")), Syndrome(0b10, 2));
    EXPECT_EQ(symplectic_product(code.logical_x()[0], code.logical_z()[0]), 1);
    EXPECT_EQ(symplectic_product(code.logical_x()[0], code.logical_z()[1]), 0);
}

TEST(Code, TrivialCodeWithoutStabilizers) {
    StabilizerCode code("trivial", 1, 1, {}, {P("X")}, {P("Z")}, {});
    auto elems = code.normalizer_elements();
    std::set<PauliOperator> got(elems.begin(), elems.end());
    EXPECT_EQ(got, (std::set<PauliOperator>{P("I"), P("X"), P("Y"), P("Z")}));
}

TEST(Code, RejectsAnticommutingStabilizers) {
    EXPECT_THROW(StabilizerCode("bad", 2, 0, {P("XI"), P("ZI")}, {}, {}, {P("ZI"), P("XI")}), std::invalid_argument);
}

class BuiltinCodeInvariants : public ::testing::TestWithParam<std::string> {};

TEST_P(BuiltinCodeInvariants, GeneratorsAndPairing) {
    auto code = builtin_code(GetParam());
    const auto &s = code.stabilizer_generators();
    for (size_t i = 0; i < s.size(); i++) {
        for (size_t j = 0; j < s.size(); j++) {
            EXPECT_EQ(symplectic_product(s[i], s[j]), 0);
        }
        EXPECT_EQ(code.syndrome_bits(code.pure_error_generators()[i]), uint64_t{1} << i);
    }
    for (int i = 0; i < code.k(); i++) {
        for (const auto &g : s) {
            EXPECT_EQ(symplectic_product(code.logical_x()[i], g), 0);
            EXPECT_EQ(symplectic_product(code.logical_z()[i], g), 0);
        }
        for (int j = 0; j < code.k(); j++) {
            EXPECT_EQ(symplectic_product(code.logical_x()[i], code.logical_z()[j]), i == j ? 1 : 0);
            EXPECT_EQ(symplectic_product(code.logical_x()[i], code.logical_x()[j]), 0);
        }
    }
}

TEST_P(BuiltinCodeInvariants, DecomposeLeavesAStabilizer) {
    auto code = builtin_code(GetParam());
    for (const auto &p : all_paulis(code.n())) {
        auto label = code.decompose(p);
        auto rest = pauli_multiply(p, pauli_multiply(label.pure_error, label.logical));
        EXPECT_TRUE(code.stabilizer_coefficients(rest).has_value()) << p.str();
        EXPECT_EQ(code.coset_index(p), label.index);
    }
}

TEST_P(BuiltinCodeInvariants, CosetInversionMatchesMarginalization) {
    auto code = builtin_code(GetParam());
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; trial++) {
        auto dist = random_distribution(code.n(), gen);
        dist.scale(0.7);
        auto lam = normalizer_eigenvalues(dist, code);
        auto cosets = coset_probabilities_from_eigenvalues(lam, code);
        auto want = brute_marginals(dist, code);
        double total = 0;
        for (size_t c = 0; c < cosets.size(); c++) {
            EXPECT_NEAR(cosets[c], want[c], 1e-12);
            total += cosets[c];
        }
        EXPECT_NEAR(total, lam[0], 1e-12);
    }
}

INSTANTIATE_TEST_SUITE_P(All, BuiltinCodeInvariants, ::testing::Values("2_1_1", "4_2_2"));

TEST(Transform, DyadicInputsInvertExactly) {
    auto code = code_2_1_1();
    PauliDistribution d(2, {{"II", 0.5}, {"IX", 0.25}, {"XY", 0.125}, {"ZZ", 0.125}});
    auto cosets = coset_probabilities_from_eigenvalues(normalizer_eigenvalues(d, code), code);
    auto want = brute_marginals(d, code);
    for (size_t c = 0; c < cosets.size(); c++) {
        EXPECT_EQ(cosets[c], want[c]);
    }
}

TEST(Transform, EigenvalueExamples) {
    PauliDistribution id(2, {{"II", 1.0}});
    EXPECT_DOUBLE_EQ(eigenvalue_of_distribution(id, P("ZI")), 1.0);
    PauliDistribution d(2, {{"II", 0.81}, {"XX", 0.01}, {"IX", 0.09}, {"XI", 0.09}});
    EXPECT_NEAR(eigenvalue_of_distribution(d, P("ZI")), 0.80, 1e-15);
    EXPECT_NEAR(eigenvalue_of_distribution(d, P("II")), 1.0, 1e-15);
}

TEST(Transform, CosetExamples) {
    auto code = code_2_1_1();
    std::vector<double> ones(8, 1.0);
    auto c = coset_probabilities_from_eigenvalues(ones, code);
    EXPECT_NEAR(c[0], 1.0, 1e-15);
    for (size_t i = 1; i < c.size(); i++) {
        EXPECT_NEAR(c[i], 0.0, 1e-15);
    }
    auto elems = code.normalizer_elements();
    std::vector<double> lam;
    for (const auto &q : elems) {
        lam.push_back(0.9 + 0.1 * (symplectic_product(P("IX"), q) ? -1.0 : 1.0));
    }
    c = coset_probabilities_from_eigenvalues(lam, code);
    EXPECT_NEAR(c[code.coset_index(P("IX"))], 0.1, 1e-15);
    EXPECT_NEAR(c[0], 0.9, 1e-15);
}

TEST(Transform, MissingEigenvalueIsIncompleteInput) {
    auto code = code_2_1_1();
    std::map<PauliOperator, double> lams{{P("II"), 1.0}, {P("ZZ"), 1.0}};
    EXPECT_THROW(coset_probabilities_from_eigenvalues(lams, code), IncompleteInputError);
}

TEST(Transform, WalshHadamardExamples) {
    auto lam = walsh_hadamard_full(to_dense(PauliDistribution(2, {{"II", 1.0}})), 2, TransformDirection::kToEigenvalues);
    for (double v : lam) {
        EXPECT_DOUBLE_EQ(v, 1.0);
    }
    PauliDistribution u(1, {{"I", 0.25}, {"X", 0.25}, {"Y", 0.25}, {"Z", 0.25}});
    lam = walsh_hadamard_full(to_dense(u), 1, TransformDirection::kToEigenvalues);
    EXPECT_DOUBLE_EQ(lam[P("I").dense_index()], 1.0);
    EXPECT_NEAR(lam[P("X").dense_index()], 0.0, 1e-16);
    EXPECT_NEAR(lam[P("Y").dense_index()], 0.0, 1e-16);
    EXPECT_NEAR(lam[P("Z").dense_index()], 0.0, 1e-16);
    EXPECT_THROW(walsh_hadamard_full(std::vector<double>(size_t{1} << 18, 0.0), 9, TransformDirection::kToEigenvalues),
                 DimensionError);
}

TEST(Transform, RoundTripAndSerialAgreement) {
    std::mt19937_64 gen(5);
    for (int n = 1; n <= 4; n++) {
        for (int trial = 0; trial < 10; trial++) {
            auto dense = to_dense(random_distribution(n, gen));
            auto lam = walsh_hadamard_full(dense, n, TransformDirection::kToEigenvalues);
            auto lam_serial = walsh_hadamard_full_serial(dense, n, TransformDirection::kToEigenvalues);
            auto back = walsh_hadamard_full(lam, n, TransformDirection::kToProbabilities);
            for (size_t i = 0; i < dense.size(); i++) {
                EXPECT_NEAR(back[i], dense[i], 1e-12);
                EXPECT_EQ(lam[i], lam_serial[i]);
            }
        }
    }
}
