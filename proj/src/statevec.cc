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


#include "lsd/statevec.h"

#include <Eigen/Dense>
#include <cmath>

#include "lsd/transform.h"

namespace lsd {

namespace {

using cd = std::complex<double>;

cd i_power(int k) {
    switch (k & 3) {
        case 0:
            return {1, 0};
        case 1:
            return {0, 1};
        case 2:
            return {-1, 0};
        default:
            return {0, -1};
    }
}

// Places a Pauli over `qubits.size()` local qubits onto circuit qubits.
PauliOperator embed_pauli(const PauliOperator &local, const std::vector<int> &qubits, int n) {
    uint64_t x = 0;
    uint64_t z = 0;
    for (size_t i = 0; i < qubits.size(); i++) {
        x |= ((local.x >> i) & 1) << qubits[i];
        z |= ((local.z >> i) & 1) << qubits[i];
    }
    return PauliOperator(n, x, z);
}

PauliDistribution completed_pauli(const PauliDistribution &d, int n) {
    PauliDistribution out(n);
    if (d.n() == n) {
        out = d;
    } else if (!d.empty()) {
        throw DimensionError("coherent error Pauli part has the wrong qubit count");
    }
    double m = out.mass();
    if (m < 1) {
        out.add(PauliOperator::identity(n), 1 - m);
    }
    return out;
}

DenseState embed_input(const CliffordCircuitSpec &circuit, char input) {
    if (circuit.data_in.size() != 2) {
        throw DimensionError("coherent-error witness is defined for the [[2,1,1]] gadgets");
    }
    if (circuit.num_qubits > kMaxDenseQubits) {
        throw DimensionError("dense simulation supports at most 12 qubits");
    }
    DenseState logical = logical_input_state(input);
    DenseState st(circuit.num_qubits);
    auto &amp = st.amplitudes();
    amp[0] = 0;
    for (size_t idx = 0; idx < 4; idx++) {
        size_t full = ((idx & 1) << circuit.data_in[0]) | (((idx >> 1) & 1) << circuit.data_in[1]);
        amp[full] = logical.amplitudes()[idx];
    }
    return st;
}

void check_error(const CoherentErrorSpec &error, int data_n) {
    if (!(error.eta >= 0 && error.eta <= 1)) {
        throw std::invalid_argument("coherent error eta must lie in [0, 1]");
    }
    for (const auto &rot : error.rotations) {
        if (rot.axis.n != data_n) {
            throw DimensionError("rotation axis acts on " + std::to_string(rot.axis.n) + " qubits, gadget has " +
                                 std::to_string(data_n) + " data qubits");
        }
    }
}

void apply_error_branch(DenseState &st, const CliffordCircuitSpec &circuit, const CoherentErrorSpec &error,
                        bool coherent, const PauliOperator &pauli) {
    if (coherent) {
        for (const auto &rot : error.rotations) {
            st.apply_rotation(embed_pauli(rot.axis, circuit.data_in, circuit.num_qubits), rot.theta);
        }
    } else {
        st.apply_pauli(embed_pauli(pauli, circuit.data_in, circuit.num_qubits));
    }
}

struct MeasuredQubit {
    int qubit;
    int bit;
};

// Runs the unitary part with measurements deferred to the end.
std::vector<MeasuredQubit> run_deferred(DenseState &st, const CliffordCircuitSpec &circuit) {
    std::vector<MeasuredQubit> measured;
    std::vector<bool> touched(circuit.num_qubits, false);
    std::vector<bool> done(circuit.num_qubits, false);
    for (int q : circuit.data_in) {
        touched[q] = true;
    }
    auto use = [&](int q) {
        if (done[q]) {
            throw std::invalid_argument("deferred measurement: qubit reused after measurement");
        }
        touched[q] = true;
    };
    for (const auto &op : circuit.ops) {
        switch (op.type) {
            case OpType::kPrepZ:
            case OpType::kPrepX:
                if (touched[op.qubits[0]]) {
                    throw std::invalid_argument("deferred measurement: qubit prepared twice");
                }
                touched[op.qubits[0]] = true;
                if (op.type == OpType::kPrepX) {
                    st.apply_h(op.qubits[0]);
                }
                break;
            case OpType::kCnot:
                use(op.qubits[0]);
                use(op.qubits[1]);
                st.apply_cnot(op.qubits[0], op.qubits[1]);
                break;
            case OpType::kH:
                use(op.qubits[0]);
                st.apply_h(op.qubits[0]);
                break;
            case OpType::kSwap:
                use(op.qubits[0]);
                use(op.qubits[1]);
                st.apply_swap(op.qubits[0], op.qubits[1]);
                break;
            case OpType::kMeasureZ:
            case OpType::kMeasureX:
                use(op.qubits[0]);
                if (op.type == OpType::kMeasureX) {
                    st.apply_h(op.qubits[0]);
                }
                done[op.qubits[0]] = true;
                measured.push_back({op.qubits[0], op.bit});
                break;
            case OpType::kError:
                throw std::invalid_argument("exact click probability needs a circuit without error locations");
        }
    }
    return measured;
}

uint64_t outcome_bits(size_t idx, const std::vector<MeasuredQubit> &measured) {
    uint64_t bits = 0;
    for (const auto &m : measured) {
        bits |= static_cast<uint64_t>((idx >> m.qubit) & 1) << m.bit;
    }
    return bits;
}

uint64_t reference_outcome(const CliffordCircuitSpec &circuit, char input) {
    DenseState st = embed_input(circuit, input);
    auto measured = run_deferred(st, circuit);
    const auto &amp = st.amplitudes();
    uint64_t ref = 0;
    bool found = false;
    for (size_t idx = 0; idx < amp.size(); idx++) {
        if (std::norm(amp[idx]) < 1e-12) {
            continue;
        }
        uint64_t bits = outcome_bits(idx, measured);
        if (found && bits != ref) {
            throw InvariantError("noiseless gadget outcome is not deterministic on the code space");
        }
        ref = bits;
        found = true;
    }
    return ref;
}

Eigen::MatrixXcd pauli_matrix(const PauliOperator &p) {
    size_t dim = size_t{1} << p.n;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    cd phase = i_power(std::popcount(p.x & p.z));
    for (size_t idx = 0; idx < dim; idx++) {
        double sign = parity(idx & p.z) ? -1.0 : 1.0;
        m(idx ^ p.x, idx) = phase * sign;
    }
    return m;
}

}  // namespace

DenseState::DenseState(int n) : n_(n) {
    if (n < 1 || n > kMaxDenseQubits) {
        throw DimensionError("DenseState supports 1 to 12 qubits");
    }
    amp_.assign(size_t{1} << n, cd(0, 0));
    amp_[0] = 1;
}

double DenseState::norm() const {
    double s = 0;
    for (const auto &a : amp_) {
        s += std::norm(a);
    }
    return std::sqrt(s);
}

void DenseState::apply_pauli(const PauliOperator &p) {
    if (p.is_identity()) {
        return;
    }
    std::vector<cd> out(amp_.size());
    cd phase = i_power(std::popcount(p.x & p.z));
    for (size_t idx = 0; idx < amp_.size(); idx++) {
        double sign = parity(idx & p.z) ? -1.0 : 1.0;
        out[idx ^ p.x] = phase * sign * amp_[idx];
    }
    amp_ = std::move(out);
}

void DenseState::apply_rotation(const PauliOperator &p, double theta) {
    std::vector<cd> rotated = amp_;
    apply_pauli(p);
    cd c(std::cos(theta), 0);
    cd is(0, std::sin(theta));
    for (size_t idx = 0; idx < amp_.size(); idx++) {
        amp_[idx] = c * rotated[idx] + is * amp_[idx];
    }
}

void DenseState::apply_cnot(int control, int target) {
    size_t cm = size_t{1} << control;
    size_t tm = size_t{1} << target;
    for (size_t idx = 0; idx < amp_.size(); idx++) {
        if ((idx & cm) && !(idx & tm)) {
            std::swap(amp_[idx], amp_[idx | tm]);
        }
    }
}

void DenseState::apply_h(int q) {
    size_t qm = size_t{1} << q;
    const double s = 1 / std::sqrt(2.0);
    for (size_t idx = 0; idx < amp_.size(); idx++) {
        if (!(idx & qm)) {
            cd a = amp_[idx];
            cd b = amp_[idx | qm];
            amp_[idx] = s * (a + b);
            amp_[idx | qm] = s * (a - b);
        }
    }
}

void DenseState::apply_swap(int a, int b) {
    size_t am = size_t{1} << a;
    size_t bm = size_t{1} << b;
    for (size_t idx = 0; idx < amp_.size(); idx++) {
        if ((idx & am) && !(idx & bm)) {
            std::swap(amp_[idx], amp_[(idx & ~am) | bm]);
        }
    }
}

double DenseState::probability_one(int q) const {
    size_t qm = size_t{1} << q;
    double p = 0;
    for (size_t idx = 0; idx < amp_.size(); idx++) {
        if (idx & qm) {
            p += std::norm(amp_[idx]);
        }
    }
    return p;
}

int DenseState::measure_z(int q, Rng &rng) {
    double p1 = probability_one(q);
    int outcome = rng.uniform() < p1 ? 1 : 0;
    double keep = outcome ? p1 : 1 - p1;
    double scale = keep > 0 ? 1 / std::sqrt(keep) : 0;
    size_t qm = size_t{1} << q;
    for (size_t idx = 0; idx < amp_.size(); idx++) {
        bool one = (idx & qm) != 0;
        amp_[idx] = one == (outcome == 1) ? amp_[idx] * scale : cd(0, 0);
    }
    return outcome;
}

void DenseState::reset(int q, Rng &rng) {
    if (measure_z(q, rng)) {
        apply_pauli(PauliOperator(n_, uint64_t{1} << q, 0));
    }
}

int CoherentErrorSpec::n() const {
    if (!rotations.empty()) {
        return rotations.front().axis.n;
    }
    return pauli.n();
}

CoherentErrorSpec CoherentErrorSpec::transversal(char axis, double theta, int n, double eta) {
    CoherentErrorSpec spec;
    spec.eta = eta;
    for (int q = 0; q < n; q++) {
        uint64_t b = uint64_t{1} << q;
        uint64_t x = axis == 'X' || axis == 'Y' ? b : 0;
        uint64_t z = axis == 'Z' || axis == 'Y' ? b : 0;
        spec.rotations.push_back({PauliOperator(n, x, z), theta});
    }
    return spec;
}

DenseState logical_input_state(char axis) {
    DenseState st(2);
    auto &a = st.amplitudes();
    a[0] = 0;
    const double s = 1 / std::sqrt(2.0);
    // Index 2 is |01> (qubit 1 set), index 1 is |10>.
    switch (axis) {
        case 'Z':
            a[2] = 1;
            break;
        case 'X':
            a[2] = s;
            a[1] = s;
            break;
        case 'Y':
            a[2] = s;
            a[1] = cd(0, s);
            break;
        default:
            throw std::invalid_argument("logical input must be X, Y or Z");
    }
    return st;
}

ClickRate simulate_gadget_clicks(const CliffordCircuitSpec &circuit,
                                 const CoherentErrorSpec &error,
                                 char input,
                                 bool pfr,
                                 uint64_t shots,
                                 uint64_t seed) {
    circuit.validate();
    const int data_n = static_cast<int>(circuit.data_in.size());
    check_error(error, data_n);
    const uint64_t reference = reference_outcome(circuit, input);
    DiscreteSampler<PauliOperator> pauli;
    for (const auto &[p, w] : completed_pauli(error.pauli, data_n)) {
        pauli.add(p, w);
    }
    std::vector<DiscreteSampler<PauliOperator>> location(circuit.ops.size());
    for (size_t i = 0; i < circuit.ops.size(); i++) {
        if (circuit.ops[i].type == OpType::kError) {
            for (const auto &[p, w] : completed_pauli(circuit.ops[i].error, circuit.ops[i].error.n())) {
                location[i].add(p, w);
            }
        }
    }
    const DenseState start = embed_input(circuit, input);
    const uint64_t mask = (uint64_t{1} << data_n) - 1;

    ClickRate out;
    out.input = input;
    out.shots = shots;
    for (uint64_t s = 0; s < shots; s++) {
        Rng rng(seed, kStreamStatevec, s);
        DenseState st = start;
        PauliOperator frame = PauliOperator::identity(data_n);
        if (pfr) {
            frame = PauliOperator(data_n, rng.bits() & mask, rng.bits() & mask);
            st.apply_pauli(embed_pauli(frame, circuit.data_in, circuit.num_qubits));
        }
        bool coherent = rng.uniform() < error.eta;
        apply_error_branch(st, circuit, error, coherent, coherent ? PauliOperator() : pauli.sample(rng));
        std::vector<bool> touched(circuit.num_qubits, false);
        for (int q : circuit.data_in) {
            touched[q] = true;
        }
        uint64_t bits = 0;
        for (size_t i = 0; i < circuit.ops.size(); i++) {
            const auto &op = circuit.ops[i];
            switch (op.type) {
                case OpType::kPrepZ:
                case OpType::kPrepX:
                    if (touched[op.qubits[0]]) {
                        st.reset(op.qubits[0], rng);
                    }
                    touched[op.qubits[0]] = true;
                    if (op.type == OpType::kPrepX) {
                        st.apply_h(op.qubits[0]);
                    }
                    break;
                case OpType::kCnot:
                    st.apply_cnot(op.qubits[0], op.qubits[1]);
                    break;
                case OpType::kH:
                    st.apply_h(op.qubits[0]);
                    break;
                case OpType::kSwap:
                    st.apply_swap(op.qubits[0], op.qubits[1]);
                    break;
                case OpType::kMeasureZ:
                    bits |= static_cast<uint64_t>(st.measure_z(op.qubits[0], rng)) << op.bit;
                    break;
                case OpType::kMeasureX:
                    st.apply_h(op.qubits[0]);
                    bits |= static_cast<uint64_t>(st.measure_z(op.qubits[0], rng)) << op.bit;
                    st.apply_h(op.qubits[0]);
                    break;
                case OpType::kError:
                    st.apply_pauli(embed_pauli(location[i].sample(rng), op.qubits, circuit.num_qubits));
                    break;
            }
        }
        uint64_t syndrome = bits ^ reference;
        if (pfr) {
            syndrome ^= propagate_incoming(circuit, frame).flips;
        }
        if (syndrome != 0) {
            out.clicks++;
        }
    }
    if (shots > 0) {
        out.rate = static_cast<double>(out.clicks) / static_cast<double>(shots);
        out.stderr_ = std::sqrt(out.rate * (1 - out.rate) / static_cast<double>(shots));
    }
    return out;
}

double exact_click_probability(const CliffordCircuitSpec &circuit,
                               const CoherentErrorSpec &error,
                               char input,
                               bool pfr) {
    circuit.validate();
    const int data_n = static_cast<int>(circuit.data_in.size());
    check_error(error, data_n);
    const uint64_t reference = reference_outcome(circuit, input);
    const DenseState start = embed_input(circuit, input);

    struct Branch {
        double w;
        bool coherent;
        PauliOperator pauli;
    };
    std::vector<Branch> branches;
    if (error.eta > 0) {
        branches.push_back({error.eta, true, PauliOperator()});
    }
    for (const auto &[p, w] : completed_pauli(error.pauli, data_n)) {
        branches.push_back({(1 - error.eta) * w, false, p});
    }
    std::vector<PauliOperator> frames;
    if (pfr) {
        for (uint64_t idx = 0; idx < (uint64_t{1} << (2 * data_n)); idx++) {
            frames.push_back(PauliOperator::from_dense_index(data_n, idx));
        }
    } else {
        frames.push_back(PauliOperator::identity(data_n));
    }
    double total = 0;
    for (const auto &frame : frames) {
        uint64_t correction = pfr ? propagate_incoming(circuit, frame).flips : 0;
        for (const auto &b : branches) {
            DenseState st = start;
            st.apply_pauli(embed_pauli(frame, circuit.data_in, circuit.num_qubits));
            apply_error_branch(st, circuit, error, b.coherent, b.pauli);
            auto measured = run_deferred(st, circuit);
            double click = 0;
            const auto &amp = st.amplitudes();
            for (size_t idx = 0; idx < amp.size(); idx++) {
                if ((outcome_bits(idx, measured) ^ reference ^ correction) != 0) {
                    click += std::norm(amp[idx]);
                }
            }
            total += b.w * click / static_cast<double>(frames.size());
        }
    }
    return total;
}

PauliDistribution twirl_channel_numerically(const CoherentErrorSpec &error) {
    int n = error.n();
    if (n < 1 || n > 3) {
        throw DimensionError("twirl_channel_numerically supports 1 to 3 qubits");
    }
    if (!(error.eta >= 0 && error.eta <= 1)) {
        throw std::invalid_argument("coherent error eta must lie in [0, 1]");
    }
    size_t dim = size_t{1} << n;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    for (const auto &rot : error.rotations) {
        if (rot.axis.n != n) {
            throw DimensionError("rotation axes must share one qubit count");
        }
        Eigen::MatrixXcd r = std::cos(rot.theta) * Eigen::MatrixXcd::Identity(dim, dim) +
                             cd(0, std::sin(rot.theta)) * pauli_matrix(rot.axis);
        u = r * u;
    }
    PauliDistribution pauli_part = completed_pauli(error.pauli, n);
    size_t count = dim * dim;
    std::vector<double> lams(count);
    for (size_t idx = 0; idx < count; idx++) {
        PauliOperator q = PauliOperator::from_dense_index(n, idx);
        Eigen::MatrixXcd pq = pauli_matrix(q);
        double coherent = (pq * u * pq * u.adjoint()).trace().real() / static_cast<double>(dim);
        lams[idx] = (1 - error.eta) * eigenvalue_of_distribution(pauli_part, q) + error.eta * coherent;
    }
    auto probs = walsh_hadamard_full(lams, n, TransformDirection::kToProbabilities);
    for (auto &p : probs) {
        if (p < -1e-10) {
            throw InvariantError("twirled channel has a negative probability");
        }
        p = std::max(p, 0.0);
    }
    return from_dense(probs, n, 1e-15);
}

}  // namespace lsd
