#include "qcomp/gates.hpp"

#include <cmath>

namespace qcomp {

namespace {

constexpr double kQuarterPi = 0.78539816339744830961;

// XX + YY and ZZ on two qubits, the commuting generators of xxz2.
Matrix flipflop_generator() {
    Matrix a = Matrix::Zero(4, 4);
    a(1, 2) = 2.0;
    a(2, 1) = 2.0;
    return a;
}

Matrix zz_generator() {
    Matrix b = Matrix::Zero(4, 4);
    b(0, 0) = 1.0;
    b(1, 1) = -1.0;
    b(2, 2) = -1.0;
    b(3, 3) = 1.0;
    return b;
}

}  // namespace

int gate_arity(GateKind k) {
    switch (k) {
        case GateKind::Su2: return 1;
        case GateKind::Xxz2: return 2;
        case GateKind::Cnot: return 2;
    }
    throw std::invalid_argument("unknown gate kind");
}

int gate_angle_count(GateKind k) {
    switch (k) {
        case GateKind::Su2: return 3;
        case GateKind::Xxz2: return 2;
        case GateKind::Cnot: return 0;
    }
    throw std::invalid_argument("unknown gate kind");
}

Matrix su2(double theta, double phi, double chi) {
    const double c = std::cos(theta), s = std::sin(theta);
    Matrix m(2, 2);
    m(0, 0) = std::exp(cplx{0, phi}) * c;
    m(0, 1) = std::exp(cplx{0, chi}) * s;
    m(1, 0) = -std::exp(cplx{0, -chi}) * s;
    m(1, 1) = std::exp(cplx{0, -phi}) * c;
    return m;
}

Matrix su2_deriv(double theta, double phi, double chi, int which) {
    const double c = std::cos(theta), s = std::sin(theta);
    Matrix m = Matrix::Zero(2, 2);
    switch (which) {
        case 0:
            m(0, 0) = -std::exp(cplx{0, phi}) * s;
            m(0, 1) = std::exp(cplx{0, chi}) * c;
            m(1, 0) = -std::exp(cplx{0, -chi}) * c;
            m(1, 1) = -std::exp(cplx{0, -phi}) * s;
            return m;
        case 1:
            m(0, 0) = cplx{0, 1} * std::exp(cplx{0, phi}) * c;
            m(1, 1) = cplx{0, -1} * std::exp(cplx{0, -phi}) * c;
            return m;
        case 2:
            m(0, 1) = cplx{0, 1} * std::exp(cplx{0, chi}) * s;
            m(1, 0) = cplx{0, 1} * std::exp(cplx{0, -chi}) * s;
            return m;
    }
    throw std::invalid_argument("su2 has angles 0..2");
}

Matrix xxz2(double theta, double phi) {
    const cplx outer = std::exp(cplx{0, phi});
    const cplx inner = std::exp(cplx{0, -phi});
    const double c = std::cos(2 * theta), s = std::sin(2 * theta);
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = outer;
    m(3, 3) = outer;
    m(1, 1) = inner * c;
    m(2, 2) = inner * c;
    m(1, 2) = inner * cplx{0, s};
    m(2, 1) = inner * cplx{0, s};
    return m;
}

Matrix xxz2_deriv(double theta, double phi, int which) {
    const Matrix g = xxz2(theta, phi);
    if (which == 0) return cplx{0, 1} * (flipflop_generator() * g);
    if (which == 1) return cplx{0, 1} * (zz_generator() * g);
    throw std::invalid_argument("xxz2 has angles 0..1");
}

Matrix cnot() {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 3) = 1.0;
    m(3, 2) = 1.0;
    return m;
}

Matrix gate_matrix(GateKind k, const std::array<double, 3>& a) {
    switch (k) {
        case GateKind::Su2: return su2(a[0], a[1], a[2]);
        case GateKind::Xxz2: return xxz2(a[0], a[1]);
        case GateKind::Cnot: return cnot();
    }
    throw std::invalid_argument("unknown gate kind");
}

Matrix gate_deriv(GateKind k, const std::array<double, 3>& a, int which) {
    switch (k) {
        case GateKind::Su2: return su2_deriv(a[0], a[1], a[2], which);
        case GateKind::Xxz2: return xxz2_deriv(a[0], a[1], which);
        case GateKind::Cnot: throw std::invalid_argument("cnot has no angles");
    }
    throw std::invalid_argument("unknown gate kind");
}

std::vector<SeqGate> pxp_block_subcircuit() {
    // Uniform-sign staircase; CNOT conjugation in the down-first basis turns
    // it into exp(-i theta (1-Z)(1-Z) Y) on (left, middle, right).
    std::vector<SeqGate> seq;
    for (int rep = 0; rep < 2; ++rep) {
        seq.push_back({GateKind::Su2, {1, -1, -1}, 1.0, {}});
        seq.push_back({GateKind::Cnot, {0, 1, -1}, 0.0, {}});
        seq.push_back({GateKind::Su2, {1, -1, -1}, 1.0, {}});
        seq.push_back({GateKind::Cnot, {2, 1, -1}, 0.0, {}});
    }
    return seq;
}

std::vector<SeqGate> qlm_gauge_subcircuit() {
    // CNOT sandwich, a z-frame on the gauge qubit, and an alternating-sign
    // staircase carrying 2*theta per rotation.
    std::vector<SeqGate> seq;
    seq.push_back({GateKind::Cnot, {1, 2, -1}, 0.0, {}});
    seq.push_back({GateKind::Cnot, {1, 0, -1}, 0.0, {}});
    seq.push_back({GateKind::Su2, {1, -1, -1}, 0.0, {0.0, -kQuarterPi, 0.0}});
    seq.push_back({GateKind::Su2, {1, -1, -1}, 2.0, {}});
    seq.push_back({GateKind::Cnot, {0, 1, -1}, 0.0, {}});
    seq.push_back({GateKind::Su2, {1, -1, -1}, 2.0, {}});
    seq.push_back({GateKind::Cnot, {2, 1, -1}, 0.0, {}});
    seq.push_back({GateKind::Su2, {1, -1, -1}, -2.0, {}});
    seq.push_back({GateKind::Cnot, {0, 1, -1}, 0.0, {}});
    seq.push_back({GateKind::Su2, {1, -1, -1}, -2.0, {}});
    seq.push_back({GateKind::Cnot, {2, 1, -1}, 0.0, {}});
    seq.push_back({GateKind::Su2, {1, -1, -1}, 0.0, {0.0, kQuarterPi, 0.0}});
    seq.push_back({GateKind::Cnot, {1, 0, -1}, 0.0, {}});
    seq.push_back({GateKind::Cnot, {1, 2, -1}, 0.0, {}});
    return seq;
}

Matrix sequence_matrix(const std::vector<SeqGate>& seq, double theta) {
    DenseOperator op = identity_op(3);
    for (const auto& g : seq) {
        if (g.kind == GateKind::Cnot) {
            apply_cnot_left(op, g.qubits[0], g.qubits[1]);
            continue;
        }
        const std::array<double, 3> angles{g.coeff * theta + g.offset[0], g.offset[1],
                                           g.offset[2]};
        std::vector<int> qs;
        for (int i = 0; i < gate_arity(g.kind); ++i) qs.push_back(g.qubits[i]);
        apply_gate_left(op, gate_matrix(g.kind, angles), qs);
    }
    return op.mat;
}

}  // namespace qcomp
