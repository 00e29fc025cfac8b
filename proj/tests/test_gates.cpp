#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "oracles.hpp"

#include <qcomp/gates.hpp>

#include <random>

using namespace qcomp;

namespace {

Matrix kron3(const Matrix& a, const Matrix& b, const Matrix& c) {
    return oracle::kron(a, oracle::kron(b, c));
}

Matrix fd_deriv(GateKind k, std::array<double, 3> angles, int which) {
    const double h = 1e-6;
    auto plus = angles, minus = angles;
    plus[which] += h;
    minus[which] -= h;
    return (gate_matrix(k, plus) - gate_matrix(k, minus)) / (2 * h);
}

}  // namespace

TEST_CASE("su2 pinned values") {
    CHECK(oracle::max_abs_diff(su2(0, 0, 0), Matrix::Identity(2, 2)) < 1e-15);

    Matrix flip(2, 2);
    flip << 0, 1, -1, 0;
    CHECK(oracle::max_abs_diff(su2(M_PI / 2, 0, 0), flip) < 1e-15);

    Matrix phase = Matrix::Zero(2, 2);
    phase(0, 0) = std::exp(cplx{0, M_PI / 4});
    phase(1, 1) = std::exp(cplx{0, -M_PI / 4});
    CHECK(oracle::max_abs_diff(su2(0, M_PI / 4, 0), phase) < 1e-15);
}

TEST_CASE("gate matrices stay unitary over many random angles") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-6.5, 6.5);
    for (int i = 0; i < 1000; ++i) {
        const Matrix u = su2(ang(rng), ang(rng), ang(rng));
        CHECK((u.adjoint() * u - Matrix::Identity(2, 2)).norm() < 1e-12);
        const Matrix g = xxz2(ang(rng), ang(rng));
        CHECK((g.adjoint() * g - Matrix::Identity(4, 4)).norm() < 1e-12);
    }
}

TEST_CASE("su2 derivatives: pinned matrices") {
    Matrix flip(2, 2);
    flip << 0, 1, -1, 0;
    CHECK(oracle::max_abs_diff(su2_deriv(0, 0, 0, 0), flip) < 1e-15);

    Matrix dphi = Matrix::Zero(2, 2);
    dphi(0, 0) = cplx{0, 1};
    dphi(1, 1) = cplx{0, -1};
    CHECK(oracle::max_abs_diff(su2_deriv(0, 0, 0, 1), dphi) < 1e-15);

    Matrix dchi = Matrix::Zero(2, 2);
    dchi(0, 1) = cplx{0, 1};
    dchi(1, 0) = cplx{0, 1};
    CHECK(oracle::max_abs_diff(su2_deriv(M_PI / 2, 0, 0, 2), dchi) < 1e-15);
}

TEST_CASE("analytic derivatives match finite differences") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ang(-3.0, 3.0);
    for (int i = 0; i < 25; ++i) {
        const std::array<double, 3> a{ang(rng), ang(rng), ang(rng)};
        for (int w = 0; w < 3; ++w)
            CHECK(oracle::max_abs_diff(gate_deriv(GateKind::Su2, a, w),
                                       fd_deriv(GateKind::Su2, a, w)) < 1e-8);
        for (int w = 0; w < 2; ++w)
            CHECK(oracle::max_abs_diff(gate_deriv(GateKind::Xxz2, a, w),
                                       fd_deriv(GateKind::Xxz2, a, w)) < 1e-8);
    }
    CHECK_THROWS_AS(su2_deriv(0, 0, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(xxz2_deriv(0, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(gate_deriv(GateKind::Cnot, {0, 0, 0}, 0), std::invalid_argument);
}

TEST_CASE("xxz2 basics") {
    CHECK(oracle::max_abs_diff(xxz2(0, 0), Matrix::Identity(4, 4)) < 1e-15);

    const double phi = 0.83;
    const Matrix g = xxz2(0.31, phi);
    Vector v00 = Vector::Zero(4);
    v00[0] = 1;
    CHECK((g * v00 - std::exp(cplx{0, phi}) * v00).norm() < 1e-15);

    const Matrix charge =
        oracle::kron(oracle::pauli_z(), oracle::pauli_i()) +
        oracle::kron(oracle::pauli_i(), oracle::pauli_z());
    CHECK(oracle::max_abs_diff(g * charge, charge * g) < 1e-14);
}

TEST_CASE("xxz2 equals the exponential of its commuting generators") {
    const Matrix a = oracle::kron(oracle::pauli_x(), oracle::pauli_x()) +
                     oracle::kron(oracle::pauli_y(), oracle::pauli_y());
    const Matrix b = oracle::kron(oracle::pauli_z(), oracle::pauli_z());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ang(-3.0, 3.0);
    for (int i = 0; i < 10; ++i) {
        const double th = ang(rng), ph = ang(rng);
        CHECK(oracle::max_abs_diff(xxz2(th, ph), herm_expi(th * a + ph * b, 1.0)) < 1e-13);
    }
}

TEST_CASE("xxz2 angles that realize the bond propagator") {
    const Matrix bond = 0.25 * (oracle::kron(oracle::pauli_x(), oracle::pauli_x()) +
                                oracle::kron(oracle::pauli_y(), oracle::pauli_y())) +
                        0.125 * oracle::kron(oracle::pauli_z(), oracle::pauli_z());
    for (double t : {0.1, 0.5, 1.0})
        CHECK(oracle::max_abs_diff(xxz2(-t / 4, -t / 8), herm_expi(bond, -t)) < 1e-14);
}

TEST_CASE("cnot truth table and arity bookkeeping") {
    const Matrix k = cnot();
    Matrix expect = Matrix::Zero(4, 4);
    expect(0, 0) = expect(1, 1) = expect(2, 3) = expect(3, 2) = 1;
    CHECK(oracle::max_abs_diff(k, expect) == 0.0);

    CHECK(gate_arity(GateKind::Su2) == 1);
    CHECK(gate_arity(GateKind::Xxz2) == 2);
    CHECK(gate_arity(GateKind::Cnot) == 2);
    CHECK(gate_angle_count(GateKind::Su2) == 3);
    CHECK(gate_angle_count(GateKind::Xxz2) == 2);
    CHECK(gate_angle_count(GateKind::Cnot) == 0);
}

TEST_CASE("pxp subcircuit conditions on ground-state neighbors") {
    const auto seq = pxp_block_subcircuit();

    CHECK(oracle::max_abs_diff(sequence_matrix(seq, 0.0), Matrix::Identity(8, 8)) < 1e-15);

    const Matrix g = sequence_matrix(seq, 0.37);
    for (std::size_t b = 0; b < 8; ++b) {
        const int left = bit_of(b, 3, 0), right = bit_of(b, 3, 2);
        if (left == 1 || right == 1) {
            CHECK(std::abs(g(b, b) - cplx{1, 0}) < 1e-14);
            CHECK(g.col(b).cwiseAbs().sum() - std::abs(g(b, b)) < 1e-14);
        }
    }

    // both neighbors down: the middle qubit sees u(4 theta, 0, 0)
    const Matrix inner = su2(4 * 0.37, 0, 0);
    CHECK(std::abs(g(0, 0) - inner(0, 0)) < 1e-14);
    CHECK(std::abs(g(2, 0) - inner(1, 0)) < 1e-14);
    CHECK(std::abs(g(0, 2) - inner(0, 1)) < 1e-14);
    CHECK(std::abs(g(2, 2) - inner(1, 1)) < 1e-14);

    const Matrix pyp =
        kron3(oracle::proj_down(), oracle::pauli_y(), oracle::proj_down());
    for (double t : {0.1, 0.5, 1.0})
        CHECK(oracle::max_abs_diff(sequence_matrix(seq, t / 4), herm_expi(pyp, -t)) < 1e-13);
}

TEST_CASE("framed pxp subcircuit is the x-axis blocked rotation") {
    const auto seq = pxp_block_subcircuit();
    const Matrix f = su2(0, -M_PI / 4, 0);
    const Matrix f3 = kron3(f, f, f);
    const Matrix pxp =
        kron3(oracle::proj_down(), oracle::pauli_x(), oracle::proj_down());
    for (double t : {0.1, 0.5, 1.0})
        CHECK(oracle::max_abs_diff(f3 * sequence_matrix(seq, t / 4) * f3.adjoint(),
                                   herm_expi(pxp, -t)) < 1e-13);
}

TEST_CASE("qlm subcircuit realizes the local gauge coupling") {
    const auto seq = qlm_gauge_subcircuit();

    CHECK(oracle::max_abs_diff(sequence_matrix(seq, 0.0), Matrix::Identity(8, 8)) < 1e-15);

    Matrix sp = Matrix::Zero(2, 2);
    sp(1, 0) = 1;
    const Matrix sm = sp.adjoint();
    const Matrix hop = kron3(sp, sp, sm);
    const Matrix h = -(hop + hop.adjoint());
    for (double t : {0.1, 0.5, 1.0})
        CHECK(oracle::max_abs_diff(sequence_matrix(seq, t / 8), herm_expi(h, -t)) < 1e-13);
}

TEST_CASE("qlm subcircuit commutes with the overlapping charge combinations") {
    const auto seq = qlm_gauge_subcircuit();
    const Matrix ql = oracle::site_op(3, 0, oracle::pauli_z()) -
                      oracle::site_op(3, 1, oracle::pauli_z());
    const Matrix qr = oracle::site_op(3, 2, oracle::pauli_z()) +
                      oracle::site_op(3, 1, oracle::pauli_z());
    for (double th : {0.21, 0.9}) {
        const Matrix g = sequence_matrix(seq, th);
        CHECK(oracle::max_abs_diff(g * ql, ql * g) < 1e-12);
        CHECK(oracle::max_abs_diff(g * qr, qr * g) < 1e-12);
    }
}

TEST_CASE("gate dispatch is consistent with the direct constructors") {
    const std::array<double, 3> a{0.4, -1.1, 2.2};
    CHECK(oracle::max_abs_diff(gate_matrix(GateKind::Su2, a), su2(0.4, -1.1, 2.2)) == 0.0);
    CHECK(oracle::max_abs_diff(gate_matrix(GateKind::Xxz2, a), xxz2(0.4, -1.1)) == 0.0);
    CHECK(oracle::max_abs_diff(gate_matrix(GateKind::Cnot, a), cnot()) == 0.0);
    CHECK(oracle::max_abs_diff(gate_deriv(GateKind::Xxz2, a, 1),
                               xxz2_deriv(0.4, -1.1, 1)) == 0.0);
}
