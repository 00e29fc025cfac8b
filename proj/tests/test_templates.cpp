#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qcomp/templates.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"

using namespace qcomp;

namespace {

std::vector<double> random_params(std::size_t n, unsigned seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<double> p(n);
    for (double& v : p) v = dist(rng);
    return p;
}

Matrix translation(int L, int cell) {
    const std::size_t n = dim_of(L);
    Matrix t = Matrix::Zero(n, n);
    for (std::size_t b = 0; b < n; ++b) {
        std::size_t shifted = 0;
        for (int j = 0; j < L; ++j)
            if (bit_of(b, L, j)) shifted |= qubit_stride(L, (j + cell) % L);
        t(shifted, b) = 1.0;
    }
    return t;
}

Matrix xxz_parity_h(int L, int parity) {
    Matrix bond = Matrix::Zero(4, 4);
    bond(0, 0) = bond(3, 3) = 0.125;
    bond(1, 1) = bond(2, 2) = -0.125;
    bond(1, 2) = bond(2, 1) = 0.5;
    Matrix h = Matrix::Zero(dim_of(L), dim_of(L));
    for (int j = parity; j < L; j += 2) h += oracle::embed(L, bond, {j, (j + 1) % L});
    return h;
}

Matrix pxp_parity_h(int L, int parity) {
    const Matrix term =
        oracle::kron(oracle::kron(oracle::proj_down(), oracle::pauli_x()), oracle::proj_down());
    Matrix h = Matrix::Zero(dim_of(L), dim_of(L));
    for (int m = parity; m < L; m += 2)
        h += oracle::embed(L, term, {(m - 1 + L) % L, m, (m + 1) % L});
    return h;
}

Matrix qlm_parity_h(int L, int parity) {
    Matrix term = Matrix::Zero(8, 8);
    term(6, 1) = term(1, 6) = -1.0;  // |110><001| + h.c. on (matter, gauge, matter)
    Matrix h = Matrix::Zero(dim_of(L), dim_of(L));
    for (int m = parity; m < L / 2; m += 2)
        h += oracle::embed(L, term, {2 * m, 2 * m + 1, (2 * m + 2) % L});
    return h;
}

struct Segment {
    int parity;
    double tau;
};

// merge adjacent rows of equal parity into one evolution segment
std::vector<Segment> merge_rows(const std::vector<int>& parities,
                                const std::vector<double>& taus) {
    std::vector<Segment> segs;
    for (std::size_t r = 0; r < parities.size(); ++r) {
        if (!segs.empty() && segs.back().parity == parities[r])
            segs.back().tau += taus[r];
        else
            segs.push_back({parities[r], taus[r]});
    }
    return segs;
}

Matrix chain_product(const Matrix& h_even, const Matrix& h_odd,
                     const std::vector<Segment>& segs) {
    Matrix u = Matrix::Identity(h_even.rows(), h_even.cols());
    for (const Segment& s : segs) u = herm_expi(s.parity == 0 ? h_even : h_odd, -s.tau) * u;
    return u;
}

int blocked_parity(int r) { return (r % 4 == 1 || r % 4 == 2) ? 1 : 0; }

bool same_layout(const CircuitTemplate& a, const CircuitTemplate& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].size() != b.layers[l].size()) return false;
        for (std::size_t g = 0; g < a.layers[l].size(); ++g) {
            const GateInstance& x = a.layers[l][g];
            const GateInstance& y = b.layers[l][g];
            if (x.kind != y.kind || x.qubits != y.qubits) return false;
            for (int i = 0; i < 3; ++i)
                if (x.bind[i].slot != y.bind[i].slot || x.bind[i].coeff != y.bind[i].coeff ||
                    x.bind[i].offset != y.bind[i].offset)
                    return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("architecture names round-trip") {
    for (Arch a : {Arch::Tivb2, Arch::Tivb4, Arch::BlockedXxz, Arch::BlockedPxp,
                   Arch::BlockedQlm, Arch::Trotter1, Arch::Trotter2})
        CHECK(arch_from_name(arch_name(a)) == a);
    CHECK_THROWS_AS(arch_from_name("BRICKWALL"), std::invalid_argument);
}

TEST_CASE("parameter and cnot accounting") {
    const CircuitTemplate t2 = build_template(Arch::Tivb2, 8, 2);
    CHECK(t2.param_count == 30);
    CHECK(t2.cnot_count == 16);
    CHECK(t2.slot_names.size() == 30);

    CHECK(build_template(Arch::Tivb4, 8, 1).param_count == 36);
    CHECK(build_template(Arch::Tivb4, 8, 1).cnot_count == 8);

    const CircuitTemplate bx = build_template(Arch::BlockedXxz, 8, 1);
    CHECK(bx.param_count == 2);
    CHECK(bx.cnot_count == 24);  // same budget as TIVB2 with M=3

    const CircuitTemplate bp = build_template(Arch::BlockedPxp, 8, 8);
    CHECK(bp.param_count == 2);
    CHECK(bp.cnot_count == 64);

    const CircuitTemplate bq = build_template(Arch::BlockedQlm, 8, 1);
    CHECK(bq.param_count == 1);
    CHECK(bq.cnot_count == 48);

    const CircuitTemplate flat = build_template(Arch::Tivb2, 8, 0);
    CHECK(flat.param_count == 6);
    CHECK(flat.cnot_count == 0);
    CHECK(flat.layers.size() == 1);
}

TEST_CASE("blocked templates at zero parameters are the identity") {
    for (Arch a : {Arch::BlockedXxz, Arch::BlockedPxp, Arch::BlockedQlm}) {
        const CircuitTemplate tpl = build_template(a, 8, a == Arch::BlockedPxp ? 8 : 2);
        const DenseOperator c = evaluate(tpl, std::vector<double>(tpl.param_count, 0.0));
        CHECK(oracle::max_abs_diff(c.mat, Matrix::Identity(c.dim(), c.dim())) < 1e-12);
    }
}

TEST_CASE("tivb with no brickwall layers is a single-qubit product") {
    const int L = 4;
    const CircuitTemplate tpl = build_template(Arch::Tivb2, L, 0);
    const std::vector<double> p = random_params(tpl.param_count, 3);
    Matrix expected = Matrix::Identity(dim_of(L), dim_of(L));
    for (int j = 0; j < L; ++j) {
        const int base = (j % 2) * 3;
        expected = oracle::embed(L, su2(p[base], p[base + 1], p[base + 2]), {j}) * expected;
    }
    CHECK(oracle::max_abs_diff(evaluate(tpl, p).mat, expected) < 1e-13);
}

TEST_CASE("evaluation is unitary and matches state application") {
    const CircuitTemplate tpl = build_template(Arch::Tivb2, 6, 2);
    const std::vector<double> p = random_params(tpl.param_count, 5);
    const DenseOperator c = evaluate(tpl, p);
    CHECK((c.mat.adjoint() * c.mat - Matrix::Identity(c.dim(), c.dim())).norm() < 1e-10);

    const StateVector psi = oracle::random_state(6, 7);
    const StateVector out = evaluate_state(tpl, p, psi);
    CHECK((out.amp - c.mat * psi.amp).norm() < 1e-12);
}

TEST_CASE("translation covariance by one unit cell") {
    const int L = 8;
    struct Case {
        Arch arch;
        int M;
        int cell;
    };
    for (const Case cs : {Case{Arch::Tivb2, 1, 2}, Case{Arch::Tivb4, 1, 4},
                          Case{Arch::BlockedXxz, 2, 2}, Case{Arch::BlockedPxp, 8, 2},
                          Case{Arch::BlockedQlm, 1, 4}}) {
        const CircuitTemplate tpl = build_template(cs.arch, L, cs.M);
        std::vector<double> p = random_params(tpl.param_count, 11, 0.7);
        if (cs.arch == Arch::Tivb2 || cs.arch == Arch::Tivb4) {
            // sharing by site class: covariance holds for any values
        }
        const Matrix c = evaluate(tpl, p).mat;
        const Matrix t = translation(L, cs.cell);
        CHECK((t * c * t.adjoint() - c).norm() < 1e-10);
    }
}

TEST_CASE("blocked circuits conserve their charges") {
    const int L = 8;
    const CircuitTemplate bx = build_template(Arch::BlockedXxz, L, 2);
    const Matrix cx = evaluate(bx, random_params(bx.param_count, 13)).mat;
    const Matrix q = charges({ModelKind::Xxz, L}).front().mat;
    CHECK((cx * q - q * cx).norm() < 1e-12);

    const CircuitTemplate bp = build_template(Arch::BlockedPxp, L, 8);
    const DenseOperator cp = evaluate(bp, random_params(bp.param_count, 17));
    const SectorTable tp = sector_table({ModelKind::Pxp, L});
    CHECK(masked_sq_norm(cp, tp.mask_o1()) + masked_sq_norm(cp, tp.mask_or()) < 1e-20);

    const CircuitTemplate bq = build_template(Arch::BlockedQlm, L, 2);
    const DenseOperator cq = evaluate(bq, random_params(bq.param_count, 19));
    const SectorTable tq = sector_table({ModelKind::Qlm, L});
    CHECK(masked_sq_norm(cq, tq.mask_o1()) + masked_sq_norm(cq, tq.mask_or()) < 1e-20);
}

TEST_CASE("blocked pxp stays inside its lightcone, tivb does not") {
    const int L = 8;
    const SectorTable table = sector_table({ModelKind::Pxp, L});
    const auto& idx = table.largest().indices;
    const auto block_otoc = [&](const Matrix& c, int i, int j) {
        const Matrix zi = oracle::site_op(L, i, oracle::pauli_z());
        const Matrix zj = oracle::site_op(L, j, oracle::pauli_z());
        const Matrix a = c.adjoint() * zi * c;
        const Matrix k = a * zj - zj * a;
        double sq = 0.0;
        for (int r : idx)
            for (int col : idx) sq += std::norm(k(r, col));
        return sq / static_cast<double>(idx.size());
    };

    const CircuitTemplate bp = build_template(Arch::BlockedPxp, L, 8);
    const Matrix cp = evaluate(bp, random_params(bp.param_count, 23)).mat;
    for (int j : {0, 1, 7}) CHECK(block_otoc(cp, 4, j) < 1e-18);  // beyond M/4 = 2

    const CircuitTemplate tv = build_template(Arch::Tivb2, L, 3);
    const Matrix cv = evaluate(tv, random_params(tv.param_count, 29)).mat;
    CHECK(block_otoc(cv, 4, 0) > 1e-8);
}

TEST_CASE("first-order trotter circuits multiply out exactly") {
    SUBCASE("xxz single step carries theta=t/2, phi=t/4 on the blocked layout") {
        const auto [tpl, p] = build_trotter(ModelKind::Xxz, 6, 1, 1, 0.8);
        CHECK(tpl.arch == Arch::Trotter1);
        CHECK(tpl.order == 1);
        CHECK(p.size() == 2);
        CHECK(p[0] == 0.4);
        CHECK(p[1] == 0.2);
        CHECK(same_layout(tpl, build_template(Arch::BlockedXxz, 6, 1)));
    }

    SUBCASE("xxz chain") {
        const int L = 6, steps = 3;
        const double t = 0.7, dt = t / steps;
        const auto [tpl, p] = build_trotter(ModelKind::Xxz, L, 1, steps, t);
        std::vector<int> parities;
        std::vector<double> taus;
        for (int i = 0; i < steps; ++i) {
            parities.insert(parities.end(), {0, 1});
            taus.insert(taus.end(), {dt, dt});
        }
        const Matrix u = chain_product(xxz_parity_h(L, 0), xxz_parity_h(L, 1),
                                       merge_rows(parities, taus));
        CHECK(oracle::max_abs_diff(evaluate(tpl, p).mat, u) < 1e-12);
    }

    SUBCASE("pxp chain and exact angle sum") {
        const int L = 8, steps = 3;
        const double t = 0.9;
        const auto [tpl, p] = build_trotter(ModelKind::Pxp, L, 1, steps, t);
        CHECK(tpl.M == 4 * steps);
        CHECK(p.size() == static_cast<std::size_t>(steps));
        for (double v : p) CHECK(v == t / (4 * steps));  // theta_l = t/M

        const int rows = 2 * steps;
        std::vector<int> parities(rows);
        std::vector<double> taus(rows);
        for (int r = 0; r < rows; ++r) {
            parities[r] = blocked_parity(r);
            taus[r] = 4.0 * p[std::min(r, rows - 1 - r)];
        }
        const Matrix u = chain_product(pxp_parity_h(L, 0), pxp_parity_h(L, 1),
                                       merge_rows(parities, taus));
        CHECK(oracle::max_abs_diff(evaluate(tpl, p).mat, u) < 1e-12);

        const auto [tpl4, p4] = build_trotter(ModelKind::Pxp, L, 1, 4, 1.0);
        double sum = 0.0;
        for (double v : p4) sum += v;
        CHECK(sum == 0.25);  // free angles accumulate to exactly t/4
    }

    SUBCASE("qlm chain") {
        const int L = 8, steps = 3;
        const double t = 0.8;
        const auto [tpl, p] = build_trotter(ModelKind::Qlm, L, 1, steps, t);
        const int rows = 2 * steps;
        std::vector<int> parities(rows);
        std::vector<double> taus(rows);
        for (int r = 0; r < rows; ++r) {
            parities[r] = blocked_parity(r);
            taus[r] = 8.0 * p[std::min(r, rows - 1 - r)];
        }
        const Matrix u = chain_product(qlm_parity_h(L, 0), qlm_parity_h(L, 1),
                                       merge_rows(parities, taus));
        CHECK(oracle::max_abs_diff(evaluate(tpl, p).mat, u) < 1e-12);
    }

    SUBCASE("t=0 collapses to the identity") {
        const auto [tpl, p] = build_trotter(ModelKind::Xxz, 6, 1, 2, 0.0);
        const DenseOperator c = evaluate(tpl, p);
        CHECK(oracle::max_abs_diff(c.mat, Matrix::Identity(c.dim(), c.dim())) < 1e-13);
    }
}

TEST_CASE("second-order trotter circuits are symmetric strang chains") {
    SUBCASE("xxz") {
        const int L = 6, steps = 2;
        const double t = 0.9, dt = t / steps;
        const auto [tpl, p] = build_trotter(ModelKind::Xxz, L, 2, steps, t);
        CHECK(tpl.arch == Arch::Trotter2);
        CHECK(p.size() == static_cast<std::size_t>(2 * (steps + 1)));
        const std::vector<Segment> segs{
            {0, dt / 2}, {1, dt}, {0, dt}, {1, dt}, {0, dt / 2}};
        const Matrix u = chain_product(xxz_parity_h(L, 0), xxz_parity_h(L, 1), segs);
        CHECK(oracle::max_abs_diff(evaluate(tpl, p).mat, u) < 1e-12);
    }

    SUBCASE("pxp carries halved boundary angles on M+2 layers") {
        const int L = 8, steps = 2;
        const double t = 1.1, dt = t / steps;
        const auto [tpl, p] = build_trotter(ModelKind::Pxp, L, 2, steps, t);
        CHECK(tpl.M == 4 * steps + 2);
        REQUIRE(p.size() == static_cast<std::size_t>(steps + 1));
        CHECK(p[0] == dt / 8);  // theta_1 = t/(2M) of the matched M=4*steps circuit
        CHECK(p[1] == dt / 4);
        const std::vector<Segment> segs{
            {0, dt / 2}, {1, dt}, {0, dt}, {1, dt}, {0, dt / 2}};
        const Matrix u = chain_product(pxp_parity_h(L, 0), pxp_parity_h(L, 1), segs);
        CHECK(oracle::max_abs_diff(evaluate(tpl, p).mat, u) < 1e-12);
    }

    SUBCASE("qlm") {
        const int L = 8, steps = 1;
        const double t = 0.6;
        const auto [tpl, p] = build_trotter(ModelKind::Qlm, L, 2, steps, t);
        const std::vector<Segment> segs{{0, t / 2}, {1, t}, {0, t / 2}};
        const Matrix u = chain_product(qlm_parity_h(L, 0), qlm_parity_h(L, 1), segs);
        CHECK(oracle::max_abs_diff(evaluate(tpl, p).mat, u) < 1e-12);
    }
}

TEST_CASE("trotter error decreases with steps") {
    const int L = 6;
    const DenseOperator u = exact_propagator({ModelKind::Xxz, L}, 1.0);
    const auto eps = [&](int steps) {
        const auto [tpl, p] = build_trotter(ModelKind::Xxz, L, 1, steps, 1.0);
        const DenseOperator c = evaluate(tpl, p);
        return 1.0 - frob_inner(c, u).real() / static_cast<double>(dim_of(L));
    };
    CHECK(eps(8) < eps(4));
    CHECK(eps(4) < eps(2));
}

TEST_CASE("stacked circuits equal operator powers") {
    const auto [tpl, p] = build_trotter(ModelKind::Xxz, 6, 1, 1, 0.4);
    const Matrix c = evaluate(tpl, p).mat;

    const auto [one, pone] = stack(tpl, p, 1);
    CHECK(oracle::max_abs_diff(evaluate(one, pone).mat, c) == 0.0);

    const auto [two, ptwo] = stack(tpl, p, 2);
    CHECK(two.param_count == 2 * tpl.param_count);
    CHECK(two.cnot_count == 2 * tpl.cnot_count);
    CHECK(two.copies == 2);
    CHECK(oracle::max_abs_diff(evaluate(two, ptwo).mat, c * c) < 1e-10);

    std::vector<double> tweaked = ptwo;
    tweaked[2] += 0.3;  // copies own independent slots
    CHECK(oracle::max_abs_diff(evaluate(two, tweaked).mat, c * c) > 1e-3);
}

TEST_CASE("lifting a template keeps the parameter layout") {
    const CircuitTemplate small = build_template(Arch::BlockedPxp, 8, 8);
    const std::vector<double> p{0.3, -0.2};
    const CircuitTemplate big = lift_size(small, 16);
    CHECK(big.param_count == small.param_count);
    CHECK(big.L == 16);
    const StateVector psi = oracle::random_state(16, 31);
    const StateVector out = evaluate_state(big, p, psi);
    CHECK(std::abs(out.amp.norm() - 1.0) < 1e-12);

    CHECK(lift_size(build_template(Arch::Tivb2, 8, 2), 12).param_count == 30);

    const auto [tr, ptr] = build_trotter(ModelKind::Xxz, 6, 2, 2, 1.0);
    const CircuitTemplate trl = lift_size(tr, 8);
    CHECK(trl.param_count == ptr.size());
    CHECK(trl.L == 8);

    const auto stacked = stack(small, p, 2).first;
    CHECK_THROWS_AS(lift_size(stacked, 12), std::invalid_argument);
    CHECK_THROWS_AS(lift_size(build_template(Arch::BlockedQlm, 8, 1), 10),
                    std::invalid_argument);
}

TEST_CASE("templates serialize to json and back") {
    const CircuitTemplate tpl = build_template(Arch::Tivb2, 6, 1);
    const std::vector<double> p = random_params(tpl.param_count, 37, 0.01);
    const auto [back, pb] = template_from_json(template_json(tpl, p));
    CHECK(back.arch == Arch::Tivb2);
    CHECK(back.L == 6);
    CHECK(back.M == 1);
    CHECK(pb == p);
    CHECK(oracle::max_abs_diff(evaluate(back, pb).mat, evaluate(tpl, p).mat) == 0.0);

    const auto [tr, ptr] = build_trotter(ModelKind::Pxp, 8, 2, 2, 1.3);
    const auto [trb, ptrb] = template_from_json(template_json(tr, ptr));
    CHECK(trb.arch == Arch::Trotter2);
    CHECK(trb.t == 1.3);
    CHECK(ptrb == ptr);
    CHECK(same_layout(tr, trb));

    const auto [st, pst] = stack(tr, ptr, 2);
    const auto [stb, pstb] = template_from_json(template_json(st, pst));
    CHECK(stb.copies == 2);
    CHECK(pstb == pst);
    CHECK(same_layout(st, stb));

    CHECK_THROWS_AS(template_from_json("{"), std::invalid_argument);
    CHECK_THROWS_AS(template_from_json("{\"arch\":\"TIVB2\"}"), std::invalid_argument);
}

TEST_CASE("invalid template requests throw") {
    CHECK_THROWS_AS(build_template(Arch::BlockedPxp, 8, 6), std::invalid_argument);
    CHECK_THROWS_AS(build_template(Arch::BlockedPxp, 8, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_template(Arch::Tivb4, 6, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_template(Arch::BlockedQlm, 6, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_template(Arch::Tivb2, 7, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_template(Arch::Trotter1, 8, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_trotter(ModelKind::Xxz, 6, 3, 2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_trotter(ModelKind::Xxz, 6, 1, 0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_trotter(ModelKind::Qlm, 6, 1, 2, 1.0), std::invalid_argument);

    const CircuitTemplate tpl = build_template(Arch::Tivb2, 6, 1);
    CHECK_THROWS_AS(evaluate(tpl, std::vector<double>(3, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(stack(tpl, std::vector<double>(tpl.param_count, 0.0), 0),
                    std::invalid_argument);
}

TEST_CASE("initial parameters") {
    const CircuitTemplate tv = build_template(Arch::Tivb2, 6, 1);
    const std::vector<double> a = init_params(tv, 42);
    const std::vector<double> b = init_params(tv, 42);
    const std::vector<double> c = init_params(tv, 43);
    CHECK(a == b);
    CHECK(a != c);
    bool nonzero = false;
    for (double v : a) {
        CHECK(std::abs(v) <= 0.01);
        nonzero |= v != 0.0;
    }
    CHECK(nonzero);

    const CircuitTemplate bx = build_template(Arch::BlockedXxz, 6, 2);
    for (double v : init_params(bx, 42)) CHECK(v == 0.0);
}
