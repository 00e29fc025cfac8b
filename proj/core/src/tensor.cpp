#include "qcomp/tensor.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>

namespace qcomp {

namespace {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

void check_qubits(int L, const std::vector<int>& qubits) {
    if (qubits.empty() || qubits.size() > 3)
        throw std::invalid_argument("gate must act on 1..3 qubits");
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        if (qubits[i] < 0 || qubits[i] >= L)
            throw std::invalid_argument("gate qubit out of range");
        for (std::size_t j = 0; j < i; ++j)
            if (qubits[i] == qubits[j])
                throw std::invalid_argument("gate qubits must be distinct");
    }
}

// Precomputed index arithmetic for one gate placement.
struct GateIndexing {
    int nq = 0;
    std::size_t groups = 0;                // 2^(L-nq)
    std::array<std::size_t, 3> pos{};      // ascending bit positions of the gate qubits
    std::array<std::size_t, 8> off{};      // basis offset of each local index

    GateIndexing(int L, const std::vector<int>& qubits) {
        nq = static_cast<int>(qubits.size());
        groups = dim_of(L) >> nq;
        std::array<std::size_t, 3> p{};
        for (int k = 0; k < nq; ++k) p[k] = L - 1 - qubits[k];
        for (int a = 0; a < (1 << nq); ++a) {
            std::size_t o = 0;
            for (int k = 0; k < nq; ++k)
                if ((a >> (nq - 1 - k)) & 1) o |= std::size_t{1} << p[k];
            off[a] = o;
        }
        std::sort(p.begin(), p.begin() + nq);
        pos = p;
    }

    // Distributes the group counter over the non-gate bits.
    std::size_t expand(std::size_t g) const {
        std::size_t idx = g;
        for (int k = 0; k < nq; ++k) {
            const std::size_t low = idx & ((std::size_t{1} << pos[k]) - 1);
            idx = ((idx >> pos[k]) << (pos[k] + 1)) | low;
        }
        return idx;
    }
};

template <int NQ>
void kernel_apply(cplx* v, const GateIndexing& gi, const cplx* g) {
    constexpr int D = 1 << NQ;
    for (std::size_t grp = 0; grp < gi.groups; ++grp) {
        const std::size_t base = gi.expand(grp);
        cplx x[D];
        for (int a = 0; a < D; ++a) x[a] = v[base + gi.off[a]];
        for (int a = 0; a < D; ++a) {
            cplx acc{0.0, 0.0};
            for (int b = 0; b < D; ++b) acc += g[a * D + b] * x[b];
            v[base + gi.off[a]] = acc;
        }
    }
}

template <int NQ>
void kernel_env(const cplx* a, const cplx* y, const GateIndexing& gi, cplx* th) {
    constexpr int D = 1 << NQ;
    for (std::size_t grp = 0; grp < gi.groups; ++grp) {
        const std::size_t base = gi.expand(grp);
        cplx av[D], yv[D];
        for (int i = 0; i < D; ++i) av[i] = a[base + gi.off[i]];
        for (int i = 0; i < D; ++i) yv[i] = std::conj(y[base + gi.off[i]]);
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) th[i * D + j] += av[i] * yv[j];
    }
}

void dispatch_apply(cplx* v, const GateIndexing& gi, const cplx* g) {
    switch (gi.nq) {
        case 1: kernel_apply<1>(v, gi, g); break;
        case 2: kernel_apply<2>(v, gi, g); break;
        case 3: kernel_apply<3>(v, gi, g); break;
        default: throw std::invalid_argument("unsupported gate size");
    }
}

Matrix row_major_copy(const Matrix& g) {
    // kernels address the gate row-major; Eigen stores column-major
    return g.transpose();
}

}  // namespace

StateVector zero_state(int L) { return basis_state(L, 0); }

StateVector basis_state(int L, std::size_t idx) {
    if (L < 1 || L > kMaxStateQubits)
        throw resource_limit_error("state size beyond dense ceiling");
    if (idx >= dim_of(L)) throw std::invalid_argument("basis index out of range");
    StateVector s;
    s.L = L;
    s.amp = Vector::Zero(dim_of(L));
    s.amp[static_cast<Eigen::Index>(idx)] = 1.0;
    return s;
}

DenseOperator identity_op(int L) {
    if (L < 1 || L > kMaxOperatorQubits)
        throw resource_limit_error("operator size beyond dense ceiling");
    DenseOperator op;
    op.L = L;
    op.mat = Matrix::Identity(dim_of(L), dim_of(L));
    return op;
}

DenseOperator make_operator(int L, Matrix m) {
    if (L < 1 || L > kMaxOperatorQubits)
        throw resource_limit_error("operator size beyond dense ceiling");
    if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != dim_of(L))
        throw std::invalid_argument("operator dimension does not match L");
    DenseOperator op;
    op.L = L;
    op.mat = std::move(m);
    return op;
}

void apply_gate(StateVector& s, const Matrix& gate, const std::vector<int>& qubits) {
    check_qubits(s.L, qubits);
    const int d = 1 << qubits.size();
    if (gate.rows() != d || gate.cols() != d)
        throw std::invalid_argument("gate matrix size does not match qubit count");
    const GateIndexing gi(s.L, qubits);
    const Matrix g = row_major_copy(gate);
    dispatch_apply(s.amp.data(), gi, g.data());
}

void apply_gate_left(DenseOperator& op, const Matrix& gate, const std::vector<int>& qubits) {
    check_qubits(op.L, qubits);
    const int d = 1 << qubits.size();
    if (gate.rows() != d || gate.cols() != d)
        throw std::invalid_argument("gate matrix size does not match qubit count");
    const GateIndexing gi(op.L, qubits);
    const Matrix g = row_major_copy(gate);
    const std::size_t n = op.dim();
    for (std::size_t z = 0; z < n; ++z)
        dispatch_apply(op.mat.col(z).data(), gi, g.data());
}

namespace {

// Groups enumerate the non-gate bits; local index 2 = control set, target
// clear, local index 3 = both set. Swapping those two rows per group is the
// whole gate.
void cnot_column(cplx* v, const GateIndexing& gi) {
    for (std::size_t grp = 0; grp < gi.groups; ++grp) {
        const std::size_t base = gi.expand(grp);
        std::swap(v[base + gi.off[2]], v[base + gi.off[3]]);
    }
}

}  // namespace

void apply_cnot(StateVector& s, int control, int target) {
    check_qubits(s.L, {control, target});
    const GateIndexing gi(s.L, {control, target});
    cnot_column(s.amp.data(), gi);
}

void apply_cnot_left(DenseOperator& op, int control, int target) {
    check_qubits(op.L, {control, target});
    const GateIndexing gi(op.L, {control, target});
    const std::size_t n = op.dim();
    for (std::size_t z = 0; z < n; ++z) cnot_column(op.mat.col(z).data(), gi);
}

Matrix local_env(const DenseOperator& A, const DenseOperator& Y, const std::vector<int>& qubits) {
    if (A.L != Y.L) throw std::invalid_argument("operator sizes differ");
    check_qubits(A.L, qubits);
    const GateIndexing gi(A.L, qubits);
    const int d = 1 << qubits.size();
    std::vector<cplx> th(static_cast<std::size_t>(d) * d, cplx{0.0, 0.0});
    const std::size_t n = A.dim();
    for (std::size_t z = 0; z < n; ++z) {
        const cplx* pa = A.mat.col(z).data();
        const cplx* py = Y.mat.col(z).data();
        switch (gi.nq) {
            case 1: kernel_env<1>(pa, py, gi, th.data()); break;
            case 2: kernel_env<2>(pa, py, gi, th.data()); break;
            case 3: kernel_env<3>(pa, py, gi, th.data()); break;
        }
    }
    Matrix out(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out(i, j) = th[static_cast<std::size_t>(i) * d + j];
    return out;
}

cplx frob_inner(const DenseOperator& a, const DenseOperator& b) {
    if (a.L != b.L) throw std::invalid_argument("operator sizes differ");
    return (a.mat.adjoint() * b.mat).trace();
}

double sq_diff_norm(const DenseOperator& a, const DenseOperator& b) {
    if (a.L != b.L) throw std::invalid_argument("operator sizes differ");
    return (a.mat - b.mat).squaredNorm();
}

std::size_t BlockMask::entries() const {
    std::size_t n = 0;
    for (const auto& r : rects) n += r.rows.size() * r.cols.size();
    return n;
}

double masked_sq_norm(const DenseOperator& a, const BlockMask& mask) {
    if (a.L != mask.L) throw std::invalid_argument("operator/mask sizes differ");
    if (mask.entries() == 0) throw std::invalid_argument("empty mask");
    double acc = 0.0;
    for (const auto& r : mask.rects)
        for (std::size_t col : r.cols)
            for (std::size_t row : r.rows) acc += std::norm(a.mat(row, col));
    return acc;
}

double masked_sq_diff(const DenseOperator& a, const DenseOperator& b, const BlockMask& mask) {
    if (a.L != b.L || a.L != mask.L) throw std::invalid_argument("operator/mask sizes differ");
    if (mask.entries() == 0) throw std::invalid_argument("empty mask");
    double acc = 0.0;
    for (const auto& r : mask.rects)
        for (std::size_t col : r.cols)
            for (std::size_t row : r.rows)
                acc += std::norm(a.mat(row, col) - b.mat(row, col));
    return acc;
}

DenseOperator masked_copy(const DenseOperator& a, const BlockMask& mask) {
    if (a.L != mask.L) throw std::invalid_argument("operator/mask sizes differ");
    DenseOperator out;
    out.L = a.L;
    out.mat = Matrix::Zero(a.dim(), a.dim());
    for (const auto& r : mask.rects)
        for (std::size_t col : r.cols)
            for (std::size_t row : r.rows) out.mat(row, col) = a.mat(row, col);
    return out;
}

HermEig herm_eig(const Matrix& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("matrix not square");
    const double scale = std::max(1.0, h.norm());
    if ((h - h.adjoint()).norm() > 1e-10 * scale)
        throw std::invalid_argument("matrix not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    return HermEig{es.eigenvalues(), es.eigenvectors()};
}

UnitaryEig unitary_eig(const Matrix& u) {
    if (u.rows() != u.cols()) throw std::invalid_argument("matrix not square");
    const auto n = u.rows();
    const double dev = (u.adjoint() * u - Matrix::Identity(n, n)).norm();
    if (dev > 1e-8 * std::max(1.0, std::sqrt(static_cast<double>(n))))
        throw std::invalid_argument("matrix not unitary");
    Eigen::ComplexSchur<Matrix> schur(u, true);
    if (schur.info() != Eigen::Success) throw std::runtime_error("Schur decomposition failed");
    return UnitaryEig{schur.matrixT().diagonal(), schur.matrixU()};
}

Matrix herm_expi(const Matrix& h, double s) {
    const HermEig eig = herm_eig(h);
    const auto n = h.rows();
    Vector ph(n);
    for (Eigen::Index k = 0; k < n; ++k) ph[k] = std::exp(cplx{0.0, s * eig.evals[k]});
    return eig.evecs * ph.asDiagonal() * eig.evecs.adjoint();
}

namespace {

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw std::runtime_error("truncated file header");
    return v;
}

}  // namespace

void save_operator(const std::string& path, const DenseOperator& op) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_u64(os, static_cast<std::uint64_t>(op.L));
    const std::size_t n = op.dim();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const cplx v = op.mat(r, c);
            const double re = v.real(), im = v.imag();
            os.write(reinterpret_cast<const char*>(&re), sizeof(re));
            os.write(reinterpret_cast<const char*>(&im), sizeof(im));
        }
    if (!os) throw std::runtime_error("write failed: " + path);
}

DenseOperator load_operator(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    const int L = static_cast<int>(read_u64(is));
    if (L < 1 || L > kMaxOperatorQubits)
        throw resource_limit_error("operator size beyond dense ceiling");
    const std::size_t n = dim_of(L);
    DenseOperator op;
    op.L = L;
    op.mat.resize(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            double re = 0, im = 0;
            is.read(reinterpret_cast<char*>(&re), sizeof(re));
            is.read(reinterpret_cast<char*>(&im), sizeof(im));
            op.mat(r, c) = cplx{re, im};
        }
    if (!is) throw std::runtime_error("truncated operator payload: " + path);
    return op;
}

void save_state(const std::string& path, const StateVector& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_u64(os, static_cast<std::uint64_t>(s.L));
    for (std::size_t i = 0; i < s.dim(); ++i) {
        const double re = s.amp[i].real(), im = s.amp[i].imag();
        os.write(reinterpret_cast<const char*>(&re), sizeof(re));
        os.write(reinterpret_cast<const char*>(&im), sizeof(im));
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

StateVector load_state(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    const int L = static_cast<int>(read_u64(is));
    if (L < 1 || L > kMaxStateQubits)
        throw resource_limit_error("state size beyond dense ceiling");
    StateVector s;
    s.L = L;
    s.amp.resize(dim_of(L));
    for (std::size_t i = 0; i < s.dim(); ++i) {
        double re = 0, im = 0;
        is.read(reinterpret_cast<char*>(&re), sizeof(re));
        is.read(reinterpret_cast<char*>(&im), sizeof(im));
        s.amp[i] = cplx{re, im};
    }
    if (!is) throw std::runtime_error("truncated state payload: " + path);
    return s;
}

}  // namespace qcomp
