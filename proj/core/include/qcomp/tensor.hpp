#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Dense state-vector / dense-operator layer for short periodic qubit chains.
//
// Basis convention, used everywhere downstream: a basis index b holds qubit j
// in bit (L-1-j), so qubit 0 is the most significant bit. Bit value 1 means
// spin up (sigma^z eigenvalue +1), bit value 0 spin down. In this index
// ordering sigma^z = diag(-1, +1).

namespace qcomp {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMaxOperatorQubits = 14;
inline constexpr int kMaxStateQubits = 20;

// Thrown when a request exceeds the dense-storage ceilings above; the CLI
// maps it to its resource-ceiling exit code.
struct resource_limit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::size_t dim_of(int L) { return std::size_t{1} << L; }

// Stride of qubit j inside a basis index.
inline std::size_t qubit_stride(int L, int j) { return std::size_t{1} << (L - 1 - j); }

inline int bit_of(std::size_t basis, int L, int j) {
    return static_cast<int>((basis >> (L - 1 - j)) & 1u);
}

struct StateVector {
    int L = 0;
    Vector amp;

    std::size_t dim() const { return static_cast<std::size_t>(amp.size()); }
};

struct DenseOperator {
    int L = 0;
    Matrix mat;

    std::size_t dim() const { return static_cast<std::size_t>(mat.rows()); }
};

StateVector zero_state(int L);                    // |00...0>
StateVector basis_state(int L, std::size_t idx);
DenseOperator identity_op(int L);
DenseOperator make_operator(int L, Matrix m);

// Applies a k-qubit gate (k <= 3). `qubits` lists distinct chain positions;
// qubits[0] is the most significant bit of the 2^k-dim gate index. The gate
// matrix is addressed row-major in that local basis.
void apply_gate(StateVector& s, const Matrix& gate, const std::vector<int>& qubits);

// Left-multiplies: op <- embed(gate) * op.
void apply_gate_left(DenseOperator& op, const Matrix& gate, const std::vector<int>& qubits);

// CNOT is a basis permutation, so it gets a dedicated arithmetic-free path:
// wherever the control bit is set, the target bit is flipped.
void apply_cnot(StateVector& s, int control, int target);
void apply_cnot_left(DenseOperator& op, int control, int target);

// Partial contraction used by the gradient sweep. Returns the 2^k x 2^k matrix
//   Theta[a][b] = sum_{rest, z} A[(a,rest), z] * conj(Y[(b,rest), z]),
// i.e. the gate-local block of A * Y^dag traced over the other qubits.
Matrix local_env(const DenseOperator& A, const DenseOperator& Y, const std::vector<int>& qubits);

// Tr[a^dag b].
cplx frob_inner(const DenseOperator& a, const DenseOperator& b);

// ||a - b||_F^2.
double sq_diff_norm(const DenseOperator& a, const DenseOperator& b);

// A set of index rectangles (row set x column set). Rectangles must be
// pairwise disjoint; the block-structure builders guarantee that.
struct BlockMask {
    struct Rect {
        std::vector<std::size_t> rows;
        std::vector<std::size_t> cols;
    };
    int L = 0;
    std::vector<Rect> rects;

    std::size_t entries() const;
};

// sum over masked entries of |a_ij|^2. Throws on an empty mask.
double masked_sq_norm(const DenseOperator& a, const BlockMask& mask);

// sum over masked entries of |a_ij - b_ij|^2. Throws on an empty mask.
double masked_sq_diff(const DenseOperator& a, const DenseOperator& b, const BlockMask& mask);

// b_ij = a_ij on the mask, 0 elsewhere.
DenseOperator masked_copy(const DenseOperator& a, const BlockMask& mask);

struct HermEig {
    Eigen::VectorXd evals;  // ascending
    Matrix evecs;           // columns
};

// Dense Hermitian eigendecomposition; throws std::invalid_argument if the
// input is not Hermitian to 1e-10 (relative to its norm).
HermEig herm_eig(const Matrix& h);

struct UnitaryEig {
    Vector phases;  // eigenvalues on the unit circle
    Matrix evecs;   // orthonormal columns
};

// Eigendecomposition of a unitary matrix via a Schur form, which keeps the
// eigenvector basis orthonormal even for (near-)degenerate phases. Throws
// std::invalid_argument if the input is not unitary to 1e-8.
UnitaryEig unitary_eig(const Matrix& u);

// exp(i s H) for Hermitian H (spectral form).
Matrix herm_expi(const Matrix& h, double s);

// Binary layout (documented in docs/FORMATS.md): 8-byte little-endian qubit
// count, then (real, imag) float64 pairs in row-major order.
void save_operator(const std::string& path, const DenseOperator& op);
DenseOperator load_operator(const std::string& path);
void save_state(const std::string& path, const StateVector& s);
StateVector load_state(const std::string& path);

}  // namespace qcomp
