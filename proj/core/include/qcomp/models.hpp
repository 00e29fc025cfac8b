#pragma once

#include <string>
#include <vector>

#include "qcomp/tensor.hpp"

namespace qcomp {

enum class ModelKind { Xxz, Pxp, Qlm };

std::string model_name(ModelKind kind);
ModelKind model_from_name(const std::string& name);

// Validated (model, size) pair. XXZ needs even L >= 2, PXP even L >= 4,
// QLM needs L divisible by 4 (matter on even qubits, gauge links on odd).
struct ModelSpec {
    ModelKind kind;
    int L;
};

void validate(const ModelSpec& spec);

DenseOperator hamiltonian(const ModelSpec& spec);

// U(t) = V exp(-i lambda t) V^dagger from dense diagonalization. The
// eigendecomposition is cached per (kind, L) for small sizes.
DenseOperator exact_propagator(const ModelSpec& spec, double t);

// Conserved charges as dense operators: XXZ has the single total spin-z,
// PXP one frozen-pair projector per bond (eigenvalues {0,1}), QLM one
// gauge charge per matter site (eigenvalues {0,+-1,+-2}).
std::vector<DenseOperator> charges(const ModelSpec& spec);

// Diagonal values of every charge for each basis state, charge-major:
// diag[c][b] is charge c evaluated on basis state b.
std::vector<std::vector<double>> charge_diagonals(const ModelSpec& spec);

struct Sector {
    std::vector<double> label;   // joint charge eigenvalues, charge order
    std::vector<int> indices;    // basis states, ascending
};

// Basis states grouped by joint charge label. Sectors are ordered by size
// descending; equal sizes prefer the all-zero label, then the smallest
// contained basis index.
struct SectorTable {
    int L = 0;
    std::vector<Sector> sectors;

    const Sector& largest() const { return sectors.front(); }

    BlockMask mask_d1() const;  // largest diagonal block
    BlockMask mask_dr() const;  // remaining diagonal blocks
    BlockMask mask_o1() const;  // off-diagonal rectangles touching the largest block
    BlockMask mask_or() const;  // off-diagonal between the remaining blocks
    BlockMask mask_full() const;
};

SectorTable sector_table(const ModelSpec& spec);

std::string sector_table_json(const SectorTable& table);

// name: NEEL = |1010...> (up = 1); NEEL_QLM = staggered matter, gauge down.
StateVector named_state(const ModelSpec& spec, const std::string& name);

}  // namespace qcomp
