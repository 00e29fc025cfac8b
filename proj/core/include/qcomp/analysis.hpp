#pragma once

#include "qcomp/compressor.hpp"

#include <map>
#include <string>
#include <vector>

// Physics diagnostics on circuits and exact propagators: staggered
// magnetization, gauge string order, block-projected OTOC lightcones,
// entrywise error maps, restricted distances, eigenstate overlaps and
// size-transfer reports.

namespace qcomp {

// Sum_j (-1)^j <sigma^z_j> with j counted from 0 and up = +1, so the Neel
// state |1010...> gives +L.
double imbalance(const StateVector& s);

// Mean gauge-spin <s^z>, i.e. the sum over odd qubits divided by the L/2
// gauge links; the staggered-matter vacuum gives -1.
double string_order(const ModelSpec& spec, const StateVector& s);

struct ObservableSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::string provenance;  // "circuit" or "exact"
};

// Applies `step` repeatedly on a unit time grid (n_times points, t = 0
// included) and records the observable.
ObservableSeries imbalance_series(const DenseOperator& step, const StateVector& initial,
                                  int n_times, const std::string& provenance);
ObservableSeries string_order_series(const ModelSpec& spec, const DenseOperator& step,
                                     const StateVector& initial, int n_times,
                                     const std::string& provenance);

struct OtocGrid {
    int i = 0;                 // probe site
    std::vector<int> sites;    // j grid, all chain sites
    std::vector<double> times; // 0, 1, ..., n_times-1 step applications
    std::vector<std::vector<double>> values;  // values[time][site]
};

// C_{i,j}(n) = ||P [Z_i(n), Z_j] P||_F^2 / dim(block) with Z_i(n) =
// (step^n)^dag Z_i step^n and P the projector on `block`. Both sigma^z are
// diagonal, so only the block rows/columns of Z_i(n) enter; they are evolved
// as block columns of step^n. i < 0 selects the middle site L/2.
OtocGrid otoc_grid(const DenseOperator& step, const Sector& block, int n_times, int i = -1);

// Entrywise |C_ij - U_ij|^2; its total over 2^{L+1} equals epsilon.
Eigen::MatrixXd error_map(const DenseOperator& c, const DenseOperator& u);

struct RestrictedDistances {
    double d1 = 0.0;
    double dr = 0.0;
    double o1 = 0.0;
    double or_ = 0.0;
};

// The four masked distances of the sector split; an empty mask (single-sector
// models) contributes zero. Weighted recombination
// sum_X 2 sqrt(N_e(X)) eps_X = 2^{L+1} eps holds exactly.
RestrictedDistances restricted_distance_report(const DenseOperator& c, const DenseOperator& u,
                                               const SectorTable& table);

struct EigenOverlap {
    double phase = 0.0;    // arg of the unitary eigenvalue, in (-pi, pi]
    double overlap = 0.0;  // |<eigenvector|ref>|
};

// Spectral overlaps of a unitary against a reference state, sorted by phase.
// Restricted to L <= 10; the orthonormal Schur basis keeps the squared
// overlaps summing to 1.
std::vector<EigenOverlap> eigen_overlaps(const DenseOperator& op, const StateVector& ref);

// Sum of the distinct free angles of a PXP-row circuit (each optimizable slot
// counted once even where time-inversion symmetry reuses it); order-1 Trotter
// parameters at time t sum to exactly t/4.
double angle_sum_diagnostic(const CircuitTemplate& tpl, const std::vector<double>& params);

// Rebuilds the template at each size and evaluates epsilon against the exact
// propagator there; parameter vectors transfer unchanged.
std::map<int, double> size_extrapolation_report(const CircuitTemplate& tpl,
                                                const std::vector<double>& params,
                                                ModelKind model, double t,
                                                const std::vector<int>& sizes);

struct ReportMeta {
    int L = 0;
    int M = 0;
    std::string arch;
    double epsilon = 0.0;
};

// CSV emission, %.17g throughout so reruns are byte-identical.
void write_series_csv(const ObservableSeries& series, const ReportMeta& meta,
                      const std::string& path);
void write_otoc_csv(const OtocGrid& grid, const std::string& path);
void write_error_map_csv(const Eigen::MatrixXd& map, const std::string& path);

}  // namespace qcomp
