#pragma once

#include "qcomp/tensor.hpp"

#include <array>

// Parametrized elementary gates, their analytic angle derivatives, and the
// composite three-qubit sub-circuits used by the constrained templates.

namespace qcomp {

enum class GateKind { Su2, Xxz2, Cnot };

int gate_arity(GateKind k);
int gate_angle_count(GateKind k);

// su2(theta, phi, chi) = [[ e^{i phi} cos theta,  e^{i chi} sin theta],
//                         [-e^{-i chi} sin theta, e^{-i phi} cos theta]]
Matrix su2(double theta, double phi, double chi);

// Entrywise derivative with respect to angle `which` (0=theta, 1=phi, 2=chi).
Matrix su2_deriv(double theta, double phi, double chi, int which);

// xxz2(theta, phi) = exp(i theta (XX + YY) + i phi ZZ); conserves total
// sigma^z exactly.
Matrix xxz2(double theta, double phi);
Matrix xxz2_deriv(double theta, double phi, int which);

Matrix cnot();

// Uniform dispatch used by circuit evaluation; `angles` uses the first
// gate_angle_count(k) entries.
Matrix gate_matrix(GateKind k, const std::array<double, 3>& angles);
Matrix gate_deriv(GateKind k, const std::array<double, 3>& angles, int which);

// One gate of a three-qubit composite. The first angle of a parametrized gate
// is coeff * theta + offset[0]; remaining angles are offsets. For CNOT,
// qubits[0] is the control and qubits[1] the target.
struct SeqGate {
    GateKind kind;
    std::array<int, 3> qubits{-1, -1, -1};
    double coeff = 0.0;
    std::array<double, 3> offset{0.0, 0.0, 0.0};
};

// Conditional rotation for the blocked PXP template, on local qubits
// (0=left, 1=middle, 2=right). The product applies u(4*theta,0,0) to the
// middle qubit when both outer qubits are down and is the identity whenever
// either outer qubit is up; outer qubits are never changed. Equivalently it
// is exp(-i 4 theta P (x) Y (x) P) with P the down projector.
std::vector<SeqGate> pxp_block_subcircuit();

// Matter-gauge-matter coupling for the blocked QLM template, on local qubits
// (0=left matter, 1=gauge, 2=right matter). The product equals
// exp(-i 8 theta h) with h = -(sigma^+ s^+ sigma^- + h.c.), so theta = t/8
// realizes the local propagator exactly.
std::vector<SeqGate> qlm_gauge_subcircuit();

// Dense 8x8 product of a three-qubit sequence at a given theta, first
// element applied first.
Matrix sequence_matrix(const std::vector<SeqGate>& seq, double theta);

}  // namespace qcomp
