#pragma once

#include "qcomp/gates.hpp"
#include "qcomp/models.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Circuit families with translation-invariant parameter sharing: brickwall
// templates with free single-qubit gates (TIVB2/TIVB4), charge- and
// constraint-preserving blocked templates (BLOCKED_XXZ/PXP/QLM), and fixed
// Trotter reference circuits built on the same layouts.

namespace qcomp {

enum class Arch {
    Tivb2,
    Tivb4,
    BlockedXxz,
    BlockedPxp,
    BlockedQlm,
    Trotter1,
    Trotter2,
};

const char* arch_name(Arch a);
Arch arch_from_name(const std::string& name);

// angle = coeff * params[slot] + offset; slot < 0 means a constant angle.
struct AngleBinding {
    int slot = -1;
    double coeff = 0.0;
    double offset = 0.0;
};

struct GateInstance {
    GateKind kind = GateKind::Cnot;
    std::array<int, 3> qubits{-1, -1, -1};
    std::array<AngleBinding, 3> bind{};
};

// Gates grouped into ordered half-layers; layers.front() is applied first.
// cnot_count follows the two-qubit-gate accounting of the source circuits
// (an xxz2 gate counts as 3 CNOTs, a gauge composite as 12), so it can
// exceed the number of literal CNOT instances.
struct CircuitTemplate {
    Arch arch = Arch::Tivb2;
    int L = 0;
    int M = 0;
    std::optional<ModelKind> model;
    int order = 0;
    int steps = 0;
    double t = 0.0;
    int copies = 1;
    std::size_t param_count = 0;
    std::size_t cnot_count = 0;
    std::vector<std::vector<GateInstance>> layers;
    std::vector<std::string> slot_names;
};

// Parametrized architectures only; Trotter references come from
// build_trotter. M counts brickwall layers for TIVB and blocked layers
// otherwise (BLOCKED_PXP needs M mod 4 = 0 and owns M/4 free angles).
CircuitTemplate build_template(Arch arch, int L, int M);

// Fixed-angle Trotterization of the model propagator at time t. Order 1
// reuses the blocked layout with uniform steps; order 2 uses the symmetric
// 2*steps+1 chain with halved boundary angles.
std::pair<CircuitTemplate, std::vector<double>> build_trotter(ModelKind model, int L, int order,
                                                              int steps, double t);

// Near-identity start: uniform(-0.01, 0.01) angles for TIVB templates,
// exact zeros (identity circuit) for blocked layouts.
std::vector<double> init_params(const CircuitTemplate& tpl, std::uint64_t seed);

// Shared by evaluation and the gradient sweep: concrete gate angles of one
// instance, its qubit list, and the parameter-length check.
std::array<double, 3> resolve_angles(const GateInstance& g, const std::vector<double>& params);
std::vector<int> instance_qubits(const GateInstance& g);
void check_params(const CircuitTemplate& tpl, const std::vector<double>& params);

DenseOperator evaluate(const CircuitTemplate& tpl, const std::vector<double>& params);
StateVector evaluate_state(const CircuitTemplate& tpl, const std::vector<double>& params,
                           const StateVector& psi);

// n repetitions of the circuit; slots of copy c are offset by c*param_count
// and the returned values tile the input, so evaluation equals the n-th
// operator power.
std::pair<CircuitTemplate, std::vector<double>> stack(const CircuitTemplate& tpl,
                                                      const std::vector<double>& params, int n);

// Same architecture rebuilt at a larger size; the slot layout is size
// independent so existing parameter vectors apply unchanged.
CircuitTemplate lift_size(const CircuitTemplate& tpl, int L_large);

std::string template_json(const CircuitTemplate& tpl, const std::vector<double>& params);
std::pair<CircuitTemplate, std::vector<double>> template_from_json(const std::string& text);

}  // namespace qcomp
