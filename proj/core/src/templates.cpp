#include <qcomp/templates.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qcomp {

namespace {

constexpr double kQuarterPi = 0.78539816339744830961;

AngleBinding fixed(double v) { return {-1, 0.0, v}; }

AngleBinding bound(int slot, double coeff, double offset = 0.0) { return {slot, coeff, offset}; }

GateInstance su2_inst(int q, AngleBinding a, AngleBinding b, AngleBinding c) {
    GateInstance g;
    g.kind = GateKind::Su2;
    g.qubits = {q, -1, -1};
    g.bind = {a, b, c};
    return g;
}

GateInstance cnot_inst(int control, int target) {
    GateInstance g;
    g.kind = GateKind::Cnot;
    g.qubits = {control, target, -1};
    return g;
}

GateInstance xxz2_inst(int qa, int qb, AngleBinding theta, AngleBinding phi) {
    GateInstance g;
    g.kind = GateKind::Xxz2;
    g.qubits = {qa, qb, -1};
    g.bind = {theta, phi, fixed(0.0)};
    return g;
}

std::vector<GateInstance> frame_layer(int L, double phi) {
    std::vector<GateInstance> layer;
    for (int j = 0; j < L; ++j) layer.push_back(su2_inst(j, fixed(0.0), fixed(phi), fixed(0.0)));
    return layer;
}

std::vector<GateInstance> cnot_half_layer(int L, int parity) {
    std::vector<GateInstance> layer;
    for (int j = parity; j < L; j += 2) layer.push_back(cnot_inst(j, (j + 1) % L));
    return layer;
}

std::vector<GateInstance> xxz_half_layer(int L, int parity, int theta_slot, int phi_slot) {
    // slot values follow the source convention theta = t/2, phi = t/4 per
    // simulated time t; the -1/2 coefficients realize the exact bond
    // exponential exp(-i t (XX+YY+ZZ/2)/4)
    std::vector<GateInstance> layer;
    for (int j = parity; j < L; j += 2)
        layer.push_back(
            xxz2_inst(j, (j + 1) % L, bound(theta_slot, -0.5), bound(phi_slot, -0.5)));
    return layer;
}

// period-4 parity pattern; mirrored rows share angles so adjacent rows of
// equal parity merge into a time-symmetric effective chain
int blocked_row_parity(int r) { return (r % 4 == 1 || r % 4 == 2) ? 1 : 0; }

void append_composite_rows(CircuitTemplate& tpl, const std::vector<SeqGate>& seq,
                           const std::vector<int>& parities, const std::vector<int>& slots,
                           bool qlm_triples) {
    const int L = tpl.L;
    for (std::size_t r = 0; r < parities.size(); ++r) {
        std::vector<std::array<int, 3>> triples;
        if (qlm_triples) {
            for (int m = parities[r]; m < L / 2; m += 2)
                triples.push_back({2 * m, 2 * m + 1, (2 * m + 2) % L});
        } else {
            for (int m = parities[r]; m < L; m += 2)
                triples.push_back({(m - 1 + L) % L, m, (m + 1) % L});
        }
        for (const SeqGate& sg : seq) {
            std::vector<GateInstance> layer;
            for (const auto& tr : triples) {
                if (sg.kind == GateKind::Cnot) {
                    layer.push_back(cnot_inst(tr[sg.qubits[0]], tr[sg.qubits[1]]));
                    continue;
                }
                GateInstance g = su2_inst(tr[sg.qubits[0]], fixed(sg.offset[0]),
                                          fixed(sg.offset[1]), fixed(sg.offset[2]));
                if (sg.coeff != 0.0) g.bind[0] = bound(slots[r], sg.coeff, sg.offset[0]);
                layer.push_back(g);
            }
            tpl.layers.push_back(std::move(layer));
        }
    }
}

void name_slots(CircuitTemplate& tpl, const std::vector<std::string>& stems) {
    for (std::size_t i = 0; i < tpl.param_count / stems.size(); ++i)
        for (const auto& stem : stems) tpl.slot_names.push_back(stem + "_" + std::to_string(i));
}

CircuitTemplate build_tivb(Arch arch, int L, int M, int cell) {
    CircuitTemplate tpl;
    tpl.arch = arch;
    tpl.L = L;
    tpl.M = M;
    tpl.param_count = static_cast<std::size_t>(2 * M + 1) * 3 * cell;
    tpl.cnot_count = static_cast<std::size_t>(M) * L;
    for (int k = 0; k <= 2 * M; ++k) {
        std::vector<GateInstance> layer;
        for (int j = 0; j < L; ++j) {
            const int base = k * 3 * cell + (j % cell) * 3;
            layer.push_back(su2_inst(j, bound(base, 1.0), bound(base + 1, 1.0),
                                     bound(base + 2, 1.0)));
        }
        tpl.layers.push_back(std::move(layer));
        if (k < 2 * M) tpl.layers.push_back(cnot_half_layer(L, k % 2));
        for (int c = 0; c < cell; ++c) {
            const std::string stem = "l" + std::to_string(k) + ".c" + std::to_string(c);
            tpl.slot_names.push_back(stem + ".theta");
            tpl.slot_names.push_back(stem + ".phi");
            tpl.slot_names.push_back(stem + ".chi");
        }
    }
    return tpl;
}

CircuitTemplate build_blocked_xxz(int L, int M) {
    CircuitTemplate tpl;
    tpl.arch = Arch::BlockedXxz;
    tpl.L = L;
    tpl.M = M;
    tpl.model = ModelKind::Xxz;
    tpl.param_count = static_cast<std::size_t>(2 * M);
    tpl.cnot_count = static_cast<std::size_t>(3 * M) * L;
    for (int i = 0; i < M; ++i) {
        tpl.layers.push_back(xxz_half_layer(L, 0, 2 * i, 2 * i + 1));
        tpl.layers.push_back(xxz_half_layer(L, 1, 2 * i, 2 * i + 1));
    }
    name_slots(tpl, {"theta", "phi"});
    return tpl;
}

CircuitTemplate build_pxp_rows(int L, const std::vector<int>& parities,
                               const std::vector<int>& slots, std::size_t param_count) {
    CircuitTemplate tpl;
    tpl.arch = Arch::BlockedPxp;
    tpl.L = L;
    tpl.model = ModelKind::Pxp;
    tpl.param_count = param_count;
    tpl.layers.push_back(frame_layer(L, kQuarterPi));
    append_composite_rows(tpl, pxp_block_subcircuit(), parities, slots, false);
    tpl.layers.push_back(frame_layer(L, -kQuarterPi));
    name_slots(tpl, {"theta"});
    return tpl;
}

CircuitTemplate build_qlm_rows(int L, const std::vector<int>& parities,
                               const std::vector<int>& slots, std::size_t param_count) {
    CircuitTemplate tpl;
    tpl.arch = Arch::BlockedQlm;
    tpl.L = L;
    tpl.model = ModelKind::Qlm;
    tpl.param_count = param_count;
    append_composite_rows(tpl, qlm_gauge_subcircuit(), parities, slots, true);
    name_slots(tpl, {"theta"});
    return tpl;
}

std::vector<int> mirrored_slots(int rows) {
    std::vector<int> slots(rows);
    for (int r = 0; r < rows; ++r) slots[r] = std::min(r, rows - 1 - r);
    return slots;
}

}  // namespace

const char* arch_name(Arch a) {
    switch (a) {
        case Arch::Tivb2: return "TIVB2";
        case Arch::Tivb4: return "TIVB4";
        case Arch::BlockedXxz: return "BLOCKED_XXZ";
        case Arch::BlockedPxp: return "BLOCKED_PXP";
        case Arch::BlockedQlm: return "BLOCKED_QLM";
        case Arch::Trotter1: return "TROTTER1";
        case Arch::Trotter2: return "TROTTER2";
    }
    throw std::logic_error("unreachable arch");
}

Arch arch_from_name(const std::string& name) {
    for (Arch a : {Arch::Tivb2, Arch::Tivb4, Arch::BlockedXxz, Arch::BlockedPxp,
                   Arch::BlockedQlm, Arch::Trotter1, Arch::Trotter2})
        if (name == arch_name(a)) return a;
    throw std::invalid_argument("unknown architecture: " + name);
}

CircuitTemplate build_template(Arch arch, int L, int M) {
    if (L < 4 || L % 2 != 0) throw std::invalid_argument("templates need even L >= 4");
    if ((arch == Arch::Tivb4 || arch == Arch::BlockedQlm) && L % 4 != 0)
        throw std::invalid_argument("4-site unit cell needs L divisible by 4");
    switch (arch) {
        case Arch::Tivb2:
            if (M < 0) throw std::invalid_argument("TIVB needs M >= 0");
            return build_tivb(arch, L, M, 2);
        case Arch::Tivb4:
            if (M < 0) throw std::invalid_argument("TIVB needs M >= 0");
            return build_tivb(arch, L, M, 4);
        case Arch::BlockedXxz:
            if (M < 1) throw std::invalid_argument("blocked templates need M >= 1");
            return build_blocked_xxz(L, M);
        case Arch::BlockedPxp: {
            if (M < 4 || M % 4 != 0)
                throw std::invalid_argument("BLOCKED_PXP needs M mod 4 = 0, M >= 4");
            const int rows = M / 2;
            std::vector<int> parities(rows);
            for (int r = 0; r < rows; ++r) parities[r] = blocked_row_parity(r);
            CircuitTemplate tpl = build_pxp_rows(L, parities, mirrored_slots(rows), M / 4);
            tpl.M = M;
            tpl.cnot_count = static_cast<std::size_t>(M) * L;
            return tpl;
        }
        case Arch::BlockedQlm: {
            if (M < 1) throw std::invalid_argument("blocked templates need M >= 1");
            const int rows = 2 * M;
            std::vector<int> parities(rows);
            for (int r = 0; r < rows; ++r) parities[r] = blocked_row_parity(r);
            CircuitTemplate tpl = build_qlm_rows(L, parities, mirrored_slots(rows), M);
            tpl.M = M;
            tpl.cnot_count = static_cast<std::size_t>(6 * M) * L;
            return tpl;
        }
        case Arch::Trotter1:
        case Arch::Trotter2:
            throw std::invalid_argument("Trotter templates come from build_trotter");
    }
    throw std::logic_error("unreachable arch");
}

std::pair<CircuitTemplate, std::vector<double>> build_trotter(ModelKind model, int L, int order,
                                                              int steps, double t) {
    validate({model, L});
    if (L < 4) throw std::invalid_argument("templates need even L >= 4");
    if (steps < 1) throw std::invalid_argument("trotter needs steps >= 1");
    if (!std::isfinite(t)) throw std::invalid_argument("trotter time must be finite");
    if (order != 1 && order != 2) throw std::invalid_argument("trotter order must be 1 or 2");

    const double dt = t / steps;
    CircuitTemplate tpl;
    std::vector<double> params;

    if (order == 1) {
        switch (model) {
            case ModelKind::Xxz:
                tpl = build_template(Arch::BlockedXxz, L, steps);
                for (int i = 0; i < steps; ++i) {
                    params.push_back(dt / 2);
                    params.push_back(dt / 4);
                }
                break;
            case ModelKind::Pxp:
                tpl = build_template(Arch::BlockedPxp, L, 4 * steps);
                params.assign(steps, t / (4 * steps));
                break;
            case ModelKind::Qlm:
                tpl = build_template(Arch::BlockedQlm, L, steps);
                params.assign(steps, t / (8 * steps));
                break;
        }
        tpl.arch = Arch::Trotter1;
    } else {
        const int rows = 2 * steps + 1;
        std::vector<int> parities(rows);
        for (int r = 0; r < rows; ++r) parities[r] = r % 2;
        const std::vector<int> slots = mirrored_slots(rows);
        switch (model) {
            case ModelKind::Xxz: {
                tpl.L = L;
                tpl.param_count = static_cast<std::size_t>(2 * (steps + 1));
                for (int r = 0; r < rows; ++r)
                    tpl.layers.push_back(xxz_half_layer(L, parities[r], 2 * slots[r],
                                                        2 * slots[r] + 1));
                name_slots(tpl, {"theta", "phi"});
                tpl.model = ModelKind::Xxz;
                tpl.M = steps;
                tpl.cnot_count = static_cast<std::size_t>(rows) * 3 * (L / 2);
                params.push_back(dt / 4);
                params.push_back(dt / 8);
                for (int k = 1; k <= steps; ++k) {
                    params.push_back(dt / 2);
                    params.push_back(dt / 4);
                }
                break;
            }
            case ModelKind::Pxp: {
                tpl = build_pxp_rows(L, parities, slots, steps + 1);
                tpl.M = 4 * steps + 2;
                tpl.cnot_count = static_cast<std::size_t>(rows) * 2 * L;
                params.assign(steps + 1, dt / 4);
                params[0] = dt / 8;
                break;
            }
            case ModelKind::Qlm: {
                tpl = build_qlm_rows(L, parities, slots, steps + 1);
                tpl.M = steps;
                tpl.cnot_count = static_cast<std::size_t>(rows) * 3 * L;
                params.assign(steps + 1, dt / 8);
                params[0] = dt / 16;
                break;
            }
        }
        tpl.arch = Arch::Trotter2;
    }
    tpl.model = model;
    tpl.order = order;
    tpl.steps = steps;
    tpl.t = t;
    return {std::move(tpl), std::move(params)};
}

std::vector<double> init_params(const CircuitTemplate& tpl, std::uint64_t seed) {
    std::vector<double> params(tpl.param_count, 0.0);
    if (tpl.arch == Arch::Tivb2 || tpl.arch == Arch::Tivb4) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-0.01, 0.01);
        for (double& p : params) p = dist(rng);
    }
    return params;
}

std::array<double, 3> resolve_angles(const GateInstance& g, const std::vector<double>& params) {
    std::array<double, 3> a{0.0, 0.0, 0.0};
    for (int i = 0; i < gate_angle_count(g.kind); ++i) {
        const AngleBinding& b = g.bind[i];
        a[i] = b.slot >= 0 ? b.coeff * params[b.slot] + b.offset : b.offset;
    }
    return a;
}

std::vector<int> instance_qubits(const GateInstance& g) {
    std::vector<int> qs;
    for (int i = 0; i < gate_arity(g.kind); ++i) qs.push_back(g.qubits[i]);
    return qs;
}

void check_params(const CircuitTemplate& tpl, const std::vector<double>& params) {
    if (params.size() != tpl.param_count)
        throw std::invalid_argument("parameter vector length does not match template");
}

DenseOperator evaluate(const CircuitTemplate& tpl, const std::vector<double>& params) {
    check_params(tpl, params);
    DenseOperator c = identity_op(tpl.L);
    for (const auto& layer : tpl.layers)
        for (const GateInstance& g : layer) {
            if (g.kind == GateKind::Cnot) {
                apply_cnot_left(c, g.qubits[0], g.qubits[1]);
                continue;
            }
            apply_gate_left(c, gate_matrix(g.kind, resolve_angles(g, params)), instance_qubits(g));
        }
    return c;
}

StateVector evaluate_state(const CircuitTemplate& tpl, const std::vector<double>& params,
                           const StateVector& psi) {
    check_params(tpl, params);
    if (psi.L != tpl.L) throw std::invalid_argument("state size does not match template");
    StateVector s = psi;
    for (const auto& layer : tpl.layers)
        for (const GateInstance& g : layer) {
            if (g.kind == GateKind::Cnot) {
                apply_cnot(s, g.qubits[0], g.qubits[1]);
                continue;
            }
            apply_gate(s, gate_matrix(g.kind, resolve_angles(g, params)), instance_qubits(g));
        }
    return s;
}

std::pair<CircuitTemplate, std::vector<double>> stack(const CircuitTemplate& tpl,
                                                      const std::vector<double>& params, int n) {
    check_params(tpl, params);
    if (n < 1) throw std::invalid_argument("stack needs n >= 1");
    if (n == 1) return {tpl, params};
    CircuitTemplate out = tpl;
    out.copies = tpl.copies * n;
    out.param_count = tpl.param_count * n;
    out.cnot_count = tpl.cnot_count * n;
    out.layers.clear();
    out.slot_names.clear();
    std::vector<double> values;
    for (int c = 0; c < n; ++c) {
        const int offset = static_cast<int>(c * tpl.param_count);
        for (const auto& layer : tpl.layers) {
            std::vector<GateInstance> shifted = layer;
            for (GateInstance& g : shifted)
                for (AngleBinding& b : g.bind)
                    if (b.slot >= 0) b.slot += offset;
            out.layers.push_back(std::move(shifted));
        }
        for (const auto& name : tpl.slot_names)
            out.slot_names.push_back("s" + std::to_string(c) + "." + name);
        values.insert(values.end(), params.begin(), params.end());
    }
    return {std::move(out), std::move(values)};
}

CircuitTemplate lift_size(const CircuitTemplate& tpl, int L_large) {
    if (tpl.copies != 1) throw std::invalid_argument("cannot lift a stacked circuit");
    if (tpl.order > 0)
        return build_trotter(*tpl.model, L_large, tpl.order, tpl.steps, tpl.t).first;
    return build_template(tpl.arch, L_large, tpl.M);
}

std::string template_json(const CircuitTemplate& tpl, const std::vector<double>& params) {
    check_params(tpl, params);
    nlohmann::json j;
    j["arch"] = arch_name(tpl.arch);
    j["L"] = tpl.L;
    j["M"] = tpl.M;
    if (tpl.model) j["model"] = model_name(*tpl.model);
    j["order"] = tpl.order;
    j["steps"] = tpl.steps;
    j["t"] = tpl.t;
    j["copies"] = tpl.copies;
    j["slots"] = tpl.slot_names;
    j["values"] = params;
    return j.dump(2);
}

std::pair<CircuitTemplate, std::vector<double>> template_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad template json: ") + e.what());
    }
    try {
        const Arch arch = arch_from_name(j.at("arch").get<std::string>());
        const int L = j.at("L").get<int>();
        const int order = j.value("order", 0);
        CircuitTemplate tpl;
        if (order > 0)
            tpl = build_trotter(model_from_name(j.at("model").get<std::string>()), L, order,
                                j.at("steps").get<int>(), j.at("t").get<double>())
                      .first;
        else
            tpl = build_template(arch, L, j.at("M").get<int>());
        if (tpl.arch != arch) throw std::invalid_argument("template json arch mismatch");
        const int copies = j.value("copies", 1);
        if (copies > 1)
            tpl = stack(tpl, std::vector<double>(tpl.param_count, 0.0), copies).first;
        auto values = j.at("values").get<std::vector<double>>();
        check_params(tpl, values);
        return {std::move(tpl), std::move(values)};
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad template json: ") + e.what());
    }
}

}  // namespace qcomp
