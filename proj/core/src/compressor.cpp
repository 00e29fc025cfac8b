#include "qcomp/compressor.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace qcomp {

namespace {

constexpr double kAbortCost = 2.5;

double dim_d(int L) { return static_cast<double>(dim_of(L)); }

void check_sizes(const CircuitTemplate& tpl, const std::vector<double>& params,
                 const DenseOperator& u) {
    check_params(tpl, params);
    if (tpl.L != u.L) throw std::invalid_argument("template and target operator sizes differ");
}

std::vector<const GateInstance*> flatten(const CircuitTemplate& tpl) {
    std::vector<const GateInstance*> gates;
    for (const auto& layer : tpl.layers)
        for (const GateInstance& g : layer) gates.push_back(&g);
    return gates;
}

bool has_bound_angle(const GateInstance& g) {
    for (int i = 0; i < gate_angle_count(g.kind); ++i)
        if (g.bind[i].slot >= 0 && g.bind[i].coeff != 0.0) return true;
    return false;
}

struct CostGrad {
    double value = 0.0;
    std::vector<double> grad;
};

// One forward pass builds C; the backward pass strips gates from the
// accumulated prefix A while absorbing them into the target side R, so the
// gate-local environment local_env(R, A) contracts against each angle
// derivative. R starts as U for the plain cost and as the masked residual
// C - U for the restricted one.
CostGrad cost_and_gradient(const CircuitTemplate& tpl, const std::vector<double>& params,
                           const DenseOperator& u, const BlockMask* mask) {
    check_sizes(tpl, params, u);
    const std::vector<const GateInstance*> gates = flatten(tpl);

    DenseOperator c = identity_op(tpl.L);
    for (const GateInstance* g : gates) {
        if (g->kind == GateKind::Cnot) {
            apply_cnot_left(c, g->qubits[0], g->qubits[1]);
            continue;
        }
        apply_gate_left(c, gate_matrix(g->kind, resolve_angles(*g, params)),
                        instance_qubits(*g));
    }

    CostGrad out;
    out.grad.assign(tpl.param_count, 0.0);
    DenseOperator r;
    double scale = 0.0;
    if (mask == nullptr) {
        out.value = 1.0 - frob_inner(c, u).real() / dim_d(tpl.L);
        r = u;
        scale = -1.0 / dim_d(tpl.L);
    } else {
        DenseOperator diff{tpl.L, c.mat - u.mat};
        r = masked_copy(diff, *mask);
        const double ne = static_cast<double>(mask->entries());
        out.value = masked_sq_norm(diff, *mask) / (2.0 * std::sqrt(ne));
        scale = 1.0 / std::sqrt(ne);
    }

    DenseOperator a = c;
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
        const GateInstance& g = **it;
        if (g.kind == GateKind::Cnot) {
            apply_cnot_left(a, g.qubits[0], g.qubits[1]);
            apply_cnot_left(r, g.qubits[0], g.qubits[1]);
            continue;
        }
        const std::array<double, 3> angles = resolve_angles(g, params);
        const std::vector<int> qs = instance_qubits(g);
        const Matrix gadj = gate_matrix(g.kind, angles).adjoint();
        apply_gate_left(a, gadj, qs);
        if (has_bound_angle(g)) {
            const Matrix env = local_env(r, a, qs);
            for (int i = 0; i < gate_angle_count(g.kind); ++i) {
                const AngleBinding& b = g.bind[i];
                if (b.slot < 0 || b.coeff == 0.0) continue;
                const cplx tr = gate_deriv(g.kind, angles, i).conjugate().cwiseProduct(env).sum();
                out.grad[static_cast<std::size_t>(b.slot)] += b.coeff * scale * tr.real();
            }
        }
        apply_gate_left(r, gadj, qs);
    }
    return out;
}

// Caches the fused cost/gradient evaluation so Adam's value and grad calls at
// the same point cost one sweep.
struct CachedCost {
    const CircuitTemplate* tpl;
    const DenseOperator* u;
    const BlockMask* mask;
    std::vector<double> at;
    CostGrad last;
    bool filled = false;

    const CostGrad& ensure(const std::vector<double>& params) {
        if (!filled || params != at) {
            last = cost_and_gradient(*tpl, params, *u, mask);
            at = params;
            filled = true;
        }
        return last;
    }
};

std::string format_g(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

BlockMask mask_union(const BlockMask& a, const BlockMask& b) {
    BlockMask m = a;
    m.rects.insert(m.rects.end(), b.rects.begin(), b.rects.end());
    return m;
}

}  // namespace

void validate(const AdamHyperparams& h) {
    if (!(h.lambda > 0.0)) throw std::invalid_argument("adam: lambda must be positive");
    if (!(h.beta1 > 0.0 && h.beta1 < 1.0)) throw std::invalid_argument("adam: beta1 outside (0,1)");
    if (!(h.beta2 > 0.0 && h.beta2 < 1.0)) throw std::invalid_argument("adam: beta2 outside (0,1)");
    if (!(h.delta > 0.0)) throw std::invalid_argument("adam: delta must be positive");
    if (h.iters < 0) throw std::invalid_argument("adam: negative iteration count");
}

double epsilon(const DenseOperator& c, const DenseOperator& u) {
    if (c.L != u.L) throw std::invalid_argument("epsilon: operator sizes differ");
    return 1.0 - frob_inner(c, u).real() / dim_d(c.L);
}

double epsilon(const CircuitTemplate& tpl, const std::vector<double>& params,
               const DenseOperator& u) {
    check_sizes(tpl, params, u);
    return epsilon(evaluate(tpl, params), u);
}

double epsilon_restricted(const DenseOperator& c, const DenseOperator& u, const BlockMask& mask) {
    if (c.L != u.L) throw std::invalid_argument("epsilon_restricted: operator sizes differ");
    const double ne = static_cast<double>(mask.entries());
    return masked_sq_diff(c, u, mask) / (2.0 * std::sqrt(ne));
}

double epsilon_restricted(const CircuitTemplate& tpl, const std::vector<double>& params,
                          const DenseOperator& u, const BlockMask& mask) {
    check_sizes(tpl, params, u);
    return epsilon_restricted(evaluate(tpl, params), u, mask);
}

std::vector<double> gradient(const CircuitTemplate& tpl, const std::vector<double>& params,
                             const DenseOperator& u, const BlockMask* mask) {
    return cost_and_gradient(tpl, params, u, mask).grad;
}

OptimizationRun adam_core(const AdamProblem& problem, std::vector<double> init,
                          const AdamHyperparams& hyper, int trace_stride) {
    validate(hyper);
    if (trace_stride < 1) throw std::invalid_argument("adam: trace stride must be >= 1");
    const auto start = std::chrono::steady_clock::now();

    OptimizationRun run;
    run.hyper = hyper;
    const std::size_t n = init.size();
    AdamState st;
    st.m.assign(n, 0.0);
    st.v.assign(n, 0.0);

    std::vector<double> theta = std::move(init);
    double best = problem.value(theta);
    run.initial_epsilon = best;
    run.best_params = theta;
    run.trace.emplace_back(0, best);

    auto diverged = [](double e) { return !std::isfinite(e) || e > kAbortCost; };
    if (diverged(best)) {
        run.failed = true;
        run.failure = "initial cost " + format_g(best) + " outside the trust region";
    }

    for (int i = 1; !run.failed && i <= hyper.iters; ++i) {
        st.i = i;
        const std::vector<double> g = problem.grad(theta);
        bool finite = g.size() == n;
        for (std::size_t k = 0; finite && k < n; ++k) finite = std::isfinite(g[k]);
        if (!finite) {
            run.failed = true;
            run.failure = "non-finite gradient at iteration " + std::to_string(i);
            run.trace.emplace_back(i, best);
            break;
        }
        const double c1 = 1.0 - std::pow(hyper.beta1, i);
        const double c2 = 1.0 - std::pow(hyper.beta2, i);
        for (std::size_t k = 0; k < n; ++k) {
            st.m[k] = hyper.beta1 * st.m[k] + (1.0 - hyper.beta1) * g[k];
            st.v[k] = hyper.beta2 * st.v[k] + (1.0 - hyper.beta2) * g[k] * g[k];
            theta[k] -= hyper.lambda * (st.m[k] / c1) / (std::sqrt(st.v[k] / c2) + hyper.delta);
        }
        const double e = problem.value(theta);
        if (diverged(e)) {
            run.failed = true;
            run.failure = "cost " + format_g(e) + " at iteration " + std::to_string(i) +
                          " outside the trust region";
            run.trace.emplace_back(i, best);
            break;
        }
        if (e < best) {
            best = e;
            run.best_iter = i;
            run.best_params = theta;
        }
        if (i % trace_stride == 0 || i == hyper.iters) run.trace.emplace_back(i, best);
    }

    run.best_epsilon = best;
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

OptimizationRun adam_minimize(const CircuitTemplate& tpl, const DenseOperator& u,
                              std::vector<double> init, const AdamHyperparams& hyper,
                              const BlockMask* mask, std::uint64_t seed, int trace_stride) {
    check_sizes(tpl, init, u);
    auto cache = std::make_shared<CachedCost>();
    cache->tpl = &tpl;
    cache->u = &u;
    cache->mask = mask;
    AdamProblem problem;
    problem.value = [cache](const std::vector<double>& p) { return cache->ensure(p).value; };
    problem.grad = [cache](const std::vector<double>& p) { return cache->ensure(p).grad; };

    OptimizationRun run = adam_core(problem, std::move(init), hyper, trace_stride);
    run.arch = tpl.arch;
    run.L = tpl.L;
    run.M = tpl.M;
    run.model = tpl.model;
    run.t = tpl.t;
    run.seed = seed;
    return run;
}

std::vector<AdamHyperparams> grid_points(const HyperGrid& grid) {
    std::vector<AdamHyperparams> pts;
    for (double b1 : grid.beta1)
        for (double b2 : grid.beta2)
            for (double d : grid.delta)
                for (double l : grid.lambda) {
                    AdamHyperparams h;
                    h.beta1 = b1;
                    h.beta2 = b2;
                    h.delta = d;
                    h.lambda = l;
                    h.iters = grid.iters;
                    pts.push_back(h);
                }
    return pts;
}

HyperGrid default_grid(Arch arch) {
    HyperGrid g;
    g.beta1 = {0.9, 0.99, 0.999, 0.9999};
    g.beta2 = {0.9, 0.99, 0.999, 0.9999};
    g.delta = {1e-2, 1e-4, 1e-8, 1e-12};
    const bool tivb = arch == Arch::Tivb2 || arch == Arch::Tivb4;
    g.lambda = tivb ? std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}
                    : std::vector<double>{0.5, 0.2, 0.1, 0.01, 0.001, 0.0001};
    return g;
}

HyperGrid reduced_grid(Arch arch) {
    HyperGrid g = default_grid(arch);
    g.beta1 = {0.9, 0.99};
    g.beta2 = {0.999};
    g.delta = {1e-8, 1e-12};
    return g;
}

OptimizationRun grid_search(const CircuitTemplate& tpl, const DenseOperator& u,
                            const std::vector<AdamHyperparams>& grid,
                            const std::vector<double>* init, const BlockMask* mask,
                            std::uint64_t seed, int workers, int trace_stride) {
    if (grid.empty()) throw std::invalid_argument("grid_search: empty hyperparameter grid");
    const std::size_t n = grid.size();
    std::vector<OptimizationRun> runs(n);

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                std::vector<double> start = init ? *init : init_params(tpl, seed + i);
                runs[i] = adam_minimize(tpl, u, std::move(start), grid[i], mask, seed + i,
                                        trace_stride);
            } catch (const std::exception& e) {
                runs[i].hyper = grid[i];
                runs[i].failed = true;
                runs[i].failure = e.what();
                runs[i].best_epsilon = std::numeric_limits<double>::infinity();
            }
        }
    };

    const int pool_size = static_cast<int>(std::min<std::size_t>(
        n, static_cast<std::size_t>(std::max(workers, 1))));
    if (pool_size <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(pool_size);
        for (int w = 0; w < pool_size; ++w) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }

    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double score =
            runs[i].failed ? std::numeric_limits<double>::infinity() : runs[i].best_epsilon;
        if (score < best_score) {
            best_score = score;
            best = i;
        }
    }
    return runs[best];
}

ScheduleResult sequential_schedule(ModelKind model, Arch arch, int M,
                                   const std::vector<double>& times,
                                   const std::vector<int>& ladder,
                                   const std::vector<int>& iters_per_stage, const HyperGrid& grid,
                                   bool restrict_cost, std::uint64_t seed, int workers,
                                   const std::string& checkpoint_dir, int trace_stride,
                                   const std::function<void(const std::string&)>& log) {
    if (times.empty()) throw std::invalid_argument("schedule: empty time list");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1]) throw std::invalid_argument("schedule: times must increase");
    if (ladder.empty()) throw std::invalid_argument("schedule: empty size ladder");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (ladder[i] <= ladder[i - 1])
            throw std::invalid_argument("schedule: ladder sizes must increase");
    if (iters_per_stage.size() != ladder.size())
        throw std::invalid_argument("schedule: one iteration budget per ladder size");

    std::vector<CircuitTemplate> tpls;
    std::vector<BlockMask> masks;
    for (int L : ladder) {
        validate(ModelSpec{model, L});
        tpls.push_back(build_template(arch, L, M));
        if (restrict_cost) {
            const SectorTable table = sector_table(ModelSpec{model, L});
            masks.push_back(mask_union(table.mask_d1(), table.mask_o1()));
        }
    }
    if (!checkpoint_dir.empty()) std::filesystem::create_directories(checkpoint_dir);
    auto say = [&log](const std::string& msg) {
        if (log) log(msg);
    };

    ScheduleResult result;
    std::vector<double> current;
    for (double t : times) {
        AdamHyperparams winner;
        for (std::size_t r = 0; r < ladder.size(); ++r) {
            const CircuitTemplate& tpl = tpls[r];
            const BlockMask* mask = restrict_cost ? &masks[r] : nullptr;
            const std::string stem = "t" + format_g(t) + "_L" + std::to_string(ladder[r]);

            OptimizationRun run;
            bool loaded = false;
            const std::string ck =
                checkpoint_dir.empty() ? "" : checkpoint_dir + "/" + stem + ".json";
            if (!ck.empty() && std::filesystem::exists(ck)) {
                try {
                    run = run_from_json(read_text_file(ck));
                    loaded = run.arch == tpl.arch && run.L == tpl.L && run.M == tpl.M &&
                             run.model == tpl.model && run.t == t &&
                             run.best_params.size() == tpl.param_count;
                    if (!loaded) say(stem + ": checkpoint does not match this stage, recomputing");
                } catch (const std::exception& e) {
                    say(stem + ": unreadable checkpoint (" + e.what() + "), recomputing");
                }
            }
            if (loaded) {
                say(stem + ": resumed from checkpoint, epsilon " + format_g(run.best_epsilon));
            } else {
                if (r == 0) {
                    HyperGrid staged = grid;
                    staged.iters = iters_per_stage[0];
                    run = grid_search(tpl, exact_propagator(ModelSpec{model, ladder[0]}, t),
                                      grid_points(staged), current.empty() ? nullptr : &current,
                                      mask, seed, workers, trace_stride);
                } else {
                    AdamHyperparams h = winner;
                    h.iters = iters_per_stage[r];
                    std::vector<double> start = current.size() == tpl.param_count
                                                    ? current
                                                    : init_params(tpl, seed);
                    run = adam_minimize(tpl, exact_propagator(ModelSpec{model, ladder[r]}, t),
                                        std::move(start), h, mask, seed, trace_stride);
                }
                run.model = model;
                run.t = t;
                if (!ck.empty()) {
                    std::ofstream out(ck, std::ios::binary);
                    out << run_json(run);
                    write_trace_csv(run, checkpoint_dir + "/" + stem + "_trace.csv");
                }
                say(stem + (run.failed ? ": failed, " + run.failure
                                       : ": epsilon " + format_g(run.best_epsilon)));
            }

            if (r == 0) winner = run.hyper;
            result.stages.push_back(ScheduleStage{t, ladder[r], run});
            if (!run.failed) {
                current = run.best_params;
                result.best[t] = run;
            }
        }
    }
    return result;
}

std::string run_json(const OptimizationRun& run) {
    nlohmann::json j;
    j["schema_version"] = 1;
    if (run.model)
        j["model"] = model_name(*run.model);
    else
        j["model"] = nullptr;
    j["arch"] = arch_name(run.arch);
    j["L"] = run.L;
    j["M"] = run.M;
    j["t"] = run.t;
    j["hyperparams"] = {{"lambda", run.hyper.lambda}, {"beta1", run.hyper.beta1},
                        {"beta2", run.hyper.beta2},   {"delta", run.hyper.delta},
                        {"iters", run.hyper.iters}};
    j["seed"] = run.seed;
    j["iter"] = run.best_iter;
    j["epsilon"] = run.best_epsilon;
    j["initial_epsilon"] = run.initial_epsilon;
    j["failed"] = run.failed;
    j["failure"] = run.failure;
    j["params"] = run.best_params;
    return j.dump(2) + "\n";
}

OptimizationRun run_from_json(const std::string& text) {
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        if (j.at("schema_version").get<int>() != 1)
            throw std::invalid_argument("checkpoint: unsupported schema version");
        OptimizationRun run;
        if (!j.at("model").is_null()) run.model = model_from_name(j.at("model").get<std::string>());
        run.arch = arch_from_name(j.at("arch").get<std::string>());
        run.L = j.at("L").get<int>();
        run.M = j.at("M").get<int>();
        run.t = j.at("t").get<double>();
        const nlohmann::json& h = j.at("hyperparams");
        run.hyper.lambda = h.at("lambda").get<double>();
        run.hyper.beta1 = h.at("beta1").get<double>();
        run.hyper.beta2 = h.at("beta2").get<double>();
        run.hyper.delta = h.at("delta").get<double>();
        run.hyper.iters = h.at("iters").get<int>();
        run.seed = j.at("seed").get<std::uint64_t>();
        run.best_iter = j.at("iter").get<int>();
        run.best_epsilon = j.at("epsilon").get<double>();
        run.initial_epsilon = j.at("initial_epsilon").get<double>();
        run.failed = j.at("failed").get<bool>();
        run.failure = j.at("failure").get<std::string>();
        run.best_params = j.at("params").get<std::vector<double>>();
        return run;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("checkpoint: ") + e.what());
    }
}

void write_trace_csv(const OptimizationRun& run, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (f == nullptr) throw std::runtime_error("cannot open " + path);
    std::fputs("iter,epsilon\n", f);
    for (const auto& [iter, eps] : run.trace) std::fprintf(f, "%d,%.17g\n", iter, eps);
    std::fclose(f);
}

}  // namespace qcomp
