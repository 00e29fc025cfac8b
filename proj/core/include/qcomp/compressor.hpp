#pragma once

#include "qcomp/templates.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Frobenius-distance cost, analytic gradient, Adam descent, hyperparameter
// grid search and the sequential time/size compression schedule.

namespace qcomp {

struct AdamHyperparams {
    double lambda = 0.001;  // base learning rate
    double beta1 = 0.9;     // first moment decay
    double beta2 = 0.999;   // second moment decay
    double delta = 1e-8;    // denominator regularization
    int iters = 1000;
};

void validate(const AdamHyperparams& h);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    int i = 0;
};

struct OptimizationRun {
    Arch arch = Arch::Tivb2;
    int L = 0;
    int M = 0;
    std::optional<ModelKind> model;
    double t = 0.0;
    AdamHyperparams hyper;
    std::uint64_t seed = 0;
    std::vector<double> best_params;
    double best_epsilon = 0.0;
    int best_iter = 0;
    double initial_epsilon = 0.0;
    std::vector<std::pair<int, double>> trace;  // (iteration, best-so-far cost)
    bool failed = false;
    std::string failure;
    double seconds = 0.0;
};

// epsilon = 1 - Re Tr[C^dag U] / 2^L; equals ||C - U||_F^2 / 2^{L+1} for
// unitary C and U, so it lies in [0, 2].
double epsilon(const DenseOperator& c, const DenseOperator& u);
double epsilon(const CircuitTemplate& tpl, const std::vector<double>& params,
               const DenseOperator& u);

// Masked squared distance / (2 sqrt(N_e)) with N_e the masked entry count;
// the full mask reproduces epsilon.
double epsilon_restricted(const DenseOperator& c, const DenseOperator& u, const BlockMask& mask);
double epsilon_restricted(const CircuitTemplate& tpl, const std::vector<double>& params,
                          const DenseOperator& u, const BlockMask& mask);

// d(cost)/d(param) accumulated over every gate instance bound to each slot,
// including binding coefficients. mask = nullptr differentiates epsilon,
// otherwise the restricted cost.
std::vector<double> gradient(const CircuitTemplate& tpl, const std::vector<double>& params,
                             const DenseOperator& u, const BlockMask* mask = nullptr);

// Generic objective for the Adam core, so tests can drive it with closed-form
// functions; cost and grad are evaluated at the same points.
struct AdamProblem {
    std::function<double(const std::vector<double>&)> value;
    std::function<std::vector<double>(const std::vector<double>&)> grad;
};

// Adam descent with bias-corrected moments (1-based iteration count) and
// update theta <- theta - lambda * m_hat / (sqrt(v_hat) + delta). Returns the
// best iterate seen, not the final one; the trace holds best-so-far values at
// `trace_stride` spacing plus the final iteration. A non-finite cost or a
// cost above 2.5 aborts the run and marks it failed.
OptimizationRun adam_core(const AdamProblem& problem, std::vector<double> init,
                          const AdamHyperparams& hyper, int trace_stride = 100);

OptimizationRun adam_minimize(const CircuitTemplate& tpl, const DenseOperator& u,
                              std::vector<double> init, const AdamHyperparams& hyper,
                              const BlockMask* mask = nullptr, std::uint64_t seed = 0,
                              int trace_stride = 100);

// Cartesian hyperparameter grid; points enumerate lexicographically in the
// order (beta1, beta2, delta, lambda) with lambda fastest.
struct HyperGrid {
    std::vector<double> beta1;
    std::vector<double> beta2;
    std::vector<double> delta;
    std::vector<double> lambda;
    int iters = 1000;
};

std::vector<AdamHyperparams> grid_points(const HyperGrid& grid);

// Full 384-point source grid; the learning-rate set depends on the family
// (blocked layouts take coarser rates than TIVB).
HyperGrid default_grid(Arch arch);

// 24-point desk-scale subset used by the pipeline defaults.
HyperGrid reduced_grid(Arch arch);

// Runs every grid point independently (at most `workers` at a time) and
// returns the lowest-cost run; ties resolve to the lowest grid index. With
// init = nullptr each point draws its own start from seed + index, otherwise
// all points share *init. Failed runs score +infinity.
OptimizationRun grid_search(const CircuitTemplate& tpl, const DenseOperator& u,
                            const std::vector<AdamHyperparams>& grid,
                            const std::vector<double>* init, const BlockMask* mask,
                            std::uint64_t seed, int workers, int trace_stride = 100);

struct ScheduleStage {
    double t = 0.0;
    int L = 0;
    OptimizationRun run;
};

struct ScheduleResult {
    std::vector<ScheduleStage> stages;       // execution order
    std::map<double, OptimizationRun> best;  // per time: deepest completed rung
};

// Sequential compression: for each time (ascending) run the grid on the
// smallest ladder size, warm-started from the previous time's result, then
// re-optimize up the ladder with the winning hyperparameters. Rung r uses
// iters_per_stage[r]. restrict_cost switches to the masked cost on the union
// of the largest diagonal block and its off-diagonal rectangles. A nonempty
// checkpoint_dir makes every stage write t{t}_L{L}.json plus a trace CSV and
// resume from files already present. Stage failures are recorded and the
// schedule continues from the last good parameters.
ScheduleResult sequential_schedule(ModelKind model, Arch arch, int M,
                                   const std::vector<double>& times,
                                   const std::vector<int>& ladder,
                                   const std::vector<int>& iters_per_stage, const HyperGrid& grid,
                                   bool restrict_cost = false, std::uint64_t seed = 0,
                                   int workers = 1, const std::string& checkpoint_dir = "",
                                   int trace_stride = 100,
                                   const std::function<void(const std::string&)>& log = {});

// Checkpoint manifest (schema_version 1): identity, hyperparameters, seed,
// best iterate. Traces live in the CSV next to it, not in the JSON.
std::string run_json(const OptimizationRun& run);
OptimizationRun run_from_json(const std::string& text);

// Columns (iter, epsilon); doubles printed with %.17g so reruns are
// byte-identical.
void write_trace_csv(const OptimizationRun& run, const std::string& path);

}  // namespace qcomp
