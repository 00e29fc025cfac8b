#include <benchmark/benchmark.h>

#include <qcomp/compressor.hpp>
#include <qcomp/tensor.hpp>

#include <random>

using namespace qcomp;

namespace {

Matrix random_gate(int dim, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix a(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) a(i, j) = cplx{dist(rng), dist(rng)};
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ() * Matrix::Identity(dim, dim);
}

void bench_apply_gate_state(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    const int k = static_cast<int>(state.range(1));
    StateVector s = zero_state(L);
    const Matrix g = random_gate(1 << k, 1);
    std::vector<int> qs;
    for (int i = 0; i < k; ++i) qs.push_back(2 * i + 1);
    for (auto _ : state) {
        apply_gate(s, g, qs);
        benchmark::DoNotOptimize(s.amp.data());
    }
}

void bench_apply_gate_left(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    const int k = static_cast<int>(state.range(1));
    DenseOperator op = identity_op(L);
    const Matrix g = random_gate(1 << k, 2);
    std::vector<int> qs;
    for (int i = 0; i < k; ++i) qs.push_back(2 * i + 1);
    for (auto _ : state) {
        apply_gate_left(op, g, qs);
        benchmark::DoNotOptimize(op.mat.data());
    }
}

void bench_cnot_left(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    DenseOperator op = identity_op(L);
    for (auto _ : state) {
        apply_cnot_left(op, 1, 2);
        benchmark::DoNotOptimize(op.mat.data());
    }
}

void bench_local_env(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    const DenseOperator a = identity_op(L);
    const DenseOperator y = identity_op(L);
    for (auto _ : state) {
        benchmark::DoNotOptimize(local_env(a, y, {1, 2}));
    }
}

// One optimizer iteration: forward circuit build plus the adjoint sweep.
void bench_gradient_sweep(benchmark::State& state) {
    const Arch arch = static_cast<Arch>(state.range(0));
    const int L = static_cast<int>(state.range(1));
    const int M = static_cast<int>(state.range(2));
    const CircuitTemplate tpl = build_template(arch, L, M);
    const ModelKind model = tpl.model.value_or(ModelKind::Xxz);
    const DenseOperator u = exact_propagator(ModelSpec{model, L}, 1.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    std::vector<double> p(tpl.param_count);
    for (double& v : p) v = dist(rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gradient(tpl, p, u));
    }
}

}  // namespace

BENCHMARK(bench_apply_gate_state)->Args({16, 1})->Args({16, 2})->Args({16, 3});
BENCHMARK(bench_apply_gate_left)->Args({8, 1})->Args({8, 2})->Args({10, 2});
BENCHMARK(bench_cnot_left)->Arg(8)->Arg(10);
BENCHMARK(bench_local_env)->Arg(8)->Arg(10);
BENCHMARK(bench_gradient_sweep)
    ->Args({static_cast<int>(qcomp::Arch::BlockedXxz), 6, 1})
    ->Args({static_cast<int>(qcomp::Arch::BlockedXxz), 8, 1})
    ->Args({static_cast<int>(qcomp::Arch::Tivb2), 6, 8})
    ->Args({static_cast<int>(qcomp::Arch::Tivb2), 8, 8});

BENCHMARK_MAIN();
