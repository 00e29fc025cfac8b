#include <CLI11.hpp>
#include <json.hpp>

#include <qcomp/analysis.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

using nlohmann::json;
using namespace qcomp;

namespace {

// One JSON document drives every subcommand; flags override single keys.
struct RunConfig {
    ModelKind model = ModelKind::Xxz;
    bool has_model = false;
    std::vector<Arch> archs;
    std::vector<int> layer_counts;
    std::vector<double> times;
    std::vector<int> ladder;
    std::vector<int> iters;
    std::string grid = "reduced";
    std::vector<int> eval_sizes;
    int L = 0;
    double t = 1.0;
    int n_times = 6;
    bool restrict_cost = false;
    int trace_stride = 100;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out = "runs";
};

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config: " + std::string(e.what()));
    }
}

RunConfig config_from_json(const json& j) {
    RunConfig cfg;
    try {
        if (j.contains("model")) {
            cfg.model = model_from_name(j.at("model").get<std::string>());
            cfg.has_model = true;
        }
        if (j.contains("arch"))
            for (const auto& name : j.at("arch"))
                cfg.archs.push_back(arch_from_name(name.get<std::string>()));
        if (j.contains("M")) cfg.layer_counts = j.at("M").get<std::vector<int>>();
        if (j.contains("times")) cfg.times = j.at("times").get<std::vector<double>>();
        if (j.contains("ladder")) cfg.ladder = j.at("ladder").get<std::vector<int>>();
        if (j.contains("iters")) cfg.iters = j.at("iters").get<std::vector<int>>();
        if (j.contains("grid")) cfg.grid = j.at("grid").get<std::string>();
        if (j.contains("eval_sizes")) cfg.eval_sizes = j.at("eval_sizes").get<std::vector<int>>();
        if (j.contains("L")) cfg.L = j.at("L").get<int>();
        if (j.contains("t")) cfg.t = j.at("t").get<double>();
        if (j.contains("n_times")) cfg.n_times = j.at("n_times").get<int>();
        if (j.contains("restrict_cost")) cfg.restrict_cost = j.at("restrict_cost").get<bool>();
        if (j.contains("trace_stride")) cfg.trace_stride = j.at("trace_stride").get<int>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
        if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    } catch (const json::exception& e) {
        throw std::invalid_argument("config: " + std::string(e.what()));
    }
    if (cfg.grid != "reduced" && cfg.grid != "default")
        throw std::invalid_argument("config: grid must be \"reduced\" or \"default\"");
    return cfg;
}

std::string format_t(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

FILE* open_out(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::invalid_argument("cannot open " + path + " for writing");
    return f;
}

void csv_num(FILE* f, double v) { std::fprintf(f, "%.17g", v); }

std::string stage_dir(const RunConfig& cfg, Arch arch, int M) {
    return cfg.out + "/" + model_name(cfg.model) + "_" + arch_name(arch) + "_M" +
           std::to_string(M);
}

OptimizationRun load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("checkpoint: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return run_from_json(ss.str());
}

// Parametrized archs rebuild from (arch, L, M) alone; Trotter references do
// not round-trip through checkpoints and are rejected by build_template.
CircuitTemplate checkpoint_template(const OptimizationRun& run) {
    return build_template(run.arch, run.L, run.M);
}

ModelKind checkpoint_model(const OptimizationRun& run, const RunConfig& cfg) {
    if (run.model) return *run.model;
    if (cfg.has_model) return cfg.model;
    throw std::invalid_argument("checkpoint carries no model and the config names none");
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& which, const std::string& source,
                    const std::vector<std::string>& files) {
    json j;
    j["schema_version"] = 1;
    j["command"] = command;
    if (!which.empty()) j["which"] = which;
    j["source"] = source;
    j["files"] = files;
    FILE* f = open_out(path);
    const std::string text = j.dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

int cmd_optimize(const RunConfig& cfg, bool dry_run) {
    if (!cfg.has_model) throw std::invalid_argument("config: optimize needs a model");
    if (cfg.archs.empty()) throw std::invalid_argument("config: optimize needs an arch list");
    if (cfg.layer_counts.empty()) throw std::invalid_argument("config: optimize needs an M list");
    if (cfg.times.empty()) throw std::invalid_argument("config: optimize needs a time list");
    if (cfg.ladder.empty()) throw std::invalid_argument("config: optimize needs a size ladder");
    if (cfg.iters.size() != cfg.ladder.size())
        throw std::invalid_argument("config: iters must give one budget per ladder size");

    if (dry_run) {
        std::size_t n = 0;
        for (Arch arch : cfg.archs)
            for (int M : cfg.layer_counts) {
                build_template(arch, cfg.ladder.front(), M);
                for (double t : cfg.times) {
                    std::printf("stage %s %s M=%d t=%s\n", model_name(cfg.model).c_str(),
                                arch_name(arch), M, format_t(t).c_str());
                    ++n;
                }
            }
        std::printf("stages: %zu\n", n);
        return 0;
    }

    std::filesystem::create_directories(cfg.out);
    const auto log = [](const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); };
    for (Arch arch : cfg.archs) {
        const HyperGrid grid = cfg.grid == "default" ? default_grid(arch) : reduced_grid(arch);
        for (int M : cfg.layer_counts) {
            const std::string dir = stage_dir(cfg, arch, M);
            const ScheduleResult result = sequential_schedule(
                cfg.model, arch, M, cfg.times, cfg.ladder, cfg.iters, grid, cfg.restrict_cost,
                cfg.seed, cfg.workers, dir, cfg.trace_stride, log);
            for (const ScheduleStage& stage : result.stages)
                if (stage.run.failed)
                    std::fprintf(stderr, "warning: %s M=%d t=%s L=%d failed: %s\n",
                                 arch_name(arch), M, format_t(stage.t).c_str(), stage.L,
                                 stage.run.failure.c_str());
            const std::string csv =
                cfg.out + "/epsilon_" + model_name(cfg.model) + "_" + arch_name(arch) + "_M" +
                std::to_string(M) + ".csv";
            FILE* f = open_out(csv);
            std::fprintf(f, "t,L,M,arch,epsilon\n");
            for (const auto& [t, run] : result.best) {
                csv_num(f, t);
                std::fprintf(f, ",%d,%d,%s,", run.L, run.M, arch_name(run.arch));
                csv_num(f, run.best_epsilon);
                std::fprintf(f, "\n");
            }
            std::fclose(f);
        }
    }
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint,
                 const std::vector<int>& size_flags, int baseline_steps) {
    const OptimizationRun run = load_checkpoint(checkpoint);
    const ModelKind model = checkpoint_model(run, cfg);
    const CircuitTemplate tpl = checkpoint_template(run);
    std::vector<int> sizes = !size_flags.empty() ? size_flags : cfg.eval_sizes;
    if (sizes.empty()) sizes = {run.L};

    std::filesystem::create_directories(cfg.out);
    const std::string csv = cfg.out + "/evaluate_" + model_name(model) + "_" +
                            arch_name(run.arch) + "_M" + std::to_string(run.M) + "_t" +
                            format_t(run.t) + ".csv";
    FILE* f = open_out(csv);
    std::fprintf(f, "L,M,arch,t,epsilon\n");
    for (int L : sizes) {
        const DenseOperator u = exact_propagator(ModelSpec{model, L}, run.t);
        const CircuitTemplate lifted = lift_size(tpl, L);
        std::fprintf(f, "%d,%d,%s,", L, run.M, arch_name(run.arch));
        csv_num(f, run.t);
        std::fprintf(f, ",");
        csv_num(f, epsilon(lifted, run.best_params, u));
        std::fprintf(f, "\n");
        if (baseline_steps > 0) {
            const auto [ttpl, tparams] = build_trotter(model, L, 2, baseline_steps, run.t);
            std::fprintf(f, "%d,%d,TROTTER2,", L, baseline_steps);
            csv_num(f, run.t);
            std::fprintf(f, ",");
            csv_num(f, epsilon(ttpl, tparams, u));
            std::fprintf(f, "\n");
        }
    }
    std::fclose(f);
    std::printf("%s\n", csv.c_str());
    return 0;
}

struct AnalyzeInputs {
    std::optional<OptimizationRun> run;
    ModelKind model = ModelKind::Xxz;
    int L = 0;
    double t = 1.0;
    std::string source = "exact";
    std::string tag;
};

AnalyzeInputs analyze_inputs(const RunConfig& cfg, const std::string& checkpoint) {
    AnalyzeInputs in;
    if (!checkpoint.empty()) {
        in.run = load_checkpoint(checkpoint);
        in.model = checkpoint_model(*in.run, cfg);
        in.L = in.run->L;
        in.t = in.run->t;
        in.source = checkpoint;
        in.tag = model_name(in.model) + "_" + arch_name(in.run->arch) + "_M" +
                 std::to_string(in.run->M) + "_t" + format_t(in.t) + "_L" + std::to_string(in.L);
    } else {
        if (!cfg.has_model) throw std::invalid_argument("config: analyze needs a model");
        if (cfg.L <= 0)
            throw std::invalid_argument("config: analyze without a checkpoint needs L");
        in.model = cfg.model;
        in.L = cfg.L;
        in.t = cfg.t;
        in.tag = model_name(in.model) + "_EXACT_t" + format_t(in.t) + "_L" + std::to_string(in.L);
    }
    return in;
}

DenseOperator analyze_step(const AnalyzeInputs& in) {
    if (in.run) return evaluate(checkpoint_template(*in.run), in.run->best_params);
    return exact_propagator(ModelSpec{in.model, in.L}, in.t);
}

int cmd_analyze(const RunConfig& cfg, const std::string& which, const std::string& checkpoint) {
    std::filesystem::create_directories(cfg.out);
    std::vector<std::string> files;
    std::string source = checkpoint.empty() ? "exact" : checkpoint;

    if (which == "imbalance" || which == "string") {
        const AnalyzeInputs in = analyze_inputs(cfg, checkpoint);
        const ModelSpec spec{in.model, in.L};
        if (which == "string" && in.model != ModelKind::Qlm)
            throw std::invalid_argument("string order is a gauge-model diagnostic");
        const StateVector initial =
            named_state(spec, in.model == ModelKind::Qlm ? "NEEL_QLM" : "NEEL");
        const DenseOperator exact = exact_propagator(spec, in.t);
        const auto series_of = [&](const DenseOperator& step, const std::string& prov) {
            return which == "string"
                       ? string_order_series(spec, step, initial, cfg.n_times, prov)
                       : imbalance_series(step, initial, cfg.n_times, prov);
        };
        ReportMeta meta;
        meta.L = in.L;
        meta.arch = "EXACT";
        const std::string epath = cfg.out + "/" + which + "_exact_" + in.tag + ".csv";
        write_series_csv(series_of(exact, "exact"), meta, epath);
        files.push_back(epath);
        if (in.run) {
            const DenseOperator step = analyze_step(in);
            meta.M = in.run->M;
            meta.arch = arch_name(in.run->arch);
            meta.epsilon = epsilon(step, exact);
            const std::string cpath = cfg.out + "/" + which + "_circuit_" + in.tag + ".csv";
            write_series_csv(series_of(step, "circuit"), meta, cpath);
            files.push_back(cpath);
        }
    } else if (which == "otoc") {
        const AnalyzeInputs in = analyze_inputs(cfg, checkpoint);
        const SectorTable table = sector_table(ModelSpec{in.model, in.L});
        const OtocGrid grid = otoc_grid(analyze_step(in), table.largest(), cfg.n_times);
        const std::string path = cfg.out + "/otoc_" + in.tag + ".csv";
        write_otoc_csv(grid, path);
        files.push_back(path);
    } else if (which == "errormap") {
        const AnalyzeInputs in = analyze_inputs(cfg, checkpoint);
        if (!in.run) throw std::invalid_argument("errormap needs a checkpoint");
        const DenseOperator u = exact_propagator(ModelSpec{in.model, in.L}, in.t);
        const std::string path = cfg.out + "/errormap_" + in.tag + ".csv";
        write_error_map_csv(error_map(analyze_step(in), u), path);
        files.push_back(path);
    } else if (which == "blocks") {
        if (checkpoint.empty()) throw std::invalid_argument("blocks needs a checkpoint directory");
        std::vector<std::string> paths;
        for (const auto& entry : std::filesystem::directory_iterator(checkpoint)) {
            const std::string name = entry.path().filename().string();
            if (name.size() > 5 && name.substr(name.size() - 5) == ".json")
                paths.push_back(entry.path().string());
        }
        if (paths.empty()) throw std::invalid_argument("blocks: no checkpoints in " + checkpoint);
        std::vector<OptimizationRun> runs;
        for (const std::string& p : paths) runs.push_back(load_checkpoint(p));
        std::sort(runs.begin(), runs.end(), [](const OptimizationRun& a, const OptimizationRun& b) {
            return std::tie(a.t, a.L) < std::tie(b.t, b.L);
        });
        const ModelKind model = checkpoint_model(runs.front(), cfg);
        const std::string path = cfg.out + "/blocks_" + model_name(model) + "_" +
                                 arch_name(runs.front().arch) + "_M" +
                                 std::to_string(runs.front().M) + ".csv";
        FILE* f = open_out(path);
        std::fprintf(f, "t,L,d1,dr,o1,or\n");
        for (const OptimizationRun& run : runs) {
            const ModelSpec spec{model, run.L};
            const SectorTable table = sector_table(spec);
            const DenseOperator c = evaluate(checkpoint_template(run), run.best_params);
            const RestrictedDistances r =
                restricted_distance_report(c, exact_propagator(spec, run.t), table);
            csv_num(f, run.t);
            std::fprintf(f, ",%d,", run.L);
            csv_num(f, r.d1);
            std::fprintf(f, ",");
            csv_num(f, r.dr);
            std::fprintf(f, ",");
            csv_num(f, r.o1);
            std::fprintf(f, ",");
            csv_num(f, r.or_);
            std::fprintf(f, "\n");
        }
        std::fclose(f);
        files.push_back(path);
    } else if (which == "spectrum") {
        const AnalyzeInputs in = analyze_inputs(cfg, checkpoint);
        const ModelSpec spec{in.model, in.L};
        const StateVector ref =
            named_state(spec, in.model == ModelKind::Qlm ? "NEEL_QLM" : "NEEL");
        const std::vector<EigenOverlap> overlaps = eigen_overlaps(analyze_step(in), ref);
        const std::string path = cfg.out + "/spectrum_" + in.tag + ".csv";
        FILE* f = open_out(path);
        std::fprintf(f, "phase,overlap\n");
        for (const EigenOverlap& o : overlaps) {
            csv_num(f, o.phase);
            std::fprintf(f, ",");
            csv_num(f, o.overlap);
            std::fprintf(f, "\n");
        }
        std::fclose(f);
        files.push_back(path);
    } else if (which == "angles") {
        if (checkpoint.empty()) throw std::invalid_argument("angles needs a checkpoint");
        const AnalyzeInputs in = analyze_inputs(cfg, checkpoint);
        const double sum = angle_sum_diagnostic(checkpoint_template(*in.run), in.run->best_params);
        const std::string path = cfg.out + "/angles_" + in.tag + ".csv";
        FILE* f = open_out(path);
        std::fprintf(f, "arch,L,M,t,angle_sum,quarter_time\n");
        std::fprintf(f, "%s,%d,%d,", arch_name(in.run->arch), in.L, in.run->M);
        csv_num(f, in.t);
        std::fprintf(f, ",");
        csv_num(f, sum);
        std::fprintf(f, ",");
        csv_num(f, in.t / 4.0);
        std::fprintf(f, "\n");
        std::fclose(f);
        files.push_back(path);
    } else {
        throw std::invalid_argument("unknown analysis: " + which);
    }

    write_manifest(cfg.out + "/manifest_" + which + ".json", "analyze", which, source, files);
    for (const std::string& p : files) std::printf("%s\n", p.c_str());
    return 0;
}

int cmd_stack(const RunConfig& cfg, const std::string& checkpoint, int n_max) {
    if (n_max < 1) throw std::invalid_argument("stack needs n >= 1");
    const OptimizationRun run = load_checkpoint(checkpoint);
    const ModelKind model = checkpoint_model(run, cfg);
    const CircuitTemplate tpl = checkpoint_template(run);
    const DenseOperator c = evaluate(tpl, run.best_params);

    std::filesystem::create_directories(cfg.out);
    const std::string csv = cfg.out + "/stack_" + model_name(model) + "_" +
                            arch_name(run.arch) + "_M" + std::to_string(run.M) + "_t" +
                            format_t(run.t) + ".csv";
    FILE* f = open_out(csv);
    std::fprintf(f, "n,t,epsilon\n");
    DenseOperator powered = c;
    for (int n = 1; n <= n_max; ++n) {
        if (n > 1) powered.mat = powered.mat * c.mat;
        const DenseOperator u = exact_propagator(ModelSpec{model, run.L}, n * run.t);
        std::fprintf(f, "%d,", n);
        csv_num(f, n * run.t);
        std::fprintf(f, ",");
        csv_num(f, epsilon(powered, u));
        std::fprintf(f, "\n");
    }
    std::fclose(f);
    std::printf("%s\n", csv.c_str());
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    std::vector<std::pair<std::string, OptimizationRun>> rows;
    if (std::filesystem::exists(cfg.out))
        for (const auto& entry : std::filesystem::recursive_directory_iterator(cfg.out)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("t", 0) == 0 && name.size() > 5 &&
                name.substr(name.size() - 5) == ".json" &&
                name.find("_trace") == std::string::npos) {
                try {
                    rows.emplace_back(entry.path().string(), load_checkpoint(entry.path().string()));
                } catch (const std::invalid_argument&) {
                    std::fprintf(stderr, "warning: skipping unreadable %s\n",
                                 entry.path().string().c_str());
                }
            }
        }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        const OptimizationRun& x = a.second;
        const OptimizationRun& y = b.second;
        const std::string mx = x.model ? model_name(*x.model) : "";
        const std::string my = y.model ? model_name(*y.model) : "";
        return std::tie(mx, x.arch, x.M, x.t, x.L, a.first) <
               std::tie(my, y.arch, y.M, y.t, y.L, b.first);
    });

    std::filesystem::create_directories(cfg.out);
    const std::string csv = cfg.out + "/report.csv";
    FILE* f = open_out(csv);
    std::fprintf(f, "model,arch,M,t,L,epsilon,iter,failed\n");
    for (const auto& [path, run] : rows) {
        std::fprintf(f, "%s,%s,%d,", run.model ? model_name(*run.model).c_str() : "",
                     arch_name(run.arch), run.M);
        csv_num(f, run.t);
        std::fprintf(f, ",%d,", run.L);
        csv_num(f, run.best_epsilon);
        std::fprintf(f, ",%d,%d\n", run.best_iter, run.failed ? 1 : 0);
    }
    std::fclose(f);
    std::printf("%s: %zu runs\n", csv.c_str(), rows.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compression toolkit for constrained spin-chain propagators"};
    app.require_subcommand(1);

    std::string config_path;
    std::string checkpoint;
    std::string which;
    std::vector<int> sizes;
    int baseline_steps = 0;
    int n_max = 1;
    bool dry_run = false;
    std::uint64_t seed_flag = 0;
    int workers_flag = 1;
    std::string out_flag;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--seed", seed_flag, "base RNG seed");
        sub->add_option("--workers", workers_flag, "parallel stage workers");
        sub->add_option("--out", out_flag, "output directory");
        return sub;
    };

    CLI::App* optimize = add_common(app.add_subcommand("optimize", "run compression schedules"));
    optimize->add_flag("--dry-run", dry_run, "enumerate stages without running");

    CLI::App* evaluate = add_common(app.add_subcommand("evaluate", "epsilon across sizes"));
    evaluate->add_option("--checkpoint", checkpoint, "run checkpoint JSON")->required();
    evaluate->add_option("--sizes", sizes, "evaluation sizes");
    evaluate->add_option("--baseline-steps", baseline_steps, "add order-2 reference rows");

    int n_times_flag = 0;
    CLI::App* analyze = add_common(app.add_subcommand("analyze", "physics diagnostics"));
    analyze->add_option("--which", which, "imbalance|string|otoc|errormap|blocks|spectrum|angles")
        ->required();
    analyze->add_option("--checkpoint", checkpoint, "run checkpoint JSON (blocks: directory)");
    analyze->add_option("--n-times", n_times_flag, "unit time steps (overrides config)");

    CLI::App* stack_cmd = add_common(app.add_subcommand("stack", "repeat a fixed-time circuit"));
    stack_cmd->add_option("--checkpoint", checkpoint, "run checkpoint JSON")->required();
    stack_cmd->add_option("--n", n_max, "largest repetition count");

    CLI::App* report = add_common(app.add_subcommand("report", "summarize all checkpoints"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg =
            config_path.empty() ? RunConfig{} : config_from_json(load_json_file(config_path));
        CLI::App* active = app.get_subcommands().front();
        if (active->count("--seed")) cfg.seed = seed_flag;
        if (active->count("--workers")) cfg.workers = workers_flag;
        if (active->count("--out")) cfg.out = out_flag;
        if (n_times_flag > 0) cfg.n_times = n_times_flag;

        if (active == optimize) return cmd_optimize(cfg, dry_run);
        if (active == evaluate) return cmd_evaluate(cfg, checkpoint, sizes, baseline_steps);
        if (active == analyze) return cmd_analyze(cfg, which, checkpoint);
        if (active == stack_cmd) return cmd_stack(cfg, checkpoint, n_max);
        if (active == report) return cmd_report(cfg);
        return 2;
    } catch (const resource_limit_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
