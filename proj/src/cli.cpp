#include "numaplan/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <ostream>
#include <thread>

#include "numaplan/baselines.hpp"
#include "numaplan/io.hpp"
#include "numaplan/oracle.hpp"
#include "numaplan/scaling.hpp"

namespace numaplan {

namespace fs = std::filesystem;

namespace {

struct Config {
    std::string topology;
    std::string machine;
    std::string plan;
    std::string output_dir = ".";
    std::string output;
    std::string strategy = "rlas";
    int compress_ratio = 5;
    double time_budget_s = 600.0;
    int replication_limit = 0;
    int max_per_operator = 0;
    std::uint64_t seed = 0;
    int samples = 1000;
    bool warm_start = false;
    bool best_fit_pruning = false;
    bool one_core_per_replica = false;
    bool split_on_failure = false;
    bool sweep = false;
    bool find_saturation = false;
    std::string initial_replication;
    std::optional<double> measured;
    std::optional<double> estimate;
    std::string matrix;
};

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

ConstraintOptions constraint_options(const Config& cfg) { return {cfg.one_core_per_replica}; }

ScalingOptions scaling_options(const Config& cfg, const Topology& topology) {
    ScalingOptions opts;
    opts.replication_limit = cfg.replication_limit;
    opts.compress_ratio = cfg.compress_ratio;
    opts.policy = cfg.sweep ? StepPolicy::Sweep : StepPolicy::Explore;
    opts.split_on_failure = cfg.split_on_failure;
    opts.time_budget = std::chrono::milliseconds(static_cast<long long>(std::llround(cfg.time_budget_s * 1000.0)));
    opts.warm_start = cfg.warm_start;
    opts.best_fit_pruning = cfg.best_fit_pruning;
    opts.constraints = constraint_options(cfg);
    if (!cfg.initial_replication.empty()) opts.initial_replication = parse_replication_list(cfg.initial_replication, topology);
    return opts;
}

Json stats_to_json(const SearchStats& stats, std::size_t iterations, const std::string& strategy) {
    return {{"strategy", strategy},
            {"nodes_expanded", stats.nodes_expanded},
            {"nodes_pruned", stats.nodes_pruned},
            {"iterations", iterations},
            {"timed_out", stats.timed_out},
            {"best_value", stats.best_value}};
}

void print_report(std::ostream& out, const PlanCheck& check, const ExecutionPlan& plan, const Topology& topology,
                  const MachineSpec& machine) {
    out << "throughput " << format_number(check.report.throughput) << "\n";
    out << "bottlenecks";
    for (int r : check.report.bottlenecks) out << ' ' << plan.graph.replica_id(topology, r);
    out << "\n";
    for (std::size_t i = 0; i < check.report.usage.cpu.size(); ++i) {
        out << "socket " << i << " cpu " << fixed(check.report.usage.cpu[i] / machine.socket_cpu_capacity(), 4) << " dram "
            << fixed(machine.dram_bandwidth[i] > 0 ? check.report.usage.bw[i] / machine.dram_bandwidth[i] : 0.0, 4) << " replicas "
            << check.report.usage.replicas[i] << "\n";
    }
    for (const auto& v : check.violations) {
        out << "violation " << to_string(v.kind) << " socket " << v.socket;
        if (v.to_socket >= 0) out << "->" << v.to_socket;
        if (!v.subject.empty()) out << ' ' << v.subject;
        out << " demand " << format_number(v.demand) << " capacity " << format_number(v.capacity) << "\n";
    }
}

struct Outcome {
    std::optional<ExecutionPlan> plan;
    std::vector<TraceEntry> trace;
    SearchStats stats;
    bool timed_out = false;
    bool constraint_relaxed = false;
};

Outcome run_strategy(const Config& cfg, StrategyKind kind, const Topology& topology, const MachineSpec& machine) {
    Outcome out;
    ScalingOptions opts = scaling_options(cfg, topology);
    switch (kind) {
        case StrategyKind::Rlas:
        case StrategyKind::FixL:
        case StrategyKind::FixU: {
            if (kind != StrategyKind::Rlas) opts.fetch_model = fetch_model_for(kind == StrategyKind::FixL ? RmaMode::L : RmaMode::U);
            auto result = optimize(topology, machine, opts);
            out.plan = std::move(result.plan);
            out.trace = std::move(result.trace);
            out.stats = result.stats;
            out.timed_out = result.timed_out;
            break;
        }
        case StrategyKind::FirstFit:
        case StrategyKind::RoundRobin: {
            const auto replication = opts.initial_replication.value_or(topology.replication());
            const auto graph = compress_graph(expand_execution_graph(topology, replication), cfg.compress_ratio);
            auto base = kind == StrategyKind::FirstFit ? first_fit(graph, topology, machine, opts.constraints)
                                                       : round_robin(graph, topology, machine);
            out.plan = std::move(base.plan);
            out.constraint_relaxed = base.constraint_relaxed;
            break;
        }
        case StrategyKind::Random: {
            const int limit = cfg.replication_limit > 0 ? cfg.replication_limit : default_replication_limit(machine);
            out.plan = random_plan(topology, machine, limit, cfg.seed);
            break;
        }
    }
    return out;
}

int cmd_optimize(const Config& cfg, std::ostream& out, std::ostream& err) {
    const Topology topology = parse_topology(read_file(cfg.topology));
    const MachineSpec machine = parse_machine(read_file(cfg.machine));
    const StrategyKind kind = parse_strategy(cfg.strategy);
    const fs::path dir(cfg.output_dir);

    const auto started = Clock::now();
    Outcome outcome;
    try {
        outcome = run_strategy(cfg, kind, topology, machine);
    } catch (const ModelError& e) {
        if (std::string(e.what()) != "no feasible plan") throw;
        // Report what blocks the greedy plan at the starting replication.
        const ScalingOptions opts = scaling_options(cfg, topology);
        const auto start = opts.initial_replication.value_or(std::vector<int>(topology.operator_count(), 1));
        const auto graph = compress_graph(expand_execution_graph(topology, start), cfg.compress_ratio);
        const auto ff = first_fit(graph, topology, machine, opts.constraints);
        const auto check = check_plan(ff.plan, topology, machine, opts.constraints);
        write_file(dir / "violations.json", dump(violations_to_json(check.violations)));
        err << "infeasible: no feasible plan\n";
        return kExitInfeasible;
    }
    err << "wall_ms " << std::chrono::duration<double, std::milli>(Clock::now() - started).count() << "\n";

    std::string trace;
    for (const auto& entry : outcome.trace) trace += trace_entry_to_json(entry, topology).dump() + "\n";
    write_file(dir / "trace.jsonl", trace);
    write_file(dir / "stats.json", dump(stats_to_json(outcome.stats, outcome.trace.size(), cfg.strategy)));

    if (!outcome.plan) {
        err << "infeasible: time budget exhausted before any feasible plan was found\n";
        write_file(dir / "violations.json", dump(Json::array()));
        return kExitInfeasible;
    }

    const auto check = check_plan(*outcome.plan, topology, machine, constraint_options(cfg));
    Json report = report_to_json(check.report, *outcome.plan, topology, machine);
    report["constraint_relaxed"] = outcome.constraint_relaxed;
    if (cfg.find_saturation) {
        const double rate = find_saturation_rate(topology, machine, *outcome.plan);
        report["saturation_rate"] = std::isfinite(rate) ? Json(rate) : Json(nullptr);
        out << "saturation_rate " << format_number(rate) << "\n";
    }
    write_file(dir / "plan.json", dump(plan_to_json(*outcome.plan, topology)));
    write_file(dir / "report.json", dump(report));
    out << "throughput " << format_number(check.report.throughput) << "\n";

    if (!check.feasible()) {
        write_file(dir / "violations.json", dump(violations_to_json(check.violations)));
        err << "infeasible: plan violates " << check.violations.size() << " constraint(s)\n";
        return kExitInfeasible;
    }
    if (outcome.timed_out) {
        err << "time budget exhausted; best plan so far written\n";
        return kExitTimeout;
    }
    return kExitOk;
}

int cmd_evaluate(const Config& cfg, std::ostream& out, std::ostream&) {
    std::optional<double> estimate = cfg.estimate;
    int code = kExitOk;
    if (!cfg.plan.empty()) {
        const Topology topology = parse_topology(read_file(cfg.topology));
        const MachineSpec machine = parse_machine(read_file(cfg.machine));
        const ExecutionPlan plan = parse_plan(read_file(cfg.plan), topology);
        if (!plan.is_total()) throw ValidationError("plan does not place every replica");
        const auto check = check_plan(plan, topology, machine, constraint_options(cfg));
        if (!check.report.rates.empty()) {
            print_report(out, check, plan, topology, machine);
        } else {
            // Allocation failures stop the check before rates exist.
            for (const auto& v : check.violations) out << "violation " << to_string(v.kind) << ' ' << v.subject << "\n";
        }
        if (!cfg.output.empty()) {
            Json report = check.report.rates.empty() ? Json::object() : report_to_json(check.report, plan, topology, machine);
            report["violations"] = violations_to_json(check.violations);
            write_file(cfg.output, dump(report));
        }
        if (!cfg.matrix.empty() && !check.report.rates.empty()) {
            write_file(cfg.matrix, matrix_to_csv(communication_matrix(check.report, plan)));
        }
        if (cfg.find_saturation && !check.report.rates.empty()) {
            out << "saturation_rate " << format_number(find_saturation_rate(topology, machine, plan)) << "\n";
        }
        if (!estimate && !check.report.rates.empty()) estimate = check.report.throughput;
        if (!check.feasible()) code = kExitViolation;
    } else if (!cfg.measured || !cfg.estimate) {
        throw CLI::ValidationError("evaluate", "--plan is required unless both --measured and --estimate are given");
    }
    if (cfg.measured && estimate) out << "relative_error " << fixed(relative_error(*cfg.measured, *estimate), 4) << "\n";
    return code;
}

int cmd_oracle(const Config& cfg, std::ostream& out, std::ostream&) {
    const Topology topology = parse_topology(read_file(cfg.topology));
    const MachineSpec machine = parse_machine(read_file(cfg.machine));
    const ConstraintOptions constraints = constraint_options(cfg);
    const OracleResult result = cfg.replication_limit > 0
                                    ? enumerate_full(topology, machine, cfg.replication_limit, cfg.max_per_operator, constraints)
                                    : enumerate_placements(expand_execution_graph(topology), topology, machine, constraints);
    const std::string text = dump(oracle_to_json(result, topology));
    if (cfg.output.empty()) {
        out << text;
    } else {
        write_file(cfg.output, text);
    }
    return result.best_value ? kExitOk : kExitInfeasible;
}

int cmd_montecarlo(const Config& cfg, std::ostream& out, std::ostream&) {
    const Topology topology = parse_topology(read_file(cfg.topology));
    const MachineSpec machine = parse_machine(read_file(cfg.machine));
    const ConstraintOptions constraints = constraint_options(cfg);
    const int limit = cfg.replication_limit > 0 ? cfg.replication_limit : default_replication_limit(machine);

    ScalingOptions opts = scaling_options(cfg, topology);
    opts.replication_limit = limit;
    const auto rlas = optimize(topology, machine, opts);
    const double rlas_value = rlas.plan ? check_plan(*rlas.plan, topology, machine, constraints).report.throughput : 0.0;

    const auto n = static_cast<std::size_t>(cfg.samples);
    std::vector<std::optional<double>> values(n);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
    auto work = [&](unsigned w) {
        for (std::size_t i = w; i < n; i += workers) {
            const auto plan = random_plan(topology, machine, limit, cfg.seed + i);
            const auto check = check_plan(plan, topology, machine, constraints);
            if (check.feasible()) values[i] = check.report.throughput;
        }
    };
    std::vector<std::thread> threads;
    for (unsigned w = 1; w < workers; ++w) threads.emplace_back(work, w);
    work(0);
    for (auto& t : threads) t.join();

    std::vector<double> feasible;
    for (const auto& v : values) {
        if (v) feasible.push_back(*v);
    }
    std::sort(feasible.begin(), feasible.end());
    std::string cdf = "value,cumulative_fraction\n";
    for (std::size_t i = 0; i < feasible.size(); ++i) {
        cdf += format_number(feasible[i]) + "," + format_number(static_cast<double>(i + 1) / static_cast<double>(feasible.size())) + "\n";
    }
    const auto exceeding = std::count_if(feasible.begin(), feasible.end(), [&](double v) { return v > rlas_value; });
    const fs::path dir(cfg.output_dir);
    write_file(dir / "cdf.csv", cdf);
    Json summary = {{"samples", cfg.samples},
                    {"seed", cfg.seed},
                    {"replication_limit", limit},
                    {"feasible", feasible.size()},
                    {"max_value", feasible.empty() ? Json(nullptr) : Json(feasible.back())},
                    {"rlas_value", rlas_value},
                    {"exceeding_rlas", exceeding}};
    write_file(dir / "montecarlo.json", dump(summary));
    out << "rlas " << format_number(rlas_value) << "\n";
    out << "feasible " << feasible.size() << "/" << n << "\n";
    out << "max_sampled " << (feasible.empty() ? std::string("none") : format_number(feasible.back())) << "\n";
    out << "exceeding_rlas " << exceeding << "\n";
    return kExitOk;
}

int cmd_compare(const Config& cfg, std::ostream& out, std::ostream& err) {
    const Topology topology = parse_topology(read_file(cfg.topology));
    const MachineSpec machine = parse_machine(read_file(cfg.machine));
    const ConstraintOptions constraints = constraint_options(cfg);
    const ScalingOptions opts = scaling_options(cfg, topology);
    const auto rlas = optimize(topology, machine, opts);
    if (!rlas.plan) {
        err << "infeasible: no optimized plan within the time budget\n";
        return kExitInfeasible;
    }
    const ExecutionGraph& graph = rlas.plan->graph;

    struct Row {
        std::string name;
        std::optional<ExecutionPlan> plan;
        bool relaxed = false;
    };
    std::vector<Row> rows;
    rows.push_back({"rlas", rlas.plan, false});
    auto ff = first_fit(graph, topology, machine, constraints);
    rows.push_back({"ff", std::move(ff.plan), ff.constraint_relaxed});
    rows.push_back({"rr", round_robin(graph, topology, machine).plan, false});
    SearchOptions search_options;
    search_options.time_budget = opts.time_budget;
    search_options.constraints = constraints;
    rows.push_back({"fixl", fixed_rma_search(graph, topology, machine, RmaMode::L, search_options).plan, false});
    rows.push_back({"fixu", fixed_rma_search(graph, topology, machine, RmaMode::U, search_options).plan, false});

    std::string csv = "strategy,throughput,feasible,constraint_relaxed\n";
    for (const auto& row : rows) {
        std::string value = "none";
        bool feasible = false;
        if (row.plan) {
            const auto check = check_plan(*row.plan, topology, machine, constraints);
            value = format_number(check.report.throughput);
            feasible = check.feasible();
        }
        const std::string line = row.name + "," + value + "," + (feasible ? "true" : "false") + ",constraint-relaxed=" +
                                 (row.relaxed ? "true" : "false") + "\n";
        csv += line;
    }
    if (!cfg.output.empty()) write_file(cfg.output, csv);
    out << csv;
    return kExitOk;
}

}  // namespace

std::vector<int> parse_replication_list(const std::string& text, const Topology& topology) {
    std::vector<int> replication = topology.replication();
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos) throw ValidationError("replication entry '" + item + "' is not op=k");
        const std::string count = item.substr(eq + 1);
        int k = 0;
        const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), k);
        if (ec != std::errc{} || ptr != count.data() + count.size() || k < 1) {
            throw ValidationError("replication entry '" + item + "' needs a positive count");
        }
        replication[static_cast<std::size_t>(topology.index_of(item.substr(0, eq)))] = k;
        pos = comma + 1;
    }
    return replication;
}

double find_saturation_rate(const Topology& topology, const MachineSpec& machine, const ExecutionPlan& plan) {
    const auto replication = plan.graph.replication();
    auto saturated = [&](double rate) {
        const Topology scaled(topology.operators(), topology.edges(), rate);
        const auto graph = expand_execution_graph(scaled, replication);
        return !RateModel(graph, scaled, machine).evaluate(plan.placement).bottlenecks.empty();
    };
    double hi = std::max(topology.external_rate(), 1.0);
    while (!saturated(hi)) {
        hi *= 2.0;
        if (hi > 1e18) return std::numeric_limits<double>::infinity();
    }
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > hi * 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (saturated(mid) ? hi : lo) = mid;
    }
    return lo;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Config cfg;
    CLI::App app{"NUMA-aware execution plan optimizer for streaming dataflows"};
    app.require_subcommand(1);

    auto add_inputs = [&](CLI::App* cmd) {
        cmd->add_option("--topology", cfg.topology, "Topology JSON")->required()->check(CLI::ExistingFile);
        cmd->add_option("--machine", cfg.machine, "Machine JSON")->required()->check(CLI::ExistingFile);
        cmd->add_flag("--one-core-per-replica", cfg.one_core_per_replica, "Cap replicas per socket at its core count");
    };
    auto add_search = [&](CLI::App* cmd) {
        cmd->add_option("--compress-ratio", cfg.compress_ratio, "Replicas per schedulable group")->check(CLI::PositiveNumber);
        cmd->add_option("--time-budget", cfg.time_budget_s, "Optimization budget in seconds")->check(CLI::NonNegativeNumber);
        cmd->add_option("--replication-limit", cfg.replication_limit, "Total replica cap (default sockets*cores)")
            ->check(CLI::NonNegativeNumber);
        cmd->add_flag("--warm-start", cfg.warm_start, "Seed each search with the First-Fit plan");
        cmd->add_flag("--best-fit-pruning", cfg.best_fit_pruning, "Keep only the best-fit child (heuristic)");
        cmd->add_flag("--split-on-failure", cfg.split_on_failure, "After a failed placement, try one more replica of each operator");
        cmd->add_flag("--sweep", cfg.sweep, "Scale all bottlenecks at once instead of exploring increments");
        cmd->add_option("--initial-replication", cfg.initial_replication, "Starting replication as op=k,op=k");
    };

    auto* optimize_cmd = app.add_subcommand("optimize", "Optimize replication and placement");
    add_inputs(optimize_cmd);
    add_search(optimize_cmd);
    optimize_cmd->add_option("--strategy", cfg.strategy, "rlas|ff|rr|fixl|fixu|random")
        ->check(CLI::IsMember({"rlas", "ff", "rr", "fixl", "fixu", "random"}));
    optimize_cmd->add_option("--seed", cfg.seed, "Seed for the random strategy");
    optimize_cmd->add_option("--output-dir", cfg.output_dir, "Directory for plan/report/trace/stats");
    optimize_cmd->add_flag("--find-saturation", cfg.find_saturation, "Bisect the largest unsaturated ingress rate");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a plan file");
    evaluate_cmd->add_option("--topology", cfg.topology, "Topology JSON")->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--machine", cfg.machine, "Machine JSON")->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--plan", cfg.plan, "Plan JSON")->check(CLI::ExistingFile);
    evaluate_cmd->add_flag("--one-core-per-replica", cfg.one_core_per_replica, "Cap replicas per socket at its core count");
    evaluate_cmd->add_option("--measured", cfg.measured, "Measured throughput for relative error");
    evaluate_cmd->add_option("--estimate", cfg.estimate, "Override the estimate compared against --measured");
    evaluate_cmd->add_option("--matrix", cfg.matrix, "Write the communication matrix CSV here");
    evaluate_cmd->add_option("--output", cfg.output, "Write the report JSON here");
    evaluate_cmd->add_flag("--find-saturation", cfg.find_saturation, "Bisect the largest unsaturated ingress rate");

    auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive optimum for small instances");
    add_inputs(oracle_cmd);
    oracle_cmd->add_option("--replication-limit", cfg.replication_limit, "Also enumerate replication maps up to this total");
    oracle_cmd->add_option("--max-per-operator", cfg.max_per_operator, "Per-operator replication cap");
    oracle_cmd->add_option("--output", cfg.output, "Write the result JSON here");

    auto* mc_cmd = app.add_subcommand("montecarlo", "Random plans against the optimized plan");
    add_inputs(mc_cmd);
    add_search(mc_cmd);
    mc_cmd->add_option("--samples", cfg.samples, "Number of random plans")->check(CLI::PositiveNumber);
    mc_cmd->add_option("--seed", cfg.seed, "Base seed; sample i uses seed+i");
    mc_cmd->add_option("--output-dir", cfg.output_dir, "Directory for cdf.csv and montecarlo.json");

    auto* compare_cmd = app.add_subcommand("compare", "Placement strategies at the optimized replication");
    add_inputs(compare_cmd);
    add_search(compare_cmd);
    compare_cmd->add_option("--output", cfg.output, "Write the comparison CSV here");

    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (optimize_cmd->parsed()) return cmd_optimize(cfg, out, err);
        if (evaluate_cmd->parsed()) return cmd_evaluate(cfg, out, err);
        if (oracle_cmd->parsed()) return cmd_oracle(cfg, out, err);
        if (mc_cmd->parsed()) return cmd_montecarlo(cfg, out, err);
        if (compare_cmd->parsed()) return cmd_compare(cfg, out, err);
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace numaplan
