#include "numaplan/baselines.hpp"

#include <algorithm>
#include <random>

namespace numaplan {

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Rlas:
            return "rlas";
        case StrategyKind::FirstFit:
            return "ff";
        case StrategyKind::RoundRobin:
            return "rr";
        case StrategyKind::FixL:
            return "fixl";
        case StrategyKind::FixU:
            return "fixu";
        case StrategyKind::Random:
            return "random";
    }
    return "unknown";
}

StrategyKind parse_strategy(const std::string& text) {
    for (auto kind : {StrategyKind::Rlas, StrategyKind::FirstFit, StrategyKind::RoundRobin, StrategyKind::FixL,
                      StrategyKind::FixU, StrategyKind::Random}) {
        if (to_string(kind) == text) return kind;
    }
    throw ValidationError("unknown strategy '" + text + "'");
}

BaselinePlan first_fit(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine,
                       const ConstraintOptions& constraints, FetchModel fetch_model) {
    const RateModel model(graph, topology, machine, fetch_model);
    BaselinePlan out;
    out.plan.graph = graph;
    Placement& placement = out.plan.placement;
    placement.assign(graph.replica_count(), kUnplaced);

    auto assign = [&](int group, int socket) {
        for (int r : graph.group_members(group)) placement[static_cast<std::size_t>(r)] = socket;
    };

    // Groups are numbered in replica order, which is topological, so every
    // producer is placed before its consumers and placed usage is exact.
    for (int g = 0; g < graph.group_count(); ++g) {
        std::vector<int> candidates;
        for (int r : graph.group_members(g)) {
            for (int e : graph.incoming(r)) {
                const int s = placement[static_cast<std::size_t>(graph.edges()[static_cast<std::size_t>(e)].producer)];
                if (std::find(candidates.begin(), candidates.end(), s) == candidates.end()) candidates.push_back(s);
            }
        }
        for (int s = 0; s < machine.sockets; ++s) {
            if (std::find(candidates.begin(), candidates.end(), s) == candidates.end()) candidates.push_back(s);
        }

        bool placed = false;
        for (int s : candidates) {
            assign(g, s);
            if (usage_fits(model.relax(placement).closed_usage, machine, constraints)) {
                placed = true;
                break;
            }
        }
        if (!placed) {
            assign(g, kUnplaced);
            const auto usage = model.relax(placement).closed_usage;
            const auto least = std::min_element(usage.cpu.begin(), usage.cpu.end());
            assign(g, static_cast<int>(least - usage.cpu.begin()));
            out.constraint_relaxed = true;
        }
    }
    return out;
}

BaselinePlan round_robin(const ExecutionGraph& graph, const Topology&, const MachineSpec& machine) {
    BaselinePlan out;
    out.plan.graph = graph;
    out.plan.placement.assign(graph.replica_count(), kUnplaced);
    for (int g = 0; g < graph.group_count(); ++g) {
        for (int r : graph.group_members(g)) out.plan.placement[static_cast<std::size_t>(r)] = g % machine.sockets;
    }
    return out;
}

FetchModel fetch_model_for(RmaMode mode) { return mode == RmaMode::L ? FetchModel::Worst : FetchModel::Zero; }

FixedRmaResult fixed_rma_search(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine,
                                RmaMode mode, SearchOptions options) {
    options.fetch_model = fetch_model_for(mode);
    auto result = search(graph, topology, machine, options);
    FixedRmaResult out;
    out.stats = result.stats;
    if (!result.found()) return out;
    out.internal_value = result.report.throughput;
    out.plan = ExecutionPlan{graph, *result.placement};
    out.report = RateModel(graph, topology, machine).evaluate(*result.placement);
    return out;
}

ExecutionPlan random_plan(const Topology& topology, const MachineSpec& machine, int limit, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int ops = static_cast<int>(topology.operator_count());
    std::vector<int> replication(static_cast<std::size_t>(ops), 1);
    std::uniform_int_distribution<int> pick_op(0, ops - 1);
    for (int total = ops; total < limit; ++total) ++replication[static_cast<std::size_t>(pick_op(rng))];

    ExecutionPlan plan;
    plan.graph = expand_execution_graph(topology, replication);
    std::uniform_int_distribution<int> pick_socket(0, machine.sockets - 1);
    plan.placement.resize(plan.graph.replica_count());
    for (auto& s : plan.placement) s = pick_socket(rng);
    return plan;
}

}  // namespace numaplan
