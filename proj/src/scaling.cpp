#include "numaplan/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace numaplan {

int bottleneck_step(int current, double r_i, double r_o, int headroom) {
    if (!(r_i > r_o) || headroom <= 0) return current;
    const double ratio = r_o > 0.0 ? std::ceil(r_i / r_o) : static_cast<double>(headroom);
    const int inc = static_cast<int>(std::min(ratio, static_cast<double>(headroom)));
    return current + std::max(inc, 1);
}

int default_replication_limit(const MachineSpec& machine) { return machine.sockets * machine.cores_per_socket; }

namespace {

struct Pending {
    std::vector<int> replication;
    int parent = -1;
};

int total(const std::vector<int>& replication) { return std::accumulate(replication.begin(), replication.end(), 0); }

}  // namespace

ScalingResult optimize(const Topology& topology, const MachineSpec& machine, const ScalingOptions& options) {
    const int limit = options.replication_limit > 0 ? options.replication_limit : default_replication_limit(machine);
    const std::size_t ops = topology.operator_count();
    std::vector<int> start = options.initial_replication.value_or(std::vector<int>(ops, 1));
    if (start.size() != ops) throw ValidationError("initial replication must list every operator");
    if (std::any_of(start.begin(), start.end(), [](int k) { return k < 1; })) {
        throw ValidationError("initial replication must be >= 1");
    }
    if (total(start) > limit) throw ValidationError("initial replication exceeds the replication limit");
    if (options.compress_ratio < 1) throw ValidationError("compress ratio must be >= 1");

    const auto deadline = Clock::now() + options.time_budget;
    SearchOptions search_options;
    search_options.deadline = deadline;
    search_options.warm_start = options.warm_start;
    search_options.best_fit_pruning = options.best_fit_pruning;
    search_options.fetch_model = options.fetch_model;
    search_options.constraints = options.constraints;

    ScalingResult result;
    std::optional<double> incumbent;
    std::set<std::vector<int>> visited;
    std::vector<Pending> stack{{start, -1}};

    while (!stack.empty()) {
        Pending state = std::move(stack.back());
        stack.pop_back();
        if (!visited.insert(state.replication).second) continue;
        // The first search always runs, even past the deadline.
        if (!result.trace.empty() && Clock::now() >= deadline) {
            result.timed_out = true;
            break;
        }

        const ExecutionGraph graph = compress_graph(expand_execution_graph(topology, state.replication), options.compress_ratio);
        const SearchResult found = search(graph, topology, machine, search_options);
        result.stats.nodes_expanded += found.stats.nodes_expanded;
        result.stats.nodes_pruned += found.stats.nodes_pruned;
        result.stats.wall_ms += found.stats.wall_ms;

        TraceEntry entry;
        entry.iteration = static_cast<int>(result.trace.size());
        entry.parent = state.parent;
        entry.replication = state.replication;
        entry.feasible = found.found();

        std::vector<int> bottleneck_ops;
        if (found.found()) {
            entry.throughput = found.report.throughput;
            if (!incumbent || found.report.throughput > *incumbent) {
                incumbent = found.report.throughput;
                result.plan = ExecutionPlan{graph, *found.placement};
                result.report = found.report;
            }
            std::vector<char> is_bottleneck(ops, 0);
            for (int r : found.report.bottlenecks) is_bottleneck[static_cast<std::size_t>(graph.replica(r).op)] = 1;
            const auto& order = topology.topological_order();
            for (auto it = order.rbegin(); it != order.rend(); ++it) {
                if (is_bottleneck[static_cast<std::size_t>(*it)]) {
                    bottleneck_ops.push_back(*it);
                    entry.bottlenecks.push_back(topology.op(*it).id);
                }
            }
        }
        entry.incumbent = incumbent.value_or(0.0);
        result.trace.push_back(entry);

        if (found.stats.timed_out) {
            result.timed_out = true;
            break;
        }

        const int headroom = limit - total(state.replication);
        if (!found.found()) {
            // Splitting spreads an operator's load over more sockets, so a larger
            // map can be feasible where this one is not.
            if (options.split_on_failure && headroom > 0) {
                for (std::size_t op = ops; op-- > 0;) {
                    auto next = state.replication;
                    ++next[op];
                    stack.push_back({std::move(next), entry.iteration});
                }
            }
            continue;
        }
        // Every replica keeps up with its input, so no plan can produce more.
        if (bottleneck_ops.empty()) break;
        if (headroom <= 0) continue;

        auto rates_of = [&](int op) {
            double r_i = 0.0;
            double r_o = 0.0;
            const int first = graph.first_replica(op);
            for (int r = first; r < first + state.replication[static_cast<std::size_t>(op)]; ++r) {
                r_i += found.report.rates[static_cast<std::size_t>(r)].input_rate;
                r_o += found.report.rates[static_cast<std::size_t>(r)].processed;
            }
            return std::pair{r_i, r_o};
        };

        std::vector<Pending> children;
        if (options.policy == StepPolicy::Sweep) {
            auto next = state.replication;
            int room = headroom;
            for (int op : bottleneck_ops) {
                const auto [r_i, r_o] = rates_of(op);
                auto& k = next[static_cast<std::size_t>(op)];
                const int scaled = bottleneck_step(k, r_i, r_o, room);
                room -= scaled - k;
                k = scaled;
            }
            children.push_back({std::move(next), entry.iteration});
        } else {
            // Every combination of per-bottleneck increments in [0, ceil(r_i/r_o)],
            // largest steps first, within the remaining headroom.
            std::vector<int> steps;
            for (int op : bottleneck_ops) {
                const auto [r_i, r_o] = rates_of(op);
                const int current = state.replication[static_cast<std::size_t>(op)];
                steps.push_back(bottleneck_step(current, r_i, r_o, headroom) - current);
            }
            std::vector<int> inc(steps);
            while (true) {
                const int added = std::accumulate(inc.begin(), inc.end(), 0);
                if (added > 0 && added <= headroom) {
                    auto next = state.replication;
                    for (std::size_t i = 0; i < inc.size(); ++i) next[static_cast<std::size_t>(bottleneck_ops[i])] += inc[i];
                    children.push_back({std::move(next), entry.iteration});
                }
                std::size_t i = inc.size();
                while (i > 0 && inc[i - 1] == 0) {
                    inc[i - 1] = steps[i - 1];
                    --i;
                }
                if (i == 0) break;
                --inc[i - 1];
            }
        }
        for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(std::move(*it));
    }

    if (incumbent) {
        result.stats.best_value = *incumbent;
    } else if (!result.timed_out) {
        throw ModelError("no feasible plan");
    }
    result.stats.timed_out = result.timed_out;
    return result;
}

}  // namespace numaplan
