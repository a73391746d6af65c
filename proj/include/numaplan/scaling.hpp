#pragma once

#include <optional>
#include <string>
#include <vector>

#include "numaplan/bnb_placement.hpp"
#include "numaplan/constraints.hpp"
#include "numaplan/domain.hpp"

namespace numaplan {

/// New replication of a bottleneck operator: current + ceil(r_i / r_o), at most
/// current + headroom. Unchanged when r_i <= r_o.
int bottleneck_step(int current, double r_i, double r_o, int headroom);

enum class StepPolicy {
    /// From every feasible state, try every combination of per-bottleneck
    /// increments in [0, ceil(r_i/r_o)] that fits the headroom. Visited maps are
    /// memoized.
    Explore,
    /// One child per state: all bottlenecks scaled by ceil(r_i/r_o) in a single
    /// sink-first sweep.
    Sweep,
};

struct ScalingOptions {
    /// Total replica cap; 0 means sockets * cores_per_socket.
    int replication_limit = 0;
    std::optional<std::vector<int>> initial_replication;
    int compress_ratio = 1;
    StepPolicy policy = StepPolicy::Explore;
    /// After a failed placement, try one more replica of each operator.
    bool split_on_failure = false;
    /// Shared by every inner search.
    std::chrono::milliseconds time_budget{600'000};
    bool warm_start = false;
    bool best_fit_pruning = false;
    FetchModel fetch_model = FetchModel::Numa;
    ConstraintOptions constraints;
};

struct TraceEntry {
    int iteration = 0;
    int parent = -1;  // iteration this map was derived from
    std::vector<int> replication;
    bool feasible = false;
    double throughput = 0.0;
    double incumbent = 0.0;
    std::vector<std::string> bottlenecks;  // operator ids
};

struct ScalingResult {
    std::optional<ExecutionPlan> plan;
    RateReport report;  // evaluated under ScalingOptions::fetch_model
    std::vector<TraceEntry> trace;
    SearchStats stats;  // summed over inner searches
    bool timed_out = false;
};

int default_replication_limit(const MachineSpec& machine);

/// Alternates placement search and bottleneck scaling from replication 1 (or the
/// initial map). Throws ModelError("no feasible plan") when the starting map has
/// no feasible placement and the budget was not exhausted.
ScalingResult optimize(const Topology& topology, const MachineSpec& machine, const ScalingOptions& options = {});

}  // namespace numaplan
