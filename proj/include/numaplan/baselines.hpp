#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "numaplan/bnb_placement.hpp"
#include "numaplan/constraints.hpp"
#include "numaplan/domain.hpp"

namespace numaplan {

enum class StrategyKind { Rlas, FirstFit, RoundRobin, FixL, FixU, Random };

std::string to_string(StrategyKind kind);
/// Parses the CLI spelling: rlas | ff | rr | fixl | fixu | random.
StrategyKind parse_strategy(const std::string& text);

struct BaselinePlan {
    ExecutionPlan plan;
    /// FF fell back to a placement that breaks a constraint.
    bool constraint_relaxed = false;
};

/// Greedy topological placement: producer's socket first, then the lowest socket
/// that fits, else the least-loaded socket (flagged as constraint-relaxed).
/// Works on compression groups, which are single replicas when uncompressed.
BaselinePlan first_fit(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine,
                       const ConstraintOptions& constraints = {}, FetchModel fetch_model = FetchModel::Numa);

/// Groups in topological order dealt to sockets 0, 1, ..., n-1, 0, ...
BaselinePlan round_robin(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine);

enum class RmaMode { L, U };

struct FixedRmaResult {
    std::optional<ExecutionPlan> plan;
    double internal_value = 0.0;  // throughput under the fixed-RMA model
    RateReport report;            // true-model re-evaluation
    SearchStats stats;
};

FetchModel fetch_model_for(RmaMode mode);

/// B&B placement of a fixed graph under the fixed-RMA cost model, re-evaluated
/// with the true model.
FixedRmaResult fixed_rma_search(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine,
                                RmaMode mode, SearchOptions options = {});

/// Random replication (grown one unit at a time on a uniformly chosen operator until
/// the total hits `limit`) and uniform random placement; constraints are ignored.
ExecutionPlan random_plan(const Topology& topology, const MachineSpec& machine, int limit, std::uint64_t seed);

}  // namespace numaplan
