#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "numaplan/constraints.hpp"
#include "numaplan/domain.hpp"
#include "numaplan/rate_model.hpp"

namespace numaplan {

using Clock = std::chrono::steady_clock;

/// Edge-level placement choice between a producer group and a consumer group.
struct CollocationDecision {
    int producer = 0;
    int consumer = 0;
};

struct SearchNode {
    std::vector<int> groups;     // socket per compression group, kUnplaced if pending
    std::vector<int> decisions;  // indices of pending collocation decisions
    int valid_count = 0;
    double bound = 0.0;
    std::uint64_t creation_index = 0;

    bool complete() const { return valid_count == static_cast<int>(groups.size()); }
};

struct SearchOptions {
    std::chrono::milliseconds time_budget{600'000};
    /// Absolute deadline; when set it overrides time_budget.
    std::optional<Clock::time_point> deadline;
    /// Seed the incumbent with the First-Fit plan when it is feasible.
    bool warm_start = false;
    /// Keep only the single best-fit child once a pair's predecessors are placed.
    /// Faster, but can miss the optimum.
    bool best_fit_pruning = false;
    FetchModel fetch_model = FetchModel::Numa;
    ConstraintOptions constraints;

    /// Instrumentation: called for every node that gets branched, and for every
    /// feasible solution node reached.
    std::function<void(const SearchNode&)> on_expand;
    std::function<void(const SearchNode&)> on_solution;
};

struct SearchStats {
    std::uint64_t nodes_expanded = 0;
    std::uint64_t nodes_pruned = 0;
    double best_value = 0.0;
    double wall_ms = 0.0;
    bool timed_out = false;
};

struct SearchResult {
    std::optional<Placement> placement;
    RateReport report;  // evaluated under SearchOptions::fetch_model
    SearchStats stats;

    bool found() const { return placement.has_value(); }
};

class PlacementSearch {
 public:
    PlacementSearch(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine,
                    SearchOptions options = {});

    SearchNode root() const;

    /// Relaxed throughput of the subtree under `node`; exact for a complete node.
    double bounding_value(const SearchNode& node) const;

    /// Children of a live node; infeasible children are dropped.
    std::vector<SearchNode> branch(const SearchNode& node);

    SearchResult run();

    const std::vector<CollocationDecision>& decisions() const { return decisions_; }
    Placement replica_placement(const std::vector<int>& groups) const;
    const RateModel& model() const { return model_; }

 private:
    struct Evaluation {
        double bound = 0.0;
        bool feasible = false;
        std::vector<double> outputs;
        ResourceUsage usage;
    };

    const Evaluation& evaluate(const std::vector<int>& groups) const;
    bool sockets_interchangeable(int a, int b) const { return interchangeable_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
    bool canonical(const SearchNode& node, const std::vector<int>& assignment) const;
    double group_output(const Evaluation& eval, int group) const;

    const ExecutionGraph& graph_;
    const Topology& topology_;
    const MachineSpec& machine_;
    SearchOptions options_;
    RateModel model_;
    std::vector<CollocationDecision> decisions_;
    std::vector<std::vector<int>> group_producers_;
    std::vector<std::vector<char>> interchangeable_;
    std::uint64_t next_index_ = 0;
    mutable std::map<std::vector<int>, Evaluation> cache_;
};

SearchResult search(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine,
                    const SearchOptions& options = {});

}  // namespace numaplan
