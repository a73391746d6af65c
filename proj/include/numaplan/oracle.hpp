#pragma once

#include <cstdint>
#include <optional>

#include "numaplan/constraints.hpp"
#include "numaplan/domain.hpp"

namespace numaplan {

/// Enumeration guard on the number of evaluated plans.
inline constexpr double kOracleLimit = 1e7;

struct OracleResult {
    std::optional<double> best_value;
    ExecutionPlan best_plan;
    std::uint64_t feasible_count = 0;
    std::uint64_t total_count = 0;
};

/// Every total placement of `graph`, checked with check_plan. Ties go to the
/// lexicographically smallest placement vector. Throws ModelError when m^n > 1e7.
OracleResult enumerate_placements(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine,
                                  const ConstraintOptions& constraints = {});

/// Every replication map with per-operator count <= max_per_operator and total
/// <= replication_limit, each exhausted with enumerate_placements. A
/// max_per_operator of 0 leaves only the total cap.
OracleResult enumerate_full(const Topology& topology, const MachineSpec& machine, int replication_limit,
                            int max_per_operator = 0, const ConstraintOptions& constraints = {});

/// Worker count: hardware concurrency, capped by RLAS_THREADS when set.
unsigned worker_count();

}  // namespace numaplan
