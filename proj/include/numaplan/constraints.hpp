#pragma once

#include <string>
#include <utility>
#include <vector>

#include "numaplan/domain.hpp"
#include "numaplan/rate_model.hpp"

namespace numaplan {

enum class ViolationKind { Cpu, DramBandwidth, Channel, Allocation };

std::string to_string(ViolationKind kind);

struct ConstraintViolation {
    ViolationKind kind = ViolationKind::Cpu;
    int socket = -1;     // socket, or source socket for channel violations
    int to_socket = -1;  // destination socket for channel violations
    std::string subject; // replica id for allocation violations
    double demand = 0.0;
    double capacity = 0.0;
};

struct ConstraintOptions {
    /// Cap replicas per socket at cores_per_socket (core isolation).
    bool one_core_per_replica = false;
};

/// Relative slack on capacity comparisons.
inline constexpr double kCapacitySlack = 1e-9;

inline bool within_capacity(double demand, double capacity) {
    return demand <= capacity * (1.0 + kCapacitySlack);
}

std::vector<ConstraintViolation> check_cpu(const ResourceUsage& usage, const MachineSpec& machine);
std::vector<ConstraintViolation> check_dram_bandwidth(const ResourceUsage& usage, const MachineSpec& machine);
std::vector<ConstraintViolation> check_channel(const ResourceUsage& usage, const MachineSpec& machine);
std::vector<ConstraintViolation> check_cores(const ResourceUsage& usage, const MachineSpec& machine);

inline std::vector<ConstraintViolation> check_cpu(const RateReport& r, const MachineSpec& m) { return check_cpu(r.usage, m); }
inline std::vector<ConstraintViolation> check_dram_bandwidth(const RateReport& r, const MachineSpec& m) {
    return check_dram_bandwidth(r.usage, m);
}
inline std::vector<ConstraintViolation> check_channel(const RateReport& r, const MachineSpec& m) {
    return check_channel(r.usage, m);
}

/// True when usage satisfies every capacity constraint (and the core cap if enabled).
bool usage_fits(const ResourceUsage& usage, const MachineSpec& machine, const ConstraintOptions& options = {});

struct PlanCheck {
    RateReport report;
    std::vector<ConstraintViolation> violations;

    bool feasible() const { return violations.empty(); }
};

/// Evaluates the model once and runs every check, including group co-location.
/// Throws ModelError on a partial plan.
PlanCheck check_plan(const ExecutionPlan& plan, const Topology& topology, const MachineSpec& machine,
                     const ConstraintOptions& options = {});

/// Same, reusing an existing model for the plan's graph.
PlanCheck check_plan(const RateModel& model, const Placement& placement, const ConstraintOptions& options = {});

}  // namespace numaplan
