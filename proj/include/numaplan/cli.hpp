#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "numaplan/domain.hpp"

namespace numaplan {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitInfeasible = 2,
    kExitTimeout = 3,
    kExitViolation = 4,
};

/// Runs one CLI invocation; args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Largest external rate at which `plan` has no over-supplied replica, by
/// bisection. Returns +inf when no rate up to 1e18 saturates the plan.
double find_saturation_rate(const Topology& topology, const MachineSpec& machine, const ExecutionPlan& plan);

/// Parses "op=k,op=k"; unlisted operators keep the topology's count.
std::vector<int> parse_replication_list(const std::string& text, const Topology& topology);

}  // namespace numaplan
