#include "numaplan/constraints.hpp"

namespace numaplan {

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::Cpu:
            return "cpu";
        case ViolationKind::DramBandwidth:
            return "dram_bandwidth";
        case ViolationKind::Channel:
            return "channel";
        case ViolationKind::Allocation:
            return "allocation";
    }
    return "unknown";
}

std::vector<ConstraintViolation> check_cpu(const ResourceUsage& usage, const MachineSpec& machine) {
    std::vector<ConstraintViolation> out;
    const double capacity = machine.socket_cpu_capacity();
    for (std::size_t i = 0; i < usage.cpu.size(); ++i) {
        if (!within_capacity(usage.cpu[i], capacity)) {
            out.push_back({ViolationKind::Cpu, static_cast<int>(i), -1, {}, usage.cpu[i], capacity});
        }
    }
    return out;
}

std::vector<ConstraintViolation> check_dram_bandwidth(const ResourceUsage& usage, const MachineSpec& machine) {
    std::vector<ConstraintViolation> out;
    for (std::size_t i = 0; i < usage.bw.size(); ++i) {
        const double capacity = machine.dram_bandwidth[i];
        if (!within_capacity(usage.bw[i], capacity)) {
            out.push_back({ViolationKind::DramBandwidth, static_cast<int>(i), -1, {}, usage.bw[i], capacity});
        }
    }
    return out;
}

std::vector<ConstraintViolation> check_channel(const ResourceUsage& usage, const MachineSpec& machine) {
    std::vector<ConstraintViolation> out;
    for (std::size_t i = 0; i < usage.channel.size(); ++i) {
        for (std::size_t j = 0; j < usage.channel[i].size(); ++j) {
            if (i == j) continue;
            const double capacity = machine.channel_bandwidth[i][j];
            if (!within_capacity(usage.channel[i][j], capacity)) {
                out.push_back({ViolationKind::Channel, static_cast<int>(i), static_cast<int>(j), {}, usage.channel[i][j], capacity});
            }
        }
    }
    return out;
}

std::vector<ConstraintViolation> check_cores(const ResourceUsage& usage, const MachineSpec& machine) {
    std::vector<ConstraintViolation> out;
    for (std::size_t i = 0; i < usage.replicas.size(); ++i) {
        if (usage.replicas[i] > machine.cores_per_socket) {
            out.push_back({ViolationKind::Allocation, static_cast<int>(i), -1, "cores", static_cast<double>(usage.replicas[i]),
                           static_cast<double>(machine.cores_per_socket)});
        }
    }
    return out;
}

bool usage_fits(const ResourceUsage& usage, const MachineSpec& machine, const ConstraintOptions& options) {
    const double cpu_capacity = machine.socket_cpu_capacity();
    for (std::size_t i = 0; i < usage.cpu.size(); ++i) {
        if (!within_capacity(usage.cpu[i], cpu_capacity)) return false;
        if (!within_capacity(usage.bw[i], machine.dram_bandwidth[i])) return false;
        if (options.one_core_per_replica && usage.replicas[i] > machine.cores_per_socket) return false;
        for (std::size_t j = 0; j < usage.channel.size(); ++j) {
            if (i != j && !within_capacity(usage.channel[i][j], machine.channel_bandwidth[i][j])) return false;
        }
    }
    return true;
}

PlanCheck check_plan(const RateModel& model, const Placement& placement, const ConstraintOptions& options) {
    const auto& graph = model.graph();
    const auto& topology = model.topology();
    const auto& machine = model.machine();
    if (placement.size() != graph.replica_count()) throw ModelError("partial plan: placement size mismatch");

    PlanCheck out;
    for (std::size_t r = 0; r < placement.size(); ++r) {
        const int s = placement[r];
        if (s == kUnplaced) {
            throw ModelError("partial plan: replica '" + graph.replica_id(topology, static_cast<int>(r)) + "' is unplaced");
        }
        if (s < 0 || s >= machine.sockets) {
            out.violations.push_back({ViolationKind::Allocation, s, -1, graph.replica_id(topology, static_cast<int>(r)), 1.0, 0.0});
        }
    }
    if (!out.violations.empty()) return out;

    for (int g = 0; g < graph.group_count(); ++g) {
        const auto& members = graph.group_members(g);
        const int anchor = placement[static_cast<std::size_t>(members.front())];
        for (int r : members) {
            if (placement[static_cast<std::size_t>(r)] != anchor) {
                out.violations.push_back({ViolationKind::Allocation, placement[static_cast<std::size_t>(r)], anchor,
                                          graph.replica_id(topology, r), 2.0, 1.0});
            }
        }
    }

    out.report = model.evaluate(placement);
    for (auto&& list : {check_cpu(out.report.usage, machine), check_dram_bandwidth(out.report.usage, machine),
                        check_channel(out.report.usage, machine)}) {
        out.violations.insert(out.violations.end(), list.begin(), list.end());
    }
    if (options.one_core_per_replica) {
        auto cores = check_cores(out.report.usage, machine);
        out.violations.insert(out.violations.end(), cores.begin(), cores.end());
    }
    return out;
}

PlanCheck check_plan(const ExecutionPlan& plan, const Topology& topology, const MachineSpec& machine,
                     const ConstraintOptions& options) {
    const RateModel model(plan.graph, topology, machine);
    return check_plan(model, plan.placement, options);
}

}  // namespace numaplan
