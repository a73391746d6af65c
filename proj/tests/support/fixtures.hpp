#pragma once

#include <filesystem>
#include <string>

#include "numaplan/io.hpp"

#ifndef NUMAPLAN_TEST_DATA
#error "NUMAPLAN_TEST_DATA must point at tests/data"
#endif

namespace fixtures {

inline std::filesystem::path path(const std::string& name) { return std::filesystem::path(NUMAPLAN_TEST_DATA) / name; }

inline numaplan::Topology wc_topology() { return numaplan::parse_topology(numaplan::read_file(path("wc_topology.json"))); }

inline numaplan::MachineSpec machine_2s() { return numaplan::parse_machine(numaplan::read_file(path("machine_2s.json"))); }

inline numaplan::MachineSpec machine(int sockets, int cores, double latency, double dram = 1e12, double channel = 1e12) {
    numaplan::MachineSpec m;
    m.sockets = sockets;
    m.cores_per_socket = cores;
    m.dram_bandwidth.assign(static_cast<std::size_t>(sockets), dram);
    m.latency = numaplan::zero_matrix(static_cast<std::size_t>(sockets));
    m.channel_bandwidth = numaplan::zero_matrix(static_cast<std::size_t>(sockets));
    for (int i = 0; i < sockets; ++i) {
        for (int j = 0; j < sockets; ++j) {
            if (i == j) continue;
            m.latency[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = latency;
            m.channel_bandwidth[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = channel;
        }
    }
    return m;
}

}  // namespace fixtures
