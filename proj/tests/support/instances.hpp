#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "numaplan/domain.hpp"

namespace testkit {

struct Instance {
    numaplan::Topology topology;
    numaplan::MachineSpec machine;
};

struct InstanceShape {
    int min_ops = 2;
    int max_ops = 4;
    int max_replicas = 6;  // total across operators
    int min_sockets = 2;
    int max_sockets = 3;
    bool replicate = true;  // otherwise every operator has replication 1
};

inline numaplan::MachineSpec random_machine(std::mt19937_64& rng, int sockets) {
    std::uniform_real_distribution<double> lat(20.0, 400.0);
    std::uniform_real_distribution<double> bw(2e8, 4e9);
    std::uniform_real_distribution<double> chan(1e8, 3e9);
    std::uniform_int_distribution<int> cores(1, 2);
    numaplan::MachineSpec m;
    m.sockets = sockets;
    m.cores_per_socket = cores(rng);
    m.dram_bandwidth.assign(static_cast<std::size_t>(sockets), 0.0);
    for (auto& b : m.dram_bandwidth) b = bw(rng);
    m.latency = numaplan::zero_matrix(static_cast<std::size_t>(sockets));
    m.channel_bandwidth = numaplan::zero_matrix(static_cast<std::size_t>(sockets));
    // Half of the machines are symmetric so that socket symmetry gets exercised.
    const bool symmetric = std::bernoulli_distribution(0.5)(rng);
    const double shared_lat = lat(rng);
    const double shared_chan = chan(rng);
    for (std::size_t i = 0; i < m.latency.size(); ++i) {
        for (std::size_t j = 0; j < m.latency.size(); ++j) {
            if (i == j) continue;
            m.latency[i][j] = symmetric ? shared_lat : lat(rng);
            m.channel_bandwidth[i][j] = symmetric ? shared_chan : chan(rng);
        }
    }
    if (symmetric) {
        for (auto& b : m.dram_bandwidth) b = m.dram_bandwidth.front();
    }
    return m;
}

/// Small random DAG: operator 0 is a spout, every later operator reads from one
/// or two earlier operators, and occasionally a second spout appears.
inline Instance random_instance(std::uint64_t seed, const InstanceShape& shape = {}) {
    std::mt19937_64 rng(seed);
    const int n_ops = std::uniform_int_distribution<int>(shape.min_ops, shape.max_ops)(rng);
    std::uniform_real_distribution<double> te(50.0, 600.0);
    std::uniform_real_distribution<double> bytes(16.0, 300.0);
    std::uniform_real_distribution<double> mem(0.0, 200.0);
    std::uniform_real_distribution<double> sel_in(0.4, 1.0);
    std::uniform_real_distribution<double> sel_br(0.3, 1.0);
    std::uniform_real_distribution<double> sel_out(0.5, 3.0);

    std::vector<numaplan::EdgeSpec> edges;
    std::vector<int> has_out(static_cast<std::size_t>(n_ops), 0);
    std::vector<int> has_in(static_cast<std::size_t>(n_ops), 0);
    for (int c = 1; c < n_ops; ++c) {
        if (c == 1 && n_ops > 2 && std::bernoulli_distribution(0.2)(rng)) continue;  // second spout
        const int p1 = std::uniform_int_distribution<int>(0, c - 1)(rng);
        std::vector<int> producers{p1};
        if (c >= 2 && std::bernoulli_distribution(0.35)(rng)) {
            const int p2 = std::uniform_int_distribution<int>(0, c - 1)(rng);
            if (p2 != p1) producers.push_back(p2);
        }
        for (int p : producers) {
            numaplan::EdgeSpec e;
            e.producer = "op" + std::to_string(p);
            e.consumer = "op" + std::to_string(c);
            e.sigma_in = sel_in(rng);
            e.sigma_br = sel_br(rng);
            e.sigma_out = sel_out(rng);
            edges.push_back(e);
            has_out[static_cast<std::size_t>(p)] = 1;
            has_in[static_cast<std::size_t>(c)] = 1;
        }
    }

    std::vector<int> replication(static_cast<std::size_t>(n_ops), 1);
    if (shape.replicate) {
        int budget = std::uniform_int_distribution<int>(n_ops, std::max(n_ops, shape.max_replicas))(rng) - n_ops;
        while (budget-- > 0) ++replication[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, n_ops - 1)(rng))];
    }

    std::vector<numaplan::OperatorSpec> ops;
    for (int i = 0; i < n_ops; ++i) {
        numaplan::OperatorSpec op;
        op.id = "op" + std::to_string(i);
        op.exec_cost_ns = te(rng);
        op.tuple_bytes = bytes(rng);
        op.mem_bytes = mem(rng);
        op.replication = replication[static_cast<std::size_t>(i)];
        op.is_spout = !has_in[static_cast<std::size_t>(i)];
        op.is_sink = !has_out[static_cast<std::size_t>(i)];
        ops.push_back(op);
    }
    const double rate = std::uniform_real_distribution<double>(5e5, 6e6)(rng);
    const int sockets = std::uniform_int_distribution<int>(shape.min_sockets, shape.max_sockets)(rng);
    auto machine = random_machine(rng, sockets);
    return {numaplan::Topology(std::move(ops), std::move(edges), rate), std::move(machine)};
}

}  // namespace testkit
