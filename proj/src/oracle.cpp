#include "numaplan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <thread>

namespace numaplan {

unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RLAS_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
        } catch (const std::exception&) {
            // ignore malformed values
        }
    }
    return n;
}

namespace {

std::string too_large(double count) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "instance too large: m^n = " << count << " exceeds " << kOracleLimit;
    return msg.str();
}

struct ChunkBest {
    bool found = false;
    double value = 0.0;
    std::uint64_t index = 0;
    std::uint64_t feasible = 0;
};

Placement decode(std::uint64_t index, std::size_t n, int m) {
    Placement p(n, 0);
    for (std::size_t i = n; i-- > 0;) {
        p[i] = static_cast<int>(index % static_cast<std::uint64_t>(m));
        index /= static_cast<std::uint64_t>(m);
    }
    return p;
}

}  // namespace

OracleResult enumerate_placements(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine,
                                  const ConstraintOptions& constraints) {
    const std::size_t n = graph.replica_count();
    const int m = machine.sockets;
    const double space = std::pow(static_cast<double>(m), static_cast<double>(n));
    if (space > kOracleLimit) throw ModelError(too_large(space));
    const auto total = static_cast<std::uint64_t>(space);

    const RateModel model(graph, topology, machine);
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(worker_count(), total));
    std::vector<ChunkBest> chunks(workers);

    auto run_chunk = [&](unsigned w) {
        const std::uint64_t begin = total * w / workers;
        const std::uint64_t end = total * (w + 1) / workers;
        ChunkBest& best = chunks[w];
        Placement p = decode(begin, n, m);
        for (std::uint64_t idx = begin; idx < end; ++idx) {
            const auto check = check_plan(model, p, constraints);
            if (check.feasible()) {
                ++best.feasible;
                if (!best.found || check.report.throughput > best.value) {
                    best = {true, check.report.throughput, idx, best.feasible};
                }
            }
            for (std::size_t i = n; i-- > 0;) {
                if (++p[i] < m) break;
                p[i] = 0;
            }
        }
    };

    if (workers <= 1) {
        if (workers == 1) run_chunk(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run_chunk, w);
        for (auto& t : threads) t.join();
    }

    OracleResult out;
    out.total_count = total;
    out.best_plan.graph = graph;
    const ChunkBest* winner = nullptr;
    for (const auto& c : chunks) {
        out.feasible_count += c.feasible;
        if (c.found && (!winner || c.value > winner->value)) winner = &c;
    }
    if (winner) {
        out.best_value = winner->value;
        out.best_plan.placement = decode(winner->index, n, m);
    }
    return out;
}

OracleResult enumerate_full(const Topology& topology, const MachineSpec& machine, int replication_limit,
                            int max_per_operator, const ConstraintOptions& constraints) {
    const std::size_t ops = topology.operator_count();
    const int k = max_per_operator > 0 ? max_per_operator : std::max(1, replication_limit);

    // Lexicographic order over replication maps.
    std::vector<std::vector<int>> maps;
    std::vector<int> counts(ops, 0);
    auto fill = [&](auto&& self, std::size_t i, int used) -> void {
        if (i == ops) {
            maps.push_back(counts);
            return;
        }
        const int reserve = static_cast<int>(ops - i - 1);
        for (int c = 1; c <= k && used + c + reserve <= replication_limit; ++c) {
            counts[i] = c;
            self(self, i + 1, used + c);
        }
    };
    fill(fill, 0, 0);

    double space = 0.0;
    for (const auto& map : maps) {
        int replicas = 0;
        for (int c : map) replicas += c;
        space += std::pow(static_cast<double>(machine.sockets), replicas);
    }
    if (space > kOracleLimit) throw ModelError(too_large(space));

    OracleResult out;
    for (const auto& map : maps) {
        const auto graph = expand_execution_graph(topology, map);
        auto part = enumerate_placements(graph, topology, machine, constraints);
        out.total_count += part.total_count;
        out.feasible_count += part.feasible_count;
        if (part.best_value && (!out.best_value || *part.best_value > *out.best_value)) {
            out.best_value = part.best_value;
            out.best_plan = std::move(part.best_plan);
        }
    }
    return out;
}

}  // namespace numaplan
