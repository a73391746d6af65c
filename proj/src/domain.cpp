#include "numaplan/domain.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

namespace numaplan {

Matrix zero_matrix(std::size_t n) { return Matrix(n, std::vector<double>(n, 0.0)); }

namespace {

void require_non_negative(double value, const char* what, const std::string& where) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw ValidationError("negative or non-finite " + std::string(what) + " for '" + where + "'");
    }
}

std::string edge_name(const EdgeSpec& e) { return e.producer + "->" + e.consumer; }

}  // namespace

Topology::Topology(std::vector<OperatorSpec> operators, std::vector<EdgeSpec> edges, double external_rate)
    : operators_(std::move(operators)), edges_(std::move(edges)), external_rate_(external_rate) {
    if (operators_.empty()) throw ValidationError("topology has no operators");
    require_non_negative(external_rate_, "external rate", "topology");

    for (std::size_t i = 0; i < operators_.size(); ++i) {
        const auto& op = operators_[i];
        if (op.id.empty()) throw ValidationError("operator with empty id");
        if (!index_.emplace(op.id, static_cast<int>(i)).second) {
            throw ValidationError("duplicate operator id '" + op.id + "'");
        }
        require_non_negative(op.exec_cost_ns, "Te", op.id);
        require_non_negative(op.tuple_bytes, "N", op.id);
        require_non_negative(op.mem_bytes, "M", op.id);
        if (op.replication < 1) throw ValidationError("replication < 1 for '" + op.id + "'");
    }

    const std::size_t n = operators_.size();
    incoming_.assign(n, {});
    outgoing_.assign(n, {});
    std::set<std::pair<int, int>> seen;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& edge = edges_[e];
        for (const auto* end : {&edge.producer, &edge.consumer}) {
            if (!index_.contains(*end)) throw ValidationError("dangling edge endpoint '" + *end + "'");
        }
        const int s = index_.at(edge.producer);
        const int c = index_.at(edge.consumer);
        if (s == c) throw ValidationError("cycle detected at '" + edge.producer + "'");
        if (!seen.emplace(s, c).second) throw ValidationError("duplicate edge " + edge_name(edge));
        const std::string name = edge_name(edge);
        require_non_negative(edge.sigma_in, "selectivity sigma_in", name);
        require_non_negative(edge.sigma_br, "selectivity sigma_br", name);
        require_non_negative(edge.sigma_out, "selectivity sigma_out", name);
        if (edge.sigma_in > 1.0) throw ValidationError("sigma_in > 1 on edge " + name);
        if (edge.sigma_br > 1.0) throw ValidationError("sigma_br > 1 on edge " + name);
        if (!edge.partition.empty()) {
            double total = 0.0;
            for (const auto& [idx, ratio] : edge.partition) {
                if (idx < 0) throw ValidationError("negative partition index on edge " + name);
                require_non_negative(ratio, "partition ratio", name);
                total += ratio;
            }
            if (std::abs(total - 1.0) > 1e-9) throw ValidationError("partition ratios do not sum to 1 on edge " + name);
        }
        edge_ends_.emplace_back(s, c);
        outgoing_[static_cast<std::size_t>(s)].push_back(static_cast<int>(e));
        incoming_[static_cast<std::size_t>(c)].push_back(static_cast<int>(e));
    }

    std::vector<int> indegree(n, 0);
    for (const auto& [s, c] : edge_ends_) ++indegree[static_cast<std::size_t>(c)];
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i) {
        if (indegree[i] == 0) ready.push(static_cast<int>(i));
    }
    while (!ready.empty()) {
        const int op = ready.top();
        ready.pop();
        topo_order_.push_back(op);
        for (int e : outgoing_[static_cast<std::size_t>(op)]) {
            const int c = edge_ends_[static_cast<std::size_t>(e)].second;
            if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push(c);
        }
    }
    if (topo_order_.size() != n) {
        for (std::size_t i = 0; i < n; ++i) {
            if (indegree[i] > 0) throw ValidationError("cycle detected involving '" + operators_[i].id + "'");
        }
    }
    bool any_spout = false;
    bool any_sink = false;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& op = operators_[i];
        if (op.is_spout != incoming_[i].empty()) {
            throw ValidationError(op.is_spout ? "spout '" + op.id + "' has incoming edges"
                                              : "operator '" + op.id + "' has no producers but is not a spout");
        }
        if (op.is_sink != outgoing_[i].empty()) {
            throw ValidationError(op.is_sink ? "sink '" + op.id + "' has outgoing edges"
                                             : "operator '" + op.id + "' has no consumers but is not a sink");
        }
        any_spout |= op.is_spout;
        any_sink |= op.is_sink;
    }
    if (!any_spout) throw ValidationError("topology has no spout");
    if (!any_sink) throw ValidationError("topology has no sink");

    topo_rank_.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) topo_rank_[static_cast<std::size_t>(topo_order_[k])] = static_cast<int>(k);
}

int Topology::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ValidationError("unknown operator '" + id + "'");
    return it->second;
}

std::vector<int> Topology::replication() const {
    std::vector<int> out;
    out.reserve(operators_.size());
    for (const auto& op : operators_) out.push_back(op.replication);
    return out;
}

Topology Topology::with_replication(std::span<const int> replication) const {
    if (replication.size() != operators_.size()) throw ValidationError("replication map size mismatch");
    auto ops = operators_;
    for (std::size_t i = 0; i < ops.size(); ++i) ops[i].replication = replication[i];
    return Topology(std::move(ops), edges_, external_rate_);
}

void MachineSpec::validate() const {
    if (sockets <= 0) throw ValidationError("machine has zero sockets");
    if (cores_per_socket <= 0) throw ValidationError("cores_per_socket must be positive");
    if (!(core_budget_ns > 0.0)) throw ValidationError("core budget must be positive");
    if (!(cacheline_bytes > 0.0)) throw ValidationError("cacheline size must be positive");
    const auto n = static_cast<std::size_t>(sockets);
    if (dram_bandwidth.size() != n) throw ValidationError("dram bandwidth length differs from socket count");
    for (double b : dram_bandwidth) {
        if (!(b >= 0.0)) throw ValidationError("negative entry in dram bandwidth");
    }
    auto check_square = [n](const Matrix& m, const char* name) {
        if (m.size() != n) throw ValidationError(std::string("non-square matrix ") + name);
        for (const auto& row : m) {
            if (row.size() != n) throw ValidationError(std::string("non-square matrix ") + name);
            for (double v : row) {
                if (!(v >= 0.0)) throw ValidationError(std::string("negative entry in ") + name);
            }
        }
    };
    check_square(latency, "latency");
    check_square(channel_bandwidth, "channel bandwidth");
    for (std::size_t i = 0; i < n; ++i) {
        if (latency[i][i] != 0.0) throw ValidationError("nonzero latency diagonal at socket " + std::to_string(i));
    }
}

std::string ExecutionGraph::replica_id(const Topology& topology, int r) const {
    const auto& rep = replica(r);
    return topology.op(rep.op).id + "#" + std::to_string(rep.index);
}

int ExecutionGraph::replica_index(const Topology& topology, const std::string& id) const {
    const auto hash = id.rfind('#');
    if (hash == std::string::npos) throw ValidationError("malformed replica id '" + id + "'");
    const std::string op_id = id.substr(0, hash);
    const std::string idx_text = id.substr(hash + 1);
    if (!topology.contains(op_id) || idx_text.empty() ||
        !std::all_of(idx_text.begin(), idx_text.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
        throw ValidationError("unknown replica '" + id + "'");
    }
    const int op = topology.index_of(op_id);
    const int idx = std::stoi(idx_text);
    if (idx >= replication_[static_cast<std::size_t>(op)]) throw ValidationError("unknown replica '" + id + "'");
    return first_replica(op) + idx;
}

ExecutionGraph expand_execution_graph(const Topology& topology) {
    const auto rep = topology.replication();
    return expand_execution_graph(topology, rep);
}

ExecutionGraph expand_execution_graph(const Topology& topology, std::span<const int> replication) {
    const std::size_t n = topology.operator_count();
    if (replication.size() != n) throw ValidationError("replication map size mismatch");
    ExecutionGraph g;
    g.replication_.assign(replication.begin(), replication.end());
    g.first_replica_.assign(n, 0);
    for (int op : topology.topological_order()) {
        const int k = g.replication_[static_cast<std::size_t>(op)];
        if (k < 1) throw ValidationError("replication < 1 for '" + topology.op(op).id + "'");
        g.first_replica_[static_cast<std::size_t>(op)] = static_cast<int>(g.replicas_.size());
        for (int i = 0; i < k; ++i) {
            const int r = static_cast<int>(g.replicas_.size());
            g.replicas_.push_back({op, i, r});
            g.groups_.push_back({r});
            g.spout_rate_.push_back(topology.op(op).is_spout ? topology.external_rate() / k : 0.0);
        }
    }
    g.incoming_.assign(g.replicas_.size(), {});
    g.outgoing_.assign(g.replicas_.size(), {});

    // Consumer-major so that each replica's incoming list follows edge declaration order.
    for (int op : topology.topological_order()) {
        const int kc = g.replication_[static_cast<std::size_t>(op)];
        for (int e : topology.incoming(op)) {
            const auto& spec = topology.edges()[static_cast<std::size_t>(e)];
            const int s_op = topology.edge_producer(e);
            const int ks = g.replication_[static_cast<std::size_t>(s_op)];
            const bool use_override = !spec.partition.empty() && static_cast<int>(spec.partition.size()) == kc &&
                                      spec.partition.rbegin()->first == kc - 1;
            for (int ci = 0; ci < kc; ++ci) {
                const double ratio = use_override ? spec.partition.at(ci) : 1.0 / kc;
                for (int si = 0; si < ks; ++si) {
                    const int s = g.first_replica(s_op) + si;
                    const int c = g.first_replica(op) + ci;
                    const int idx = static_cast<int>(g.edges_.size());
                    g.edges_.push_back({s, c, e, ratio});
                    g.incoming_[static_cast<std::size_t>(c)].push_back(idx);
                    g.outgoing_[static_cast<std::size_t>(s)].push_back(idx);
                }
            }
        }
    }
    return g;
}

ExecutionGraph compress_graph(const ExecutionGraph& graph, int ratio) {
    if (ratio < 1) throw ValidationError("compress ratio must be >= 1");
    ExecutionGraph g = graph;
    g.groups_.clear();
    int current_op = -1;
    int filled = 0;
    for (std::size_t r = 0; r < g.replicas_.size(); ++r) {
        auto& rep = g.replicas_[r];
        if (rep.op != current_op || filled == ratio) {
            g.groups_.emplace_back();
            current_op = rep.op;
            filled = 0;
        }
        rep.group = static_cast<int>(g.groups_.size()) - 1;
        g.groups_.back().push_back(static_cast<int>(r));
        ++filled;
    }
    return g;
}

bool ExecutionPlan::is_total() const {
    return placement.size() == graph.replica_count() &&
           std::none_of(placement.begin(), placement.end(), [](int s) { return s == kUnplaced; });
}

}  // namespace numaplan
