#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace numaplan {

/// Raised for malformed or invariant-violating inputs (topology, machine, plan files).
class ValidationError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

/// Raised when a model evaluation is requested on inputs it cannot handle
/// (partial plans, zero-cost operators).
class ModelError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

using Matrix = std::vector<std::vector<double>>;

Matrix zero_matrix(std::size_t n);

struct OperatorSpec {
    std::string id;
    double exec_cost_ns = 0.0;   // T^e, ns per processed tuple
    double tuple_bytes = 0.0;    // N, bytes fetched per input tuple
    double mem_bytes = 0.0;      // M, DRAM bytes per processed tuple
    int replication = 1;
    bool is_spout = false;
    bool is_sink = false;
};

struct EdgeSpec {
    std::string producer;
    std::string consumer;
    double sigma_in = 1.0;
    double sigma_br = 1.0;
    double sigma_out = 1.0;
    // Optional consumer-replica index -> partition ratio override.
    std::map<int, double> partition;
};

/// Validated logical dataflow DAG. Immutable after construction.
class Topology {
 public:
    Topology(std::vector<OperatorSpec> operators, std::vector<EdgeSpec> edges, double external_rate);

    const std::vector<OperatorSpec>& operators() const { return operators_; }
    const std::vector<EdgeSpec>& edges() const { return edges_; }
    double external_rate() const { return external_rate_; }

    std::size_t operator_count() const { return operators_.size(); }
    const OperatorSpec& op(int index) const { return operators_[static_cast<std::size_t>(index)]; }

    /// Index of an operator id; throws ValidationError if unknown.
    int index_of(const std::string& id) const;
    bool contains(const std::string& id) const { return index_.contains(id); }

    /// Operator indices in a deterministic topological order (Kahn, ties by declaration order).
    const std::vector<int>& topological_order() const { return topo_order_; }
    /// Position of each operator within topological_order().
    int topo_rank(int op) const { return topo_rank_[static_cast<std::size_t>(op)]; }

    /// Edge indices entering / leaving an operator, in declaration order.
    const std::vector<int>& incoming(int op) const { return incoming_[static_cast<std::size_t>(op)]; }
    const std::vector<int>& outgoing(int op) const { return outgoing_[static_cast<std::size_t>(op)]; }
    int edge_producer(int edge) const { return edge_ends_[static_cast<std::size_t>(edge)].first; }
    int edge_consumer(int edge) const { return edge_ends_[static_cast<std::size_t>(edge)].second; }

    std::vector<int> replication() const;
    /// Same DAG with the replication counts replaced.
    Topology with_replication(std::span<const int> replication) const;

 private:
    std::vector<OperatorSpec> operators_;
    std::vector<EdgeSpec> edges_;
    double external_rate_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::pair<int, int>> edge_ends_;
    std::vector<std::vector<int>> incoming_;
    std::vector<std::vector<int>> outgoing_;
    std::vector<int> topo_order_;
    std::vector<int> topo_rank_;
};

/// Machine description. Latency is ns per cache line moved from socket i to socket j.
struct MachineSpec {
    int sockets = 0;
    int cores_per_socket = 0;
    double core_budget_ns = 1e9;
    std::vector<double> dram_bandwidth;
    Matrix latency;
    Matrix channel_bandwidth;
    double cacheline_bytes = 64.0;

    double socket_cpu_capacity() const { return core_budget_ns * cores_per_socket; }
    /// Throws ValidationError describing the first broken invariant.
    void validate() const;
};

struct Replica {
    int op = 0;
    int index = 0;
    int group = 0;
};

struct ReplicaEdge {
    int producer = 0;   // replica index
    int consumer = 0;   // replica index
    int edge = 0;       // logical edge index
    double ratio = 1.0; // partition ratio p(s, c_e)
};

/// Replica-level expansion of a Topology. Replicas of one operator are contiguous
/// and operators appear in topological order, so replica order is topological.
class ExecutionGraph {
 public:
    ExecutionGraph() = default;

    const std::vector<int>& replication() const { return replication_; }
    const std::vector<Replica>& replicas() const { return replicas_; }
    const std::vector<ReplicaEdge>& edges() const { return edges_; }
    std::size_t replica_count() const { return replicas_.size(); }
    const Replica& replica(int r) const { return replicas_[static_cast<std::size_t>(r)]; }

    const std::vector<int>& incoming(int r) const { return incoming_[static_cast<std::size_t>(r)]; }
    const std::vector<int>& outgoing(int r) const { return outgoing_[static_cast<std::size_t>(r)]; }
    /// First replica of operator `op`; its replicas are [first, first + replication).
    int first_replica(int op) const { return first_replica_[static_cast<std::size_t>(op)]; }
    /// External ingress assigned to a spout replica (0 for others).
    double spout_rate(int r) const { return spout_rate_[static_cast<std::size_t>(r)]; }

    int group_count() const { return static_cast<int>(groups_.size()); }
    const std::vector<int>& group_members(int g) const { return groups_[static_cast<std::size_t>(g)]; }
    int group_of(int r) const { return replica(r).group; }

    std::string replica_id(const Topology& topology, int r) const;
    /// Replica index from "<op>#<index>"; throws ValidationError if unknown.
    int replica_index(const Topology& topology, const std::string& id) const;

 private:
    friend ExecutionGraph expand_execution_graph(const Topology&, std::span<const int>);
    friend ExecutionGraph compress_graph(const ExecutionGraph&, int);

    std::vector<int> replication_;
    std::vector<Replica> replicas_;
    std::vector<ReplicaEdge> edges_;
    std::vector<std::vector<int>> incoming_;
    std::vector<std::vector<int>> outgoing_;
    std::vector<int> first_replica_;
    std::vector<double> spout_rate_;
    std::vector<std::vector<int>> groups_;
};

ExecutionGraph expand_execution_graph(const Topology& topology);
ExecutionGraph expand_execution_graph(const Topology& topology, std::span<const int> replication);

/// Groups up to `ratio` replicas of the same operator into one schedulable unit.
ExecutionGraph compress_graph(const ExecutionGraph& graph, int ratio);

inline constexpr int kUnplaced = -1;

/// Socket per replica; kUnplaced while a plan is partial.
using Placement = std::vector<int>;

struct ExecutionPlan {
    ExecutionGraph graph;
    Placement placement;

    bool is_total() const;
};

}  // namespace numaplan
