#pragma once

#include <utility>
#include <vector>

#include "numaplan/domain.hpp"

namespace numaplan {

// ---- Scalar pieces of the rate model -------------------------------------

/// Remote fetch cost per tuple: 0 when collocated, else ceil(N/S) * L[producer][consumer].
double fetch_cost(double tuple_bytes, int consumer_socket, int producer_socket, const MachineSpec& machine);

/// Demand per input tuple: fetch + sigma_br * Te.
double demand_cycles(double sigma_br, double exec_cost_ns, double fetch_ns);

/// Tuples per second one core sustains at a given demand. Throws ModelError for xi == 0.
double basic_rate(double xi_ns, const MachineSpec& machine);
double basic_rate(double xi_ns, double core_budget_ns);

/// Weighted harmonic combination sum(lambda) / sum(lambda / mu); 0 when no input arrives.
double total_rate(std::span<const double> lambdas, std::span<const double> mus);

double cooperative_rate(double total, double lambda_s, double lambda_total);

struct ActualRate {
    double rate;
    bool over_supplied;
};
ActualRate actual_rate(double cooperative, double lambda);

double output_rate(double actual, double sigma_out);

/// |measured - estimated| / measured.
double relative_error(double measured, double estimated);

// ---- Plan evaluation -----------------------------------------------------

/// How remote-fetch costs are charged. Numa is the real model; the others back
/// the fixed-RMA baselines.
enum class FetchModel {
    Numa,   // latency-weighted remote fetch
    Zero,   // remote access ignored
    Worst,  // every edge pays the worst remote latency
};

struct InputRates {
    int producer = -1;   // replica index, -1 for external ingress
    int edge = -1;       // replica edge index, -1 for external ingress
    double lambda = 0.0; // tuples/s arriving
    double fetch = 0.0;  // ns/tuple
    double xi = 0.0;     // ns/tuple
    double mu = 0.0;     // basic rate
    double cooperative = 0.0;
    double actual = 0.0;
    double output = 0.0; // r_{s,c}
};

struct ReplicaRates {
    std::vector<InputRates> inputs;
    double input_rate = 0.0;   // lambda_c
    double total_rate = 0.0;   // mu_c
    double processed = 0.0;    // sum of actual rates
    double output_rate = 0.0;  // r_c
    bool over_supplied = false;
};

struct ResourceUsage {
    std::vector<double> cpu;  // ns/s per socket
    std::vector<double> bw;   // bytes/s per socket
    Matrix channel;           // bytes/s, [producer socket][consumer socket]
    std::vector<int> replicas;  // replica count per socket

    explicit ResourceUsage(std::size_t sockets = 0)
        : cpu(sockets, 0.0), bw(sockets, 0.0), channel(zero_matrix(sockets)), replicas(sockets, 0) {}
};

struct RateReport {
    std::vector<ReplicaRates> rates;
    double throughput = 0.0;
    std::vector<int> bottlenecks;  // replica indices, ascending
    ResourceUsage usage;
};

/// Outcome of a relaxed evaluation of a partial placement.
struct Relaxation {
    double bound = 0.0;
    /// Usage of replicas whose whole ancestry is placed (exact in every completion).
    ResourceUsage closed_usage;
    /// Per-replica output rate (upper bound unless the replica is closed).
    std::vector<double> outputs;
    bool complete = false;
};

/// Evaluates plans of one execution graph. Per-edge constants are precomputed;
/// evaluation itself is pure and safe to call concurrently.
class RateModel {
 public:
    RateModel(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine,
              FetchModel fetch_model = FetchModel::Numa);

    /// Exact evaluation of a total placement; throws ModelError("partial plan") otherwise.
    RateReport evaluate(const Placement& placement) const;

    /// Optimistic evaluation: edges touching an unplaced replica fetch for free and
    /// consumers downstream of unplaced replicas take their monotone output envelope.
    Relaxation relax(const Placement& placement) const;

    double edge_fetch(int replica_edge, int producer_socket, int consumer_socket) const;

    const ExecutionGraph& graph() const { return *graph_; }
    const Topology& topology() const { return *topology_; }
    const MachineSpec& machine() const { return *machine_; }

 private:
    const ExecutionGraph* graph_;
    const Topology* topology_;
    const MachineSpec* machine_;
    FetchModel fetch_model_;
    double worst_latency_ = 0.0;
    std::vector<double> lines_;  // ceil(N/S) per replica (consumer side)
};

RateReport evaluate_plan(const ExecutionPlan& plan, const Topology& topology, const MachineSpec& machine);

/// Sum of mu_bar * fetch cost per (producer socket, consumer socket); ns/s.
Matrix communication_matrix(const RateReport& report, const ExecutionPlan& plan);

}  // namespace numaplan
