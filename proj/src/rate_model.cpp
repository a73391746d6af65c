#include "numaplan/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace numaplan {

double fetch_cost(double tuple_bytes, int consumer_socket, int producer_socket, const MachineSpec& machine) {
    if (consumer_socket == producer_socket) return 0.0;
    const double lines = std::ceil(tuple_bytes / machine.cacheline_bytes);
    return lines * machine.latency[static_cast<std::size_t>(producer_socket)][static_cast<std::size_t>(consumer_socket)];
}

double demand_cycles(double sigma_br, double exec_cost_ns, double fetch_ns) { return fetch_ns + sigma_br * exec_cost_ns; }

double basic_rate(double xi_ns, double core_budget_ns) {
    if (!(xi_ns > 0.0)) throw ModelError("zero-cost operator");
    return core_budget_ns / xi_ns;
}

double basic_rate(double xi_ns, const MachineSpec& machine) { return basic_rate(xi_ns, machine.core_budget_ns); }

double total_rate(std::span<const double> lambdas, std::span<const double> mus) {
    double lambda_total = 0.0;
    double time = 0.0;
    int active = 0;
    double lone_mu = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] <= 0.0) continue;
        lambda_total += lambdas[i];
        time += lambdas[i] / mus[i];
        lone_mu = mus[i];
        ++active;
    }
    if (active == 0) return 0.0;
    // One active producer: the harmonic form collapses to its basic rate; skip the rounding.
    if (active == 1) return lone_mu;
    return lambda_total / time;
}

double cooperative_rate(double total, double lambda_s, double lambda_total) {
    if (lambda_total <= 0.0) return 0.0;
    return total * (lambda_s / lambda_total);
}

ActualRate actual_rate(double cooperative, double lambda) {
    return {std::min(cooperative, lambda), cooperative < lambda};
}

double output_rate(double actual, double sigma_out) { return actual * sigma_out; }

double relative_error(double measured, double estimated) {
    if (!(measured > 0.0)) throw ModelError("measured throughput must be positive");
    return std::abs(measured - estimated) / measured;
}

namespace {

/// Fills the cooperative/actual/output fields of `rr` from its inputs' lambda and mu.
void combine_exact(ReplicaRates& rr, std::span<const double> sigma_out) {
    std::vector<double> lambdas;
    std::vector<double> mus;
    lambdas.reserve(rr.inputs.size());
    mus.reserve(rr.inputs.size());
    double lambda_total = 0.0;
    for (const auto& in : rr.inputs) {
        lambdas.push_back(in.lambda);
        mus.push_back(in.mu);
        lambda_total += in.lambda;
    }
    rr.input_rate = lambda_total;
    rr.total_rate = total_rate(lambdas, mus);
    rr.processed = 0.0;
    rr.output_rate = 0.0;
    rr.over_supplied = false;
    for (std::size_t i = 0; i < rr.inputs.size(); ++i) {
        auto& in = rr.inputs[i];
        in.cooperative = cooperative_rate(rr.total_rate, in.lambda, lambda_total);
        const auto actual = actual_rate(in.cooperative, in.lambda);
        in.actual = actual.rate;
        rr.over_supplied |= actual.over_supplied;
        in.output = output_rate(in.actual, sigma_out[i]);
        rr.processed += in.actual;
        rr.output_rate += in.output;
    }
}

/// Largest total output over input rates in [0, lambda_i]: a fractional knapsack
/// where one second of core time is the capacity and edge i converts time to
/// output at sigma_out_i * mu_i.
double output_envelope(const ReplicaRates& rr, std::span<const double> sigma_out) {
    std::vector<std::size_t> order(rr.inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return sigma_out[a] * rr.inputs[a].mu > sigma_out[b] * rr.inputs[b].mu;
    });
    double capacity = 1.0;
    double value = 0.0;
    for (std::size_t i : order) {
        if (capacity <= 0.0) break;
        const auto& in = rr.inputs[i];
        const double take = std::min(in.lambda, capacity * in.mu);
        value += take * sigma_out[i];
        capacity -= take / in.mu;
    }
    return value;
}

}  // namespace

RateModel::RateModel(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine,
                     FetchModel fetch_model)
    : graph_(&graph), topology_(&topology), machine_(&machine), fetch_model_(fetch_model) {
    for (int i = 0; i < machine.sockets; ++i) {
        for (int j = 0; j < machine.sockets; ++j) {
            if (i != j) worst_latency_ = std::max(worst_latency_, machine.latency[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
    }
    lines_.reserve(graph.replica_count());
    for (const auto& rep : graph.replicas()) {
        lines_.push_back(std::ceil(topology.op(rep.op).tuple_bytes / machine.cacheline_bytes));
    }
}

double RateModel::edge_fetch(int replica_edge, int producer_socket, int consumer_socket) const {
    const auto& e = graph_->edges()[static_cast<std::size_t>(replica_edge)];
    const double lines = lines_[static_cast<std::size_t>(e.consumer)];
    switch (fetch_model_) {
        case FetchModel::Zero:
            return 0.0;
        case FetchModel::Worst:
            return lines * worst_latency_;
        case FetchModel::Numa:
            break;
    }
    if (producer_socket == consumer_socket) return 0.0;
    return lines * machine_->latency[static_cast<std::size_t>(producer_socket)][static_cast<std::size_t>(consumer_socket)];
}

namespace {

struct Pass {
    std::vector<ReplicaRates> rates;
    std::vector<char> closed;
    double throughput = 0.0;
};

}  // namespace

// Shared single topological pass. In exact mode every replica must be placed.
static Pass propagate(const RateModel& model, const Placement& placement, bool relaxed) {
    const auto& graph = model.graph();
    const auto& topology = model.topology();
    const auto& machine = model.machine();
    const std::size_t n = graph.replica_count();
    if (placement.size() != n) throw ModelError("partial plan: placement size mismatch");

    Pass pass;
    pass.rates.resize(n);
    pass.closed.assign(n, 0);
    std::vector<double> sigma_out;
    for (std::size_t r = 0; r < n; ++r) {
        const auto& rep = graph.replica(static_cast<int>(r));
        const auto& op = topology.op(rep.op);
        const int socket = placement[r];
        if (socket == kUnplaced && !relaxed) {
            throw ModelError("partial plan: replica '" + graph.replica_id(topology, static_cast<int>(r)) + "' is unplaced");
        }
        auto& rr = pass.rates[r];
        sigma_out.clear();
        bool closed = socket != kUnplaced;
        if (op.is_spout) {
            InputRates in;
            in.lambda = graph.spout_rate(static_cast<int>(r));
            in.xi = demand_cycles(1.0, op.exec_cost_ns, 0.0);
            rr.inputs.push_back(in);
            sigma_out.push_back(1.0);
        } else {
            for (int e : graph.incoming(static_cast<int>(r))) {
                const auto& edge = graph.edges()[static_cast<std::size_t>(e)];
                const auto& spec = topology.edges()[static_cast<std::size_t>(edge.edge)];
                const auto s = static_cast<std::size_t>(edge.producer);
                InputRates in;
                in.producer = edge.producer;
                in.edge = e;
                in.lambda = spec.sigma_in * pass.rates[s].output_rate * edge.ratio;
                const int ps = placement[s];
                closed = closed && pass.closed[s];
                in.fetch = (ps == kUnplaced || socket == kUnplaced) ? model.edge_fetch(e, 0, 0) : model.edge_fetch(e, ps, socket);
                in.xi = demand_cycles(spec.sigma_br, op.exec_cost_ns, in.fetch);
                rr.inputs.push_back(in);
                sigma_out.push_back(spec.sigma_out);
            }
        }
        for (auto& in : rr.inputs) {
            if (!(in.xi > 0.0)) throw ModelError("zero-cost operator '" + op.id + "'");
            in.mu = basic_rate(in.xi, machine);
        }
        combine_exact(rr, sigma_out);
        if (relaxed && !closed) rr.output_rate = std::max(rr.output_rate, output_envelope(rr, sigma_out));
        pass.closed[r] = closed ? 1 : 0;
        if (op.is_sink) pass.throughput += rr.output_rate;
    }
    return pass;
}

namespace {

void accumulate_usage(ResourceUsage& usage, const ExecutionGraph& graph, const Topology& topology,
                      const Placement& placement, std::size_t r, const ReplicaRates& rr) {
    const auto socket = static_cast<std::size_t>(placement[r]);
    const auto& op = topology.op(graph.replica(static_cast<int>(r)).op);
    double cpu = 0.0;
    for (const auto& in : rr.inputs) {
        cpu += in.actual * in.xi;
        if (in.producer >= 0) {
            const auto ps = static_cast<std::size_t>(placement[static_cast<std::size_t>(in.producer)]);
            if (ps != socket) usage.channel[ps][socket] += in.output * op.tuple_bytes;
        }
    }
    usage.cpu[socket] += cpu;
    usage.bw[socket] += rr.processed * op.mem_bytes;
    usage.replicas[socket] += 1;
}

}  // namespace

RateReport RateModel::evaluate(const Placement& placement) const {
    for (int s : placement) {
        if (s != kUnplaced && (s < 0 || s >= machine_->sockets)) throw ModelError("socket id out of range");
    }
    Pass pass = propagate(*this, placement, false);
    RateReport report;
    report.usage = ResourceUsage(static_cast<std::size_t>(machine_->sockets));
    for (std::size_t r = 0; r < pass.rates.size(); ++r) {
        accumulate_usage(report.usage, *graph_, *topology_, placement, r, pass.rates[r]);
        if (pass.rates[r].over_supplied) report.bottlenecks.push_back(static_cast<int>(r));
    }
    report.throughput = pass.throughput;
    report.rates = std::move(pass.rates);
    return report;
}

Relaxation RateModel::relax(const Placement& placement) const {
    for (int s : placement) {
        if (s != kUnplaced && (s < 0 || s >= machine_->sockets)) throw ModelError("socket id out of range");
    }
    Pass pass = propagate(*this, placement, true);
    Relaxation out;
    out.closed_usage = ResourceUsage(static_cast<std::size_t>(machine_->sockets));
    out.complete = std::none_of(placement.begin(), placement.end(), [](int s) { return s == kUnplaced; });
    out.outputs.reserve(pass.rates.size());
    for (std::size_t r = 0; r < pass.rates.size(); ++r) {
        if (pass.closed[r]) accumulate_usage(out.closed_usage, *graph_, *topology_, placement, r, pass.rates[r]);
        out.outputs.push_back(pass.rates[r].output_rate);
    }
    out.bound = pass.throughput;
    return out;
}

RateReport evaluate_plan(const ExecutionPlan& plan, const Topology& topology, const MachineSpec& machine) {
    return RateModel(plan.graph, topology, machine).evaluate(plan.placement);
}

Matrix communication_matrix(const RateReport& report, const ExecutionPlan& plan) {
    std::size_t sockets = report.usage.cpu.size();
    Matrix m = zero_matrix(sockets);
    for (std::size_t r = 0; r < report.rates.size(); ++r) {
        const auto cs = static_cast<std::size_t>(plan.placement[r]);
        for (const auto& in : report.rates[r].inputs) {
            if (in.producer < 0) continue;
            const auto ps = static_cast<std::size_t>(plan.placement[static_cast<std::size_t>(in.producer)]);
            if (ps != cs) m[ps][cs] += in.actual * in.fetch;
        }
    }
    return m;
}

}  // namespace numaplan
