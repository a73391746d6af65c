#include "numaplan/bnb_placement.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "numaplan/baselines.hpp"

namespace numaplan {

namespace {

// Bounds within this relative distance of the incumbent are still explored so that
// rounding in the relaxed evaluation never hides a strictly better plan.
constexpr double kPruneSlack = 1e-12;

bool machine_swap_symmetric(const MachineSpec& m, std::size_t a, std::size_t b) {
    if (m.dram_bandwidth[a] != m.dram_bandwidth[b]) return false;
    if (m.latency[a][b] != m.latency[b][a] || m.channel_bandwidth[a][b] != m.channel_bandwidth[b][a]) return false;
    for (std::size_t k = 0; k < m.latency.size(); ++k) {
        if (k == a || k == b) continue;
        if (m.latency[a][k] != m.latency[b][k] || m.latency[k][a] != m.latency[k][b]) return false;
        if (m.channel_bandwidth[a][k] != m.channel_bandwidth[b][k] || m.channel_bandwidth[k][a] != m.channel_bandwidth[k][b]) {
            return false;
        }
    }
    return true;
}

}  // namespace

PlacementSearch::PlacementSearch(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine,
                                 SearchOptions options)
    : graph_(graph),
      topology_(topology),
      machine_(machine),
      options_(std::move(options)),
      model_(graph, topology, machine, options_.fetch_model) {
    std::set<std::pair<int, int>> pairs;
    group_producers_.assign(static_cast<std::size_t>(graph.group_count()), {});
    for (const auto& e : graph.edges()) {
        const int pg = graph.group_of(e.producer);
        const int cg = graph.group_of(e.consumer);
        if (pairs.emplace(pg, cg).second) {
            group_producers_[static_cast<std::size_t>(cg)].push_back(pg);
        }
    }
    // Group ids follow replica order, which is topological, so this list is
    // ordered upstream-first.
    for (const auto& [pg, cg] : pairs) decisions_.push_back({pg, cg});

    const auto n = static_cast<std::size_t>(machine.sockets);
    interchangeable_.assign(n, std::vector<char>(n, 0));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) interchangeable_[a][b] = (a == b) || machine_swap_symmetric(machine, a, b);
    }
}

Placement PlacementSearch::replica_placement(const std::vector<int>& groups) const {
    Placement placement(graph_.replica_count(), kUnplaced);
    for (std::size_t r = 0; r < placement.size(); ++r) {
        placement[r] = groups[static_cast<std::size_t>(graph_.group_of(static_cast<int>(r)))];
    }
    return placement;
}

const PlacementSearch::Evaluation& PlacementSearch::evaluate(const std::vector<int>& groups) const {
    if (auto it = cache_.find(groups); it != cache_.end()) return it->second;
    Relaxation relaxed = model_.relax(replica_placement(groups));
    Evaluation eval;
    eval.bound = relaxed.bound;
    eval.feasible = usage_fits(relaxed.closed_usage, machine_, options_.constraints);
    eval.outputs = std::move(relaxed.outputs);
    eval.usage = std::move(relaxed.closed_usage);
    return cache_.emplace(groups, std::move(eval)).first->second;
}

double PlacementSearch::group_output(const Evaluation& eval, int group) const {
    double total = 0.0;
    for (int r : graph_.group_members(group)) total += eval.outputs[static_cast<std::size_t>(r)];
    return total;
}

SearchNode PlacementSearch::root() const {
    SearchNode node;
    node.groups.assign(static_cast<std::size_t>(graph_.group_count()), kUnplaced);
    for (std::size_t d = 0; d < decisions_.size(); ++d) node.decisions.push_back(static_cast<int>(d));
    node.bound = evaluate(node.groups).bound;
    return node;
}

double PlacementSearch::bounding_value(const SearchNode& node) const { return evaluate(node.groups).bound; }

bool PlacementSearch::canonical(const SearchNode& node, const std::vector<int>& assignment) const {
    // A fresh (empty) socket must be the lowest not-yet-used member of its
    // interchangeability class; anything else mirrors a sibling already emitted.
    const auto n = static_cast<std::size_t>(machine_.sockets);
    std::vector<char> occupied(n, 0);
    for (int s : node.groups) {
        if (s != kUnplaced) occupied[static_cast<std::size_t>(s)] = 1;
    }
    std::vector<char> fresh_used(n, 0);
    for (int s : assignment) {
        const auto su = static_cast<std::size_t>(s);
        if (occupied[su] || fresh_used[su]) continue;
        for (std::size_t lower = 0; lower < su; ++lower) {
            if (!occupied[lower] && !fresh_used[lower] && interchangeable_[lower][su]) return false;
        }
        fresh_used[su] = 1;
    }
    return true;
}

std::vector<SearchNode> PlacementSearch::branch(const SearchNode& node) {
    std::vector<int> pending;
    for (int d : node.decisions) {
        const auto& dec = decisions_[static_cast<std::size_t>(d)];
        if (node.groups[static_cast<std::size_t>(dec.producer)] == kUnplaced ||
            node.groups[static_cast<std::size_t>(dec.consumer)] == kUnplaced) {
            pending.push_back(d);
        }
    }

    std::vector<int> targets;
    int producer = -1;
    int consumer = -1;
    if (!pending.empty()) {
        const auto& dec = decisions_[static_cast<std::size_t>(pending.front())];
        producer = dec.producer;
        consumer = dec.consumer;
        if (node.groups[static_cast<std::size_t>(producer)] == kUnplaced) targets.push_back(producer);
        if (node.groups[static_cast<std::size_t>(consumer)] == kUnplaced) targets.push_back(consumer);
    } else {
        // Groups with no edges at all (an isolated spout-sink) still need a socket.
        auto it = std::find(node.groups.begin(), node.groups.end(), kUnplaced);
        if (it == node.groups.end()) return {};
        targets.push_back(static_cast<int>(it - node.groups.begin()));
    }

    const bool pair = producer >= 0;
    bool best_fit = false;
    if (pair) {
        auto placed = [&](int g) { return node.groups[static_cast<std::size_t>(g)] != kUnplaced; };
        const auto& pp = group_producers_[static_cast<std::size_t>(producer)];
        const auto& cp = group_producers_[static_cast<std::size_t>(consumer)];
        best_fit = std::all_of(pp.begin(), pp.end(), placed) &&
                   std::all_of(cp.begin(), cp.end(), [&](int g) { return g == producer || placed(g); });
    }

    struct Candidate {
        SearchNode node;
        bool collocated = false;
        double pair_output = 0.0;
        double remaining_cpu = 0.0;
        double remaining_bw = 0.0;
    };
    std::vector<Candidate> candidates;

    const int m = machine_.sockets;
    std::vector<int> assignment(targets.size(), 0);
    while (true) {
        if (canonical(node, assignment)) {
            Candidate cand;
            cand.node.groups = node.groups;
            for (std::size_t i = 0; i < targets.size(); ++i) {
                cand.node.groups[static_cast<std::size_t>(targets[i])] = assignment[i];
            }
            const Evaluation& eval = evaluate(cand.node.groups);
            if (eval.feasible) {
                cand.node.bound = eval.bound;
                cand.node.valid_count = node.valid_count + static_cast<int>(targets.size());
                for (int d : pending) {
                    const auto& dec = decisions_[static_cast<std::size_t>(d)];
                    if (cand.node.groups[static_cast<std::size_t>(dec.producer)] == kUnplaced ||
                        cand.node.groups[static_cast<std::size_t>(dec.consumer)] == kUnplaced) {
                        cand.node.decisions.push_back(d);
                    }
                }
                if (pair) {
                    const int ps = cand.node.groups[static_cast<std::size_t>(producer)];
                    const auto cs = static_cast<std::size_t>(cand.node.groups[static_cast<std::size_t>(consumer)]);
                    cand.collocated = ps == static_cast<int>(cs);
                    cand.pair_output = group_output(eval, consumer);
                    cand.remaining_cpu = machine_.socket_cpu_capacity() - eval.usage.cpu[cs];
                    cand.remaining_bw = machine_.dram_bandwidth[cs] - eval.usage.bw[cs];
                }
                candidates.push_back(std::move(cand));
            }
        }
        std::size_t k = targets.size();
        while (k > 0 && ++assignment[k - 1] == m) assignment[--k] = 0;
        if (k == 0) break;
    }

    if (best_fit) {
        // Collocation first, then the pair's output rate, then the tightest socket.
        std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            return std::make_tuple(!a.collocated, -a.pair_output, a.remaining_cpu, a.remaining_bw) <
                   std::make_tuple(!b.collocated, -b.pair_output, b.remaining_cpu, b.remaining_bw);
        });
        if (options_.best_fit_pruning && candidates.size() > 1) candidates.resize(1);
    }

    std::vector<SearchNode> children;
    children.reserve(candidates.size());
    for (auto& cand : candidates) {
        cand.node.creation_index = next_index_++;
        children.push_back(std::move(cand.node));
    }
    return children;
}

SearchResult PlacementSearch::run() {
    const auto start = Clock::now();
    const auto deadline = options_.deadline.value_or(start + options_.time_budget);
    SearchResult result;

    std::optional<std::vector<int>> incumbent;
    double incumbent_value = 0.0;

    if (options_.warm_start) {
        const auto ff = first_fit(graph_, topology_, machine_, options_.constraints, options_.fetch_model);
        if (!ff.constraint_relaxed) {
            const auto check = check_plan(model_, ff.plan.placement, options_.constraints);
            if (check.feasible()) {
                std::vector<int> groups(static_cast<std::size_t>(graph_.group_count()));
                for (int g = 0; g < graph_.group_count(); ++g) {
                    groups[static_cast<std::size_t>(g)] = ff.plan.placement[static_cast<std::size_t>(graph_.group_members(g).front())];
                }
                incumbent = groups;
                incumbent_value = check.report.throughput;
            }
        }
    }

    std::vector<SearchNode> stack;
    SearchNode root_node = root();
    root_node.creation_index = next_index_++;
    if (evaluate(root_node.groups).feasible) stack.push_back(std::move(root_node));

    while (!stack.empty()) {
        if (Clock::now() >= deadline) {
            result.stats.timed_out = true;
            break;
        }
        SearchNode node = std::move(stack.back());
        stack.pop_back();
        if (incumbent && node.bound * (1.0 + kPruneSlack) <= incumbent_value) {
            ++result.stats.nodes_pruned;
            continue;
        }
        if (node.complete()) {
            if (options_.on_solution) options_.on_solution(node);
            if (!incumbent || node.bound > incumbent_value) {
                incumbent = node.groups;
                incumbent_value = node.bound;
            }
            continue;
        }
        ++result.stats.nodes_expanded;
        if (options_.on_expand) options_.on_expand(node);
        auto children = branch(node);
        // Best bound on top of the stack; ties keep creation order.
        std::stable_sort(children.begin(), children.end(), [](const SearchNode& a, const SearchNode& b) {
            if (a.bound != b.bound) return a.bound < b.bound;
            return a.creation_index > b.creation_index;
        });
        for (auto& child : children) stack.push_back(std::move(child));
    }

    if (incumbent) {
        result.placement = replica_placement(*incumbent);
        result.report = model_.evaluate(*result.placement);
        result.stats.best_value = result.report.throughput;
    }
    result.stats.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return result;
}

SearchResult search(const ExecutionGraph& graph, const Topology& topology, const MachineSpec& machine,
                    const SearchOptions& options) {
    PlacementSearch engine(graph, topology, machine, options);
    return engine.run();
}

}  // namespace numaplan
