#include <gtest/gtest.h>

#include <algorithm>

#include "numaplan/bnb_placement.hpp"
#include "numaplan/oracle.hpp"
#include "support/fixtures.hpp"
#include "support/instances.hpp"

using namespace numaplan;

namespace {

Topology chain2(double te_a, double te_b, double rate, double mem_b = 0.0) {
    return Topology({{"A", te_a, 64, 0, 1, true, false}, {"B", te_b, 64, mem_b, 1, false, true}}, {{"A", "B", 1, 1, 1, {}}}, rate);
}

// A and A' feed B, B feeds C.
Topology fragment(double te, double rate) {
    return Topology({{"A", te, 64, 0, 1, true, false},
                     {"A2", te, 64, 0, 1, true, false},
                     {"B", te, 64, 0, 1, false, false},
                     {"C", te, 64, 0, 1, false, true}},
                    {{"A", "B", 1, 1, 1, {}}, {"A2", "B", 1, 1, 1, {}}, {"B", "C", 1, 1, 1, {}}}, rate);
}

}  // namespace

TEST(Search, TwoOpChainIsCollocated) {
    const Topology t = chain2(100, 200, 1e6);
    const MachineSpec m = fixtures::machine(2, 2, 100.0);
    const auto g = expand_execution_graph(t);
    const auto r = search(g, t, m);
    ASSERT_TRUE(r.found());
    EXPECT_EQ((*r.placement)[0], (*r.placement)[1]);
    EXPECT_EQ(r.report.throughput, *enumerate_placements(g, t, m).best_value);
}

TEST(Search, FragmentSplitsWhenThreeOperatorsOverflowASocket) {
    // Each operator needs 0.3 of a core; a single-core socket holds at most three.
    const Topology t = fragment(300, 1e6);
    const MachineSpec m = fixtures::machine(2, 1, 50.0);
    const auto g = expand_execution_graph(t);
    const auto r = search(g, t, m);
    const auto oracle = enumerate_placements(g, t, m);
    ASSERT_TRUE(r.found());
    ASSERT_TRUE(oracle.best_value);
    EXPECT_EQ(r.report.throughput, *oracle.best_value);
    EXPECT_TRUE(check_plan(ExecutionPlan{g, *r.placement}, t, m).feasible());
}

TEST(Search, InfeasibleInstanceHasNoPlan) {
    // A saturated replica never exceeds its core, so DRAM traffic is the binding limit.
    const Topology t = chain2(100, 200, 1e6, 1000.0);
    const MachineSpec m = fixtures::machine(2, 1, 100.0, 1e8);
    const auto g = expand_execution_graph(t);
    EXPECT_FALSE(search(g, t, m).found());
    EXPECT_FALSE(enumerate_placements(g, t, m).best_value);
}

TEST(Bound, RootEqualsCollocatedRelaxedPlan) {
    const Topology wc = fixtures::wc_topology();
    MachineSpec big = fixtures::machine_2s();
    big.cores_per_socket = 64;
    const auto g = expand_execution_graph(wc);
    PlacementSearch s(g, wc, big);
    const auto report = evaluate_plan(ExecutionPlan{g, Placement(g.replica_count(), 0)}, wc, big);
    EXPECT_DOUBLE_EQ(s.bounding_value(s.root()), report.throughput);
}

TEST(Bound, CompleteNodeEqualsExactEvaluation) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto inst = testkit::random_instance(seed);
        const auto g = expand_execution_graph(inst.topology);
        SearchOptions opts;
        std::vector<std::pair<double, Placement>> seen;
        PlacementSearch* self = nullptr;
        opts.on_solution = [&](const SearchNode& n) {
            ASSERT_TRUE(n.complete());
            seen.emplace_back(self->bounding_value(n), self->replica_placement(n.groups));
        };
        PlacementSearch s(g, inst.topology, inst.machine, opts);
        self = &s;
        s.run();
        for (const auto& [bound, placement] : seen) {
            EXPECT_EQ(bound, evaluate_plan(ExecutionPlan{g, placement}, inst.topology, inst.machine).throughput);
        }
    }
}

TEST(Bound, FreeFetchForUnplacedConsumerDominatesRealPlacements) {
    const Topology t({{"A", 100, 64, 0, 1, true, false}, {"A2", 100, 64, 0, 1, true, false}, {"B", 300, 256, 0, 1, false, true}},
                     {{"A", "B", 1, 1, 1, {}}, {"A2", "B", 1, 1, 1, {}}}, 2e6);
    const MachineSpec m = fixtures::machine(2, 4, 200.0);
    const auto g = expand_execution_graph(t);
    PlacementSearch s(g, t, m);
    SearchNode node = s.root();
    node.groups = {0, 1, kUnplaced};
    node.valid_count = 2;
    const double bound = s.bounding_value(node);
    for (int b = 0; b < 2; ++b) {
        const double real = evaluate_plan(ExecutionPlan{g, {0, 1, b}}, t, m).throughput;
        EXPECT_GT(bound, real) << "B on socket " << b;
    }
}

TEST(Bound, AdmissibleAlongTheSearch) {
    for (std::uint64_t seed = 100; seed < 160; ++seed) {
        const auto inst = testkit::random_instance(seed);
        const auto g = expand_execution_graph(inst.topology);
        std::vector<SearchNode> expanded;
        std::vector<std::pair<std::vector<int>, double>> solutions;
        PlacementSearch* self = nullptr;
        SearchOptions opts;
        opts.on_expand = [&](const SearchNode& n) { expanded.push_back(n); };
        opts.on_solution = [&](const SearchNode& n) { solutions.emplace_back(n.groups, self->bounding_value(n)); };
        PlacementSearch s(g, inst.topology, inst.machine, opts);
        self = &s;
        s.run();
        for (const auto& node : expanded) {
            for (const auto& [groups, value] : solutions) {
                bool descends = true;
                for (std::size_t i = 0; i < groups.size(); ++i) {
                    if (node.groups[i] != kUnplaced && node.groups[i] != groups[i]) descends = false;
                }
                if (descends) EXPECT_GE(node.bound * (1 + 1e-12), value) << "seed " << seed;
            }
        }
    }
}

TEST(Branch, RootOfFragmentBranchesOnOneDecision) {
    const Topology t = fragment(100, 1e5);
    const MachineSpec m = fixtures::machine(2, 4, 100.0);
    const auto g = expand_execution_graph(t);
    PlacementSearch s(g, t, m);
    const SearchNode root = s.root();
    EXPECT_EQ(root.decisions.size(), 3u);
    EXPECT_EQ(s.decisions().size(), 3u);
    const auto children = s.branch(root);
    EXPECT_LT(children.size(), 8u);
    EXPECT_FALSE(children.empty());
    for (const auto& c : children) {
        EXPECT_EQ(c.valid_count, 2);
        EXPECT_EQ(c.decisions.size(), 2u);
    }
}

TEST(Branch, BestFitTieGoesToTighterSocket) {
    // Both sockets hold the pair at equal rate; socket 1 has less DRAM bandwidth left.
    MachineSpec m = fixtures::machine(2, 2, 100.0);
    m.dram_bandwidth = {1e12, 1e11};
    const Topology t = chain2(100, 100, 1e6, 10.0);
    const auto g = expand_execution_graph(t);
    SearchOptions opts;
    opts.best_fit_pruning = true;
    PlacementSearch s(g, t, m, opts);
    const auto children = s.branch(s.root());
    ASSERT_EQ(children.size(), 1u);
    EXPECT_EQ(children[0].groups, (std::vector<int>{1, 1}));

    PlacementSearch exact(g, t, m);
    EXPECT_EQ(exact.branch(exact.root()).size(), 4u);
}

TEST(Branch, UncollocatablePairIsSeparated) {
    const Topology t = chain2(600, 600, 1e6);
    const MachineSpec m = fixtures::machine(2, 1, 1.0);
    const auto g = expand_execution_graph(t);
    SearchOptions opts;
    opts.best_fit_pruning = true;
    PlacementSearch s(g, t, m, opts);
    const auto children = s.branch(s.root());
    ASSERT_EQ(children.size(), 1u);
    EXPECT_NE(children[0].groups[0], children[0].groups[1]);
}

TEST(Search, MatchesOracleOnRandomInstances) {
    testkit::InstanceShape shape;
    shape.max_replicas = 5;
    shape.min_sockets = 3;
    shape.max_sockets = 3;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto inst = testkit::random_instance(5000 + seed, shape);
        const auto g = expand_execution_graph(inst.topology);
        const auto r = search(g, inst.topology, inst.machine);
        const auto oracle = enumerate_placements(g, inst.topology, inst.machine);
        ASSERT_EQ(r.found(), oracle.best_value.has_value()) << "seed " << seed;
        if (r.found()) EXPECT_EQ(r.report.throughput, *oracle.best_value) << "seed " << seed;
    }
}

TEST(Search, WarmStartDoesNotChangeTheOptimum) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto inst = testkit::random_instance(seed);
        const auto g = expand_execution_graph(inst.topology);
        SearchOptions warm;
        warm.warm_start = true;
        const auto a = search(g, inst.topology, inst.machine);
        const auto b = search(g, inst.topology, inst.machine, warm);
        ASSERT_EQ(a.found(), b.found());
        if (a.found()) EXPECT_EQ(a.report.throughput, b.report.throughput) << "seed " << seed;
    }
}

TEST(Search, Deterministic) {
    const Topology wc = fixtures::wc_topology();
    const MachineSpec m = fixtures::machine_2s();
    const auto g = compress_graph(expand_execution_graph(wc, std::vector<int>{1, 2, 3, 3, 1}), 2);
    const auto a = search(g, wc, m);
    const auto b = search(g, wc, m);
    ASSERT_TRUE(a.found());
    EXPECT_EQ(*a.placement, *b.placement);
    EXPECT_EQ(a.report.throughput, b.report.throughput);
    EXPECT_EQ(a.stats.nodes_expanded, b.stats.nodes_expanded);
}

TEST(Search, ResultIsTheBestSolutionReached) {
    for (std::uint64_t seed = 200; seed < 240; ++seed) {
        const auto inst = testkit::random_instance(seed);
        const auto g = expand_execution_graph(inst.topology);
        double best = 0.0;
        PlacementSearch* self = nullptr;
        SearchOptions opts;
        opts.on_solution = [&](const SearchNode& n) { best = std::max(best, self->bounding_value(n)); };
        PlacementSearch s(g, inst.topology, inst.machine, opts);
        self = &s;
        const auto r = s.run();
        if (r.found()) {
            EXPECT_EQ(r.report.throughput, best) << "seed " << seed;
            EXPECT_EQ(r.stats.best_value, best);
        }
    }
}

TEST(Search, ExpiredDeadlineReturnsWarmStartIncumbent) {
    const Topology wc = fixtures::wc_topology();
    const MachineSpec m = fixtures::machine_2s();
    const auto g = expand_execution_graph(wc, std::vector<int>{2, 2, 3, 3, 2});
    SearchOptions opts;
    opts.warm_start = true;
    opts.deadline = Clock::now();
    const auto r = search(g, wc, m, opts);
    EXPECT_TRUE(r.stats.timed_out);
    EXPECT_TRUE(r.found());
}
