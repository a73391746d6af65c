#include <gtest/gtest.h>

#include <numeric>

#include "numaplan/domain.hpp"
#include "numaplan/io.hpp"
#include "support/fixtures.hpp"
#include "support/instances.hpp"

using namespace numaplan;

namespace {

std::vector<int> group_sizes(const ExecutionGraph& g) {
    std::vector<int> sizes;
    for (int i = 0; i < g.group_count(); ++i) sizes.push_back(static_cast<int>(g.group_members(i).size()));
    return sizes;
}

Topology two_op(int a, int b) {
    return Topology({{"A", 10, 64, 0, a, true, false}, {"B", 10, 64, 0, b, false, true}}, {{"A", "B", 1, 1, 1, {}}}, 100.0);
}

}  // namespace

TEST(ParseTopology, WordCountHasFiveOperators) {
    const Topology wc = fixtures::wc_topology();
    ASSERT_EQ(wc.operator_count(), 5u);
    EXPECT_EQ(wc.op(wc.topological_order().front()).id, "Spout");
    EXPECT_EQ(wc.op(wc.topological_order().back()).id, "Sink");
    EXPECT_DOUBLE_EQ(wc.edges()[1].sigma_out, 10.0);
}

TEST(ParseTopology, SingleSpoutSinkOperatorIsValid) {
    const Topology t = parse_topology(R"({"external_rate": 5, "operators": [{"id": "X", "Te_ns": 3, "spout": true, "sink": true}]})");
    EXPECT_EQ(t.operator_count(), 1u);
    EXPECT_TRUE(t.op(0).is_spout);
    EXPECT_TRUE(t.op(0).is_sink);
}

TEST(ParseTopology, CycleIsRejected) {
    try {
        parse_topology(read_file(fixtures::path("cycle_topology.json")));
        FAIL() << "expected a cycle error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("cycle detected"), std::string::npos) << e.what();
    }
}

TEST(ParseTopology, ErrorsNameTheOffendingId) {
    const auto message = [](const std::string& doc) {
        try {
            parse_topology(doc);
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message(R"({"external_rate": 1, "operators": [{"id": "A", "Te_ns": 1}, {"id": "A", "Te_ns": 1}]})").find("'A'"),
              std::string::npos);
    EXPECT_NE(message(R"({"external_rate": 1, "operators": [{"id": "A", "Te_ns": 1}], "edges": [{"from": "A", "to": "Z"}]})")
                  .find("dangling edge endpoint 'Z'"),
              std::string::npos);
    EXPECT_NE(message(R"({"external_rate": 1, "operators": [{"id": "A", "Te_ns": -1}]})").find("'A'"), std::string::npos);
    EXPECT_NE(message(R"({"external_rate": 1, "operators": [{"id": "A", "Te_ns": 1}, {"id": "B", "Te_ns": 1}],
                         "edges": [{"from": "A", "to": "B", "sigma_br": -0.5}]})")
                  .find("A->B"),
              std::string::npos);
    EXPECT_NE(message("{not json").find("malformed JSON"), std::string::npos);
}

TEST(ParseTopology, SerializeRoundTripIsIdentity) {
    const Topology wc = fixtures::wc_topology();
    const std::string once = dump(topology_to_json(wc));
    const std::string twice = dump(topology_to_json(parse_topology(once)));
    EXPECT_EQ(once, twice);
}

TEST(ParseMachine, TwoSocketSpecIsValid) {
    const MachineSpec m = fixtures::machine_2s();
    EXPECT_EQ(m.sockets, 2);
    EXPECT_EQ(m.cores_per_socket, 4);
    EXPECT_DOUBLE_EQ(m.latency[0][1], 100.0);
    EXPECT_DOUBLE_EQ(m.socket_cpu_capacity(), 4e9);
}

TEST(ParseMachine, NonzeroDiagonalIsRejected) {
    try {
        parse_machine(read_file(fixtures::path("machine_bad_diagonal.json")));
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("nonzero latency diagonal"), std::string::npos);
    }
}

TEST(ParseMachine, EightSocketAsymmetryPreserved) {
    const MachineSpec m = parse_machine(read_file(fixtures::path("machine_8s.json")));
    EXPECT_EQ(m.sockets, 8);
    EXPECT_DOUBLE_EQ(m.latency[0][1], 1.0);
    EXPECT_DOUBLE_EQ(m.latency[0][4], 2.0);
}

TEST(ParseMachine, ShapeErrors) {
    EXPECT_THROW(parse_machine(R"({"sockets": 0, "cores_per_socket": 1, "dram_bandwidth_Bps": [],
                                   "latency_ns_per_line": [], "channel_Bps": []})"),
                 ValidationError);
    EXPECT_THROW(parse_machine(R"({"sockets": 2, "cores_per_socket": 1, "dram_bandwidth_Bps": [1, 1],
                                   "latency_ns_per_line": [[0, 1]], "channel_Bps": [[0, 1], [1, 0]]})"),
                 ValidationError);
    EXPECT_THROW(parse_machine(R"({"sockets": 2, "cores_per_socket": 1, "dram_bandwidth_Bps": [1, 1],
                                   "latency_ns_per_line": [[0, -1], [1, 0]], "channel_Bps": [[0, 1], [1, 0]]})"),
                 ValidationError);
}

TEST(Expand, ManyProducersOneConsumer) {
    const auto g = expand_execution_graph(two_op(2, 1));
    ASSERT_EQ(g.replica_count(), 3u);
    ASSERT_EQ(g.edges().size(), 2u);
    for (const auto& e : g.edges()) {
        EXPECT_EQ(e.consumer, 2);
        EXPECT_DOUBLE_EQ(e.ratio, 1.0);
    }
}

TEST(Expand, UniformShuffle) {
    const auto g = expand_execution_graph(two_op(1, 3));
    ASSERT_EQ(g.edges().size(), 3u);
    for (const auto& e : g.edges()) {
        EXPECT_EQ(e.producer, 0);
        EXPECT_DOUBLE_EQ(e.ratio, 1.0 / 3.0);
    }
}

TEST(Expand, WordCountMeshSizes) {
    const Topology wc = fixtures::wc_topology();
    const auto g = expand_execution_graph(wc, std::vector<int>{1, 2, 3, 3, 1});
    EXPECT_EQ(g.replica_count(), 10u);
    std::vector<int> per_edge(wc.edges().size(), 0);
    for (const auto& e : g.edges()) ++per_edge[static_cast<std::size_t>(e.edge)];
    EXPECT_EQ(per_edge, (std::vector<int>{2, 6, 9, 3}));
    EXPECT_EQ(g.replica_id(wc, 1), "Parser#0");
    EXPECT_EQ(g.replica_index(wc, "Counter#2"), 8);
}

TEST(Expand, SpoutIngressSplitEvenly) {
    const Topology t = two_op(4, 1);
    const auto g = expand_execution_graph(t);
    for (int r = 0; r < 4; ++r) EXPECT_DOUBLE_EQ(g.spout_rate(r), 25.0);
    EXPECT_DOUBLE_EQ(g.spout_rate(4), 0.0);
}

TEST(Expand, PartitionOverride) {
    EdgeSpec e{"A", "B", 1, 1, 1, {{0, 0.75}, {1, 0.25}}};
    const Topology t({{"A", 10, 64, 0, 1, true, false}, {"B", 10, 64, 0, 2, false, true}}, {e}, 100.0);
    const auto g = expand_execution_graph(t);
    EXPECT_DOUBLE_EQ(g.edges()[0].ratio, 0.75);
    EXPECT_DOUBLE_EQ(g.edges()[1].ratio, 0.25);
}

TEST(Expand, PartitionRatiosSumToOneProperty) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto inst = testkit::random_instance(seed);
        const auto g = expand_execution_graph(inst.topology);
        // Each producer replica splits its output over the consumer's replicas.
        std::map<std::pair<int, int>, double> sums;
        for (const auto& e : g.edges()) sums[{e.producer, e.edge}] += e.ratio;
        for (const auto& [key, total] : sums) EXPECT_NEAR(total, 1.0, 1e-9) << "seed " << seed;
    }
}

TEST(Compress, SevenReplicasRatioFive) {
    const auto g = compress_graph(expand_execution_graph(two_op(1, 7)), 5);
    EXPECT_EQ(group_sizes(g), (std::vector<int>{1, 5, 2}));
}

TEST(Compress, RatioOneIsIdentity) {
    const auto g = compress_graph(expand_execution_graph(fixtures::wc_topology(), std::vector<int>{1, 2, 3, 3, 1}), 1);
    ASSERT_EQ(static_cast<std::size_t>(g.group_count()), g.replica_count());
    for (int r = 0; r < static_cast<int>(g.replica_count()); ++r) EXPECT_EQ(g.group_of(r), r);
}

TEST(Compress, GroupCappedByReplicaCount) {
    const auto g = compress_graph(expand_execution_graph(two_op(1, 3)), 10);
    EXPECT_EQ(group_sizes(g), (std::vector<int>{1, 3}));
    EXPECT_THROW(compress_graph(g, 0), ValidationError);
}

TEST(Plan, ParseAndSerialize) {
    const Topology wc = fixtures::wc_topology();
    const ExecutionPlan plan = parse_plan(read_file(fixtures::path("wc_plan_collocated.json")), wc);
    EXPECT_TRUE(plan.is_total());
    EXPECT_EQ(dump(plan_to_json(parse_plan(dump(plan_to_json(plan, wc)), wc), wc)), dump(plan_to_json(plan, wc)));
    EXPECT_THROW(parse_plan(R"({"placement": {"Nope#0": 0}})", wc), ValidationError);
    EXPECT_FALSE(parse_plan(R"({"placement": {"Spout#0": 0}})", wc).is_total());
}
