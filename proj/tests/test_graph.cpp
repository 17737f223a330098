#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include <qdark/graph.hpp>

using namespace qdark;

namespace {

std::vector<GraphKind> all_kinds() {
  return {kind::Path{7},          kind::Cycle{6},    kind::Complete{5}, kind::Cylinder{4, 8},
          kind::Cylinder{3, 2},   kind::Cylinder{2, 4}, kind::ErdosRenyi{12, 0.4, 99}, kind::Trimer{},
          kind::Custom{4, {{1, 2, 0.5}, {2, 4, -1.5}}}};
}

std::set<std::pair<int, int>> edge_set(const WeightedGraph& g) {
  std::set<std::pair<int, int>> s;
  for (const auto& e : g.edges()) s.insert({e.u, e.v});
  return s;
}

}  // namespace

TEST(Generators, CompleteFourHasSixEdgesOfDegreeThree) {
  const auto g = generate_graph(kind::Complete{4});
  EXPECT_EQ(g.size(), 4);
  EXPECT_EQ(g.edge_count(), 6u);
  const auto d = g.degrees();
  for (int v = 1; v <= 4; ++v) EXPECT_EQ(d[v], 3);
}

TEST(Generators, CylinderFourByEight) {
  const auto g = generate_graph(kind::Cylinder{4, 8});
  EXPECT_EQ(g.size(), 32);
  EXPECT_EQ(g.edge_count(), 60u);
  // Ring r holds nodes 4r+1..4r+4, closed periodically; rings are joined axially.
  for (int r = 0; r < 8; ++r)
    for (int q = 0; q < 4; ++q) {
      const int v = 4 * r + q + 1;
      EXPECT_TRUE(g.has_edge(v, 4 * r + (q + 1) % 4 + 1));
      if (r + 1 < 8) EXPECT_TRUE(g.has_edge(v, v + 4));
    }
  const auto d = g.degrees();
  for (int v = 1; v <= 32; ++v) EXPECT_EQ(d[v], (v <= 4 || v > 28) ? 3 : 4);
}

TEST(Generators, NarrowCylinderHasNoDoubleRingEdge) {
  const auto g = generate_graph(kind::Cylinder{2, 3});
  EXPECT_EQ(g.edge_count(), 3u + 4u);
}

TEST(Generators, TrimerMatchesItsHamiltonian) {
  const auto g = generate_graph(kind::Trimer{});
  EXPECT_EQ(g.size(), 3);
  EXPECT_EQ(edge_set(g), (std::set<std::pair<int, int>>{{1, 3}, {2, 3}}));
  for (const auto& e : g.edges()) EXPECT_EQ(e.weight, 1.0);
}

TEST(Generators, AdjacencyIsSymmetricWithZeroDiagonal) {
  for (const auto& k : all_kinds()) {
    const auto a = generate_graph(k).adjacency();
    EXPECT_EQ((a - a.transpose()).cwiseAbs().maxCoeff(), 0.0) << graph_label(k);
    EXPECT_EQ(a.diagonal().cwiseAbs().maxCoeff(), 0.0) << graph_label(k);
  }
}

TEST(Generators, RejectInvalidParameters) {
  EXPECT_THROW(generate_graph(kind::Path{0}), InvalidArgument);
  EXPECT_THROW(generate_graph(kind::Complete{-3}), InvalidArgument);
  EXPECT_THROW(generate_graph(kind::ErdosRenyi{5, 1.5, 1}), InvalidArgument);
  EXPECT_THROW(generate_graph(kind::ErdosRenyi{5, -0.1, 1}), InvalidArgument);
  EXPECT_THROW(generate_graph(kind::Cylinder{0, 3}), InvalidArgument);
}

TEST(Generators, ErdosRenyiIsDeterministicPerSeed) {
  EXPECT_EQ(generate_graph(kind::ErdosRenyi{30, 0.3, 5}), generate_graph(kind::ErdosRenyi{30, 0.3, 5}));
  EXPECT_FALSE(generate_graph(kind::ErdosRenyi{30, 0.3, 5}) == generate_graph(kind::ErdosRenyi{30, 0.3, 6}));
}

TEST(Generators, ErdosRenyiEdgeFrequenciesWithinBinomialBounds) {
  const int n = 20, samples = 10000;
  const double p = 0.3;
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < samples; ++s) count += generate_graph(kind::ErdosRenyi{n, p, 1000u + s}).adjacency();
  const double sigma = std::sqrt(p * (1 - p) / samples);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) EXPECT_LE(std::abs(count(i, j) / samples - p), 3 * sigma) << i << "," << j;
}

TEST(Graph, RejectsBadEdges) {
  WeightedGraph g(3);
  g.add_edge(1, 2);
  EXPECT_THROW(g.add_edge(2, 1), InvalidArgument);
  EXPECT_THROW(g.add_edge(3, 3), InvalidArgument);
  EXPECT_THROW(g.add_edge(0, 2), InvalidArgument);
  EXPECT_THROW(g.add_edge(1, 4), InvalidArgument);
  EXPECT_THROW(g.add_edge(1, 3, 0.0), InvalidArgument);
  EXPECT_THROW(g.add_edge(1, 3, std::nan("")), InvalidArgument);
  EXPECT_THROW(WeightedGraph(0), InvalidArgument);
}

TEST(Graph, EqualityIgnoresEdgeOrder) {
  WeightedGraph a(3), b(3);
  a.add_edge(1, 2, 0.5);
  a.add_edge(2, 3, 2.0);
  b.add_edge(3, 2, 2.0);
  b.add_edge(2, 1, 0.5);
  EXPECT_EQ(a, b);
}

TEST(Components, PathAndSplitPath) {
  auto p = generate_graph(kind::Path{5});
  EXPECT_EQ(connected_components(p).size(), 1u);
  WeightedGraph split(5);
  for (const auto& e : p.edges())
    if (!(e.u == 2 && e.v == 3)) split.add_edge(e.u, e.v);
  const auto comps = connected_components(split);
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(comps[0], (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(comps[1], (std::vector<NodeId>{3, 4, 5}));
}

TEST(Components, CompleteFourSurvivesEveryTwoEdgeRemoval) {
  const auto k4 = generate_graph(kind::Complete{4});
  const auto& e = k4.edges();
  int cases = 0;
  for (std::size_t a = 0; a < e.size(); ++a)
    for (std::size_t b = a + 1; b < e.size(); ++b) {
      WeightedGraph g(4);
      for (std::size_t c = 0; c < e.size(); ++c)
        if (c != a && c != b) g.add_edge(e[c].u, e[c].v);
      EXPECT_TRUE(is_connected(g));
      ++cases;
    }
  EXPECT_EQ(cases, 15);
}

TEST(Components, DistancesAndDiameter) {
  EXPECT_EQ(diameter(generate_graph(kind::Path{6})), 5);
  EXPECT_EQ(diameter(generate_graph(kind::Cylinder{4, 8})), 9);
  EXPECT_EQ(diameter(generate_graph(kind::Complete{7})), 1);
  const auto d = hop_distances(generate_graph(kind::Cycle{6}), 1);
  EXPECT_EQ(d[4], 3);
  EXPECT_EQ(d[6], 1);
}

TEST(RemoveLinks, ZeroIsIdentity) {
  const auto g = generate_graph(kind::Cylinder{4, 8});
  const auto r = remove_links(g, 0, 3);
  EXPECT_EQ(r.graph, g);
  EXPECT_TRUE(r.record.removed_edges.empty());
  EXPECT_TRUE(r.record.still_connected);
}

TEST(RemoveLinks, AllEdgesLeavesEmptyDisconnectedGraph) {
  const auto g = generate_graph(kind::Complete{6});
  const auto r = remove_links(g, g.edge_count(), 3);
  EXPECT_EQ(r.graph.edge_count(), 0u);
  EXPECT_EQ(r.graph.size(), 6);
  EXPECT_FALSE(r.record.still_connected);
}

TEST(RemoveLinks, DeterministicAndConsistent) {
  const auto g = generate_graph(kind::Complete{32});
  const auto a = remove_links(g, 5, 7);
  const auto b = remove_links(g, 5, 7);
  EXPECT_EQ(a.graph, b.graph);
  ASSERT_EQ(a.record.removed_edges.size(), 5u);
  EXPECT_EQ(a.record.seed, 7u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(a.record.removed_edges[i], b.record.removed_edges[i]);
    EXPECT_TRUE(g.has_edge(a.record.removed_edges[i].u, a.record.removed_edges[i].v));
    EXPECT_FALSE(a.graph.has_edge(a.record.removed_edges[i].u, a.record.removed_edges[i].v));
  }
  EXPECT_EQ(a.graph.edge_count(), g.edge_count() - 5);
  for (const auto& e : a.graph.edges()) EXPECT_TRUE(g.has_edge(e.u, e.v));
  EXPECT_THROW(remove_links(g, g.edge_count() + 1, 7), InvalidArgument);
}

TEST(RemoveLinks, DrawsAreRoughlyUniform) {
  const auto g = generate_graph(kind::Cylinder{4, 8});
  std::map<std::pair<int, int>, int> hits;
  const int trials = 6000;
  for (int s = 0; s < trials; ++s)
    for (const auto& e : remove_links(g, 3, 500u + s).record.removed_edges) ++hits[{e.u, e.v}];
  const double p = 3.0 / 60.0, sigma = std::sqrt(p * (1 - p) / trials);
  EXPECT_EQ(hits.size(), 60u);
  for (const auto& [edge, count] : hits) EXPECT_LE(std::abs(double(count) / trials - p), 4.5 * sigma);
}

TEST(TextFormat, RoundTripIsBitExact) {
  WeightedGraph g(5);
  g.add_edge(1, 2, 0.1 + 1.0 / 3.0);
  g.add_edge(2, 5, -std::sqrt(2.0));
  g.add_edge(4, 3, 1e-300);
  g.add_edge(1, 5, 123456789.123456789);
  const auto back = decode_graph(encode_graph(g));
  EXPECT_EQ(back, g);
  for (std::size_t i = 0; i < g.edges().size(); ++i) EXPECT_EQ(back.edges()[i].weight, g.edges()[i].weight);
  const auto t = generate_graph(kind::Trimer{});
  EXPECT_EQ(decode_graph(encode_graph(t)), t);
}

TEST(TextFormat, CommentsAndBlankLines) {
  const auto g = decode_graph("# a trimer\n\nN 3\n1 3 1   # left\n2 3 1\n");
  EXPECT_EQ(g, generate_graph(kind::Trimer{}));
}

TEST(TextFormat, Diagnostics) {
  try {
    decode_graph("N 3\n3 3 1.0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("self-loop"), std::string::npos);
  }
  try {
    decode_graph("N 3\n1 2 1\n2 1 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
  }
  try {
    decode_graph("N 3\n1 2 x1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 5);
  }
  EXPECT_THROW(decode_graph("1 2 1\n"), ParseError);
  EXPECT_THROW(decode_graph(""), ParseError);
  EXPECT_THROW(decode_graph("N 2\n1 2\n"), ParseError);
  EXPECT_THROW(decode_graph("N 2\n1 7 1\n"), ParseError);
}

TEST(JsonFormat, RoundTripAndValidation) {
  const auto g = generate_graph(kind::Cylinder{3, 3});
  EXPECT_EQ(graph_from_json(graph_to_json(g)), g);
  EXPECT_EQ(parse_graph(graph_to_json(g).dump()), g);
  EXPECT_EQ(parse_graph(encode_graph(g)), g);
  EXPECT_EQ(parse_graph(R"({"n_nodes": 3, "edges": [[1,3],[2,3,1.0]]})"), generate_graph(kind::Trimer{}));
  EXPECT_THROW(parse_graph(R"({"n_nodes": 3, "colour": 1})"), ParseError);
  EXPECT_THROW(parse_graph(R"({"n_nodes": 3, "edges": [[1,1]]})"), ParseError);
  EXPECT_THROW(parse_graph(R"({"n_nodes": 3, "edges": [[1,2)"), ParseError);
}
