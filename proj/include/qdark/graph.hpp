#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "error.hpp"
#include "format.hpp"

namespace qdark {

// Site labels are 1-based, matching the usual |1>, ..., |N> notation.
using NodeId = int;

struct Edge {
  NodeId u = 0;  // u < v
  NodeId v = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected, loop-free graph with nonzero finite edge weights (the coupling
// rates). Edges keep insertion order so that text round trips are stable.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  explicit WeightedGraph(int n_nodes) : n_(n_nodes) {
    if (n_nodes < 1) throw InvalidArgument("graph needs at least one node");
  }

  int size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  void add_edge(NodeId i, NodeId j, double weight = 1.0) {
    if (i < 1 || i > n_ || j < 1 || j > n_)
      throw InvalidArgument("edge {" + std::to_string(i) + "," + std::to_string(j) +
                            "} references a node outside 1.." + std::to_string(n_));
    if (i == j) throw InvalidArgument("self-loop on node " + std::to_string(i));
    if (!std::isfinite(weight) || weight == 0.0)
      throw InvalidArgument("edge weight must be finite and nonzero");
    if (i > j) std::swap(i, j);
    if (!keys_.insert(key(i, j)).second)
      throw InvalidArgument("duplicate edge {" + std::to_string(i) + "," + std::to_string(j) + "}");
    edges_.push_back({i, j, weight});
  }

  bool has_edge(NodeId i, NodeId j) const {
    if (i > j) std::swap(i, j);
    return keys_.count(key(i, j)) != 0;
  }

  Eigen::MatrixXd adjacency() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& e : edges_) {
      a(e.u - 1, e.v - 1) = e.weight;
      a(e.v - 1, e.u - 1) = e.weight;
    }
    return a;
  }

  std::vector<std::vector<NodeId>> neighbours() const {
    std::vector<std::vector<NodeId>> out(n_ + 1);
    for (const auto& e : edges_) {
      out[e.u].push_back(e.v);
      out[e.v].push_back(e.u);
    }
    return out;
  }

  std::vector<int> degrees() const {
    std::vector<int> d(n_ + 1, 0);
    for (const auto& e : edges_) {
      ++d[e.u];
      ++d[e.v];
    }
    return d;
  }

  // Same node count and the same weighted edge set, regardless of order.
  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    if (a.n_ != b.n_ || a.edges_.size() != b.edges_.size()) return false;
    auto sorted = [](std::vector<Edge> e) {
      std::sort(e.begin(), e.end(),
                [](const Edge& x, const Edge& y) { return std::pair(x.u, x.v) < std::pair(y.u, y.v); });
      return e;
    };
    return sorted(a.edges_) == sorted(b.edges_);
  }

 private:
  static std::uint64_t key(NodeId i, NodeId j) {
    return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j);
  }

  int n_ = 0;
  std::vector<Edge> edges_;
  std::unordered_set<std::uint64_t> keys_;
};

// ---------------------------------------------------------------------------
// Generators

namespace kind {
struct Path { int n; };
struct Cycle { int n; };
struct Complete { int n; };
// Cartesian product of the cycle C_c (periodic direction) with the path P_l.
// Node (ring r, position q) has id r*c + q + 1, rings r = 0..l-1.
struct Cylinder { int c; int l; };
struct ErdosRenyi { int n; double p; std::uint64_t seed; };
// Three sites, target |3> coupled to |1> and |2>.
struct Trimer {};
struct Custom { int n; std::vector<Edge> edges; };
}  // namespace kind

using GraphKind = std::variant<kind::Path, kind::Cycle, kind::Complete, kind::Cylinder,
                               kind::ErdosRenyi, kind::Trimer, kind::Custom>;

namespace detail {

inline void require_size(int n) {
  if (n < 1) throw InvalidArgument("invalid graph size " + std::to_string(n));
}

inline void add_ring(WeightedGraph& g, std::span<const NodeId> ring) {
  const auto c = static_cast<int>(ring.size());
  if (c == 2) g.add_edge(ring[0], ring[1]);
  if (c < 3) return;
  for (int q = 0; q < c; ++q) {
    NodeId a = ring[q], b = ring[(q + 1) % c];
    g.add_edge(a, b);
  }
}

}  // namespace detail

inline WeightedGraph generate_graph(const GraphKind& spec) {
  return std::visit(
      [](const auto& k) -> WeightedGraph {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, kind::Path>) {
          detail::require_size(k.n);
          WeightedGraph g(k.n);
          for (int i = 1; i < k.n; ++i) g.add_edge(i, i + 1);
          return g;
        } else if constexpr (std::is_same_v<K, kind::Cycle>) {
          detail::require_size(k.n);
          WeightedGraph g(k.n);
          std::vector<NodeId> ring(k.n);
          std::iota(ring.begin(), ring.end(), 1);
          detail::add_ring(g, ring);
          return g;
        } else if constexpr (std::is_same_v<K, kind::Complete>) {
          detail::require_size(k.n);
          WeightedGraph g(k.n);
          for (int i = 1; i <= k.n; ++i)
            for (int j = i + 1; j <= k.n; ++j) g.add_edge(i, j);
          return g;
        } else if constexpr (std::is_same_v<K, kind::Cylinder>) {
          if (k.c < 1 || k.l < 1)
            throw InvalidArgument("invalid cylinder " + std::to_string(k.c) + "x" + std::to_string(k.l));
          WeightedGraph g(k.c * k.l);
          auto id = [&](int r, int q) { return r * k.c + q + 1; };
          for (int r = 0; r < k.l; ++r) {
            std::vector<NodeId> ring(k.c);
            for (int q = 0; q < k.c; ++q) ring[q] = id(r, q);
            detail::add_ring(g, ring);
          }
          for (int r = 0; r + 1 < k.l; ++r)
            for (int q = 0; q < k.c; ++q) g.add_edge(id(r, q), id(r + 1, q));
          return g;
        } else if constexpr (std::is_same_v<K, kind::ErdosRenyi>) {
          detail::require_size(k.n);
          if (!(k.p >= 0.0 && k.p <= 1.0))
            throw InvalidArgument("edge probability outside [0,1]");
          WeightedGraph g(k.n);
          std::mt19937_64 rng(k.seed);
          std::uniform_real_distribution<double> u(0.0, 1.0);
          for (int i = 1; i <= k.n; ++i)
            for (int j = i + 1; j <= k.n; ++j)
              if (u(rng) < k.p) g.add_edge(i, j);
          return g;
        } else if constexpr (std::is_same_v<K, kind::Trimer>) {
          WeightedGraph g(3);
          g.add_edge(1, 3);
          g.add_edge(2, 3);
          return g;
        } else {
          detail::require_size(k.n);
          WeightedGraph g(k.n);
          for (const auto& e : k.edges) g.add_edge(e.u, e.v, e.weight);
          return g;
        }
      },
      spec);
}

// Short label used in file names, e.g. "complete32" or "cylinder4x8".
inline std::string graph_label(const GraphKind& spec) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, kind::Path>) return "path" + std::to_string(k.n);
        else if constexpr (std::is_same_v<K, kind::Cycle>) return "cycle" + std::to_string(k.n);
        else if constexpr (std::is_same_v<K, kind::Complete>) return "complete" + std::to_string(k.n);
        else if constexpr (std::is_same_v<K, kind::Cylinder>)
          return "cylinder" + std::to_string(k.c) + "x" + std::to_string(k.l);
        else if constexpr (std::is_same_v<K, kind::ErdosRenyi>)
          return "er" + std::to_string(k.n) + "p" + format_double(k.p);
        else if constexpr (std::is_same_v<K, kind::Trimer>) return "trimer";
        else return "custom" + std::to_string(k.n);
      },
      spec);
}

// ---------------------------------------------------------------------------
// Connectivity

inline std::vector<std::vector<NodeId>> connected_components(const WeightedGraph& g) {
  const auto adj = g.neighbours();
  std::vector<int> seen(g.size() + 1, 0);
  std::vector<std::vector<NodeId>> comps;
  for (NodeId s = 1; s <= g.size(); ++s) {
    if (seen[s]) continue;
    std::vector<NodeId> comp{s};
    seen[s] = 1;
    for (std::size_t head = 0; head < comp.size(); ++head)
      for (NodeId w : adj[comp[head]])
        if (!seen[w]) {
          seen[w] = 1;
          comp.push_back(w);
        }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

inline bool is_connected(const WeightedGraph& g) { return connected_components(g).size() == 1; }

// Hop distances from `source`; -1 for unreachable nodes. Index 0 unused.
inline std::vector<int> hop_distances(const WeightedGraph& g, NodeId source) {
  const auto adj = g.neighbours();
  std::vector<int> dist(g.size() + 1, -1);
  std::queue<NodeId> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop();
    for (NodeId w : adj[v])
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
  }
  return dist;
}

// Largest finite hop distance.
inline int diameter(const WeightedGraph& g) {
  int best = 0;
  for (NodeId s = 1; s <= g.size(); ++s) {
    auto d = hop_distances(g, s);
    best = std::max(best, *std::max_element(d.begin(), d.end()));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Link removal

struct RemovalRecord {
  std::vector<Edge> removed_edges;  // in draw order
  std::uint64_t seed = 0;
  bool still_connected = true;
};

struct RemovalResult {
  WeightedGraph graph;
  RemovalRecord record;
};

// Deletes k edges drawn uniformly without replacement. Connectivity is
// reported, not enforced.
inline RemovalResult remove_links(const WeightedGraph& g, std::size_t k, std::uint64_t seed) {
  const auto& edges = g.edges();
  if (k > edges.size())
    throw InvalidArgument("cannot remove " + std::to_string(k) + " of " +
                          std::to_string(edges.size()) + " edges");
  std::vector<std::size_t> idx(edges.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<char> drop(edges.size(), 0);
  RemovalRecord rec;
  rec.seed = seed;
  for (std::size_t i = 0; i < k; ++i) {
    drop[idx[i]] = 1;
    rec.removed_edges.push_back(edges[idx[i]]);
  }
  WeightedGraph out(g.size());
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (!drop[i]) out.add_edge(edges[i].u, edges[i].v, edges[i].weight);
  rec.still_connected = is_connected(out);
  return {std::move(out), std::move(rec)};
}

// ---------------------------------------------------------------------------
// Serialization
//
// Text format: a header line "N <n_nodes>" followed by one "i j weight" line
// per edge. Blank lines and '#' comments are ignored.

inline std::string encode_graph(const WeightedGraph& g) {
  std::string out = "N " + std::to_string(g.size()) + "\n";
  for (const auto& e : g.edges())
    out += std::to_string(e.u) + " " + std::to_string(e.v) + " " + format_double(e.weight) + "\n";
  return out;
}

inline WeightedGraph decode_graph(std::string_view text) {
  struct Token {
    std::string_view s;
    int col;
  };
  std::optional<WeightedGraph> g;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<Token> tok;
    for (std::size_t i = 0; i < line.size();) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) tok.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    if (tok.empty()) {
      if (end == text.size()) break;
      continue;
    }

    auto parse_int = [&](const Token& t, const char* what) {
      int v = 0;
      auto r = std::from_chars(t.s.data(), t.s.data() + t.s.size(), v);
      if (r.ec != std::errc{} || r.ptr != t.s.data() + t.s.size())
        throw ParseError(std::string("expected integer ") + what + ", got '" + std::string(t.s) + "'",
                         line_no, t.col);
      return v;
    };

    if (!g) {
      if (tok.size() != 2 || tok[0].s != "N")
        throw ParseError("expected header 'N <n_nodes>'", line_no, tok[0].col);
      int n = parse_int(tok[1], "node count");
      if (n < 1) throw ParseError("node count must be positive", line_no, tok[1].col);
      g.emplace(n);
    } else {
      if (tok.size() != 3)
        throw ParseError("expected 'i j weight', got " + std::to_string(tok.size()) + " fields",
                         line_no, tok[0].col);
      int i = parse_int(tok[0], "node id");
      int j = parse_int(tok[1], "node id");
      double w = 0.0;
      if (!parse_double(tok[2].s, w))
        throw ParseError("expected weight, got '" + std::string(tok[2].s) + "'", line_no, tok[2].col);
      if (i == j) throw ParseError("self-loop on node " + std::to_string(i), line_no, tok[0].col);
      try {
        g->add_edge(i, j, w);
      } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), line_no, tok[0].col);
      }
    }
    if (end == text.size()) break;
  }
  if (!g) throw ParseError("missing header 'N <n_nodes>'", line_no, 1);
  return std::move(*g);
}

inline nlohmann::json graph_to_json(const WeightedGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : g.edges()) edges.push_back({e.u, e.v, e.weight});
  return {{"n_nodes", g.size()}, {"edges", edges}};
}

inline WeightedGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("graph JSON must be an object");
  for (const auto& [k, v] : j.items())
    if (k != "n_nodes" && k != "edges") throw ParseError("unknown graph key '" + k + "'");
  if (!j.contains("n_nodes") || !j["n_nodes"].is_number_integer())
    throw ParseError("graph JSON needs integer 'n_nodes'");
  int n = j["n_nodes"].get<int>();
  if (n < 1) throw ParseError("node count must be positive");
  WeightedGraph g(n);
  if (j.contains("edges")) {
    const auto& edges = j["edges"];
    if (!edges.is_array()) throw ParseError("'edges' must be an array");
    for (std::size_t idx = 0; idx < edges.size(); ++idx) {
      const auto& e = edges[idx];
      if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_number_integer() ||
          !e[1].is_number_integer() || (e.size() == 3 && !e[2].is_number()))
        throw ParseError("edge " + std::to_string(idx) + " must be [i, j] or [i, j, w]");
      try {
        g.add_edge(e[0].get<int>(), e[1].get<int>(), e.size() == 3 ? e[2].get<double>() : 1.0);
      } catch (const InvalidArgument& ex) {
        throw ParseError("edge " + std::to_string(idx) + ": " + ex.what());
      }
    }
  }
  return g;
}

// Accepts either the text format or the JSON form (detected by a leading '{').
inline WeightedGraph parse_graph(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      int line = 1, col = 1;
      for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      throw ParseError("malformed JSON graph", line, col);
    }
    return graph_from_json(j);
  }
  return decode_graph(text);
}

}  // namespace qdark
