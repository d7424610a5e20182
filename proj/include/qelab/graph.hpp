#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qelab {

using Vertex = std::uint32_t;
using AdjacencyList = std::vector<std::vector<Vertex>>;

struct DirectedEdge {
  Vertex from;
  Vertex to;
};

/// Index over the directed edges u->v of an arbitrary simple graph, ordered by
/// (u, position of v in the sorted neighbor list of u).
class DirectedEdgeIndex {
 public:
  DirectedEdgeIndex() = default;
  explicit DirectedEdgeIndex(const AdjacencyList& adjacency);

  std::size_t size() const { return edges_.size(); }
  const DirectedEdge& operator[](std::size_t i) const { return edges_[i]; }
  std::span<const DirectedEdge> edges() const { return edges_; }
  /// First directed edge leaving u; the out-edges of u are contiguous.
  std::size_t begin_of(Vertex u) const { return offsets_[u]; }
  std::size_t end_of(Vertex u) const { return offsets_[u + 1]; }
  /// Index of u->v; throws InvalidInput when v is not a neighbor of u.
  std::size_t index_of(Vertex u, Vertex v) const;
  /// Index of the reverse edge v->u for edge i = u->v.
  std::size_t reverse(std::size_t i) const { return reverse_[i]; }

 private:
  std::vector<DirectedEdge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> reverse_;
};

/// Simple undirected (q+1)-regular graph. Neighbor lists are sorted ascending.
/// Immutable after construction.
class RegularGraph {
 public:
  /// Validates regularity, symmetry, and the absence of loops and multi-edges.
  RegularGraph(int q, AdjacencyList adjacency);

  static RegularGraph from_edges(std::size_t n, int q,
                                 std::span<const std::pair<Vertex, Vertex>> edges);

  std::size_t size() const { return adjacency_.size(); }
  int q() const { return q_; }
  int degree() const { return q_ + 1; }
  const AdjacencyList& adjacency() const { return adjacency_; }
  std::span<const Vertex> neighbors(Vertex v) const { return adjacency_[v]; }
  const DirectedEdgeIndex& directed_edges() const { return directed_; }
  /// Undirected edges (u, v) with u < v in lexicographic order.
  std::vector<std::pair<Vertex, Vertex>> edges() const;

  bool operator==(const RegularGraph& other) const {
    return q_ == other.q_ && adjacency_ == other.adjacency_;
  }

 private:
  int q_;
  AdjacencyList adjacency_;
  DirectedEdgeIndex directed_;
};

/// Checks the simple-graph conditions on an arbitrary adjacency list (sorted
/// neighbors, symmetry, no loops, no repeated neighbors). Throws InvalidInput.
void validate_simple(const AdjacencyList& adjacency);

struct GenerationOptions {
  std::size_t max_attempts = 1000;
};

/// Pairing (configuration) model with whole-sample rejection of loops and
/// multi-edges. Attempt k shuffles the n(q+1) half-edges with the stream
/// (seed, graph, k).
RegularGraph generate_random_regular(std::size_t n, int q, std::uint64_t seed,
                                     const GenerationOptions& options = {});

/// Number of pairing attempts the last call to generate_random_regular on this
/// thread needed.
std::size_t last_generation_attempts();

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

struct Geodesic {
  std::size_t distance = kUnreachable;
  std::vector<Vertex> path;
  bool reachable() const { return distance != kUnreachable; }
};

/// BFS from x over sorted neighbor lists; the first discovery fixes the parent.
Geodesic distance_and_geodesic(const AdjacencyList& adjacency, Vertex x, Vertex y);

/// BFS tree rooted at x truncated at max_radius.
struct BfsBall {
  std::vector<Vertex> order;           // vertices in discovery order
  std::vector<std::size_t> distance;   // per vertex; kUnreachable outside the ball
  std::vector<Vertex> parent;          // parent[x] == x for the root
  std::vector<Vertex> path_to(Vertex y) const;
};
BfsBall bfs_ball(const AdjacencyList& adjacency, Vertex x, std::size_t max_radius);

struct InjectivityProfile {
  std::vector<std::size_t> radius;     // rho(x) per vertex
  std::vector<std::size_t> histogram;  // histogram[r] = #{x : rho(x) = r}
  /// |{x : rho(x) < r}| / N
  double bst_statistic(std::size_t r) const;
  std::size_t min_radius() const;
};

/// rho(x) is the largest r such that the induced subgraph on the ball B(x, r)
/// is a tree (edge count equals vertex count minus one).
InjectivityProfile injectivity_radius(const RegularGraph& g);
std::size_t injectivity_radius_at(const AdjacencyList& adjacency, Vertex x);

struct ExpansionReport {
  double second_modulus = 0.0;  // max |mu| over the non-Perron spectrum of A/(q+1)
  double beta = 0.0;            // 1 - second_modulus
  bool expanding() const { return beta > 0.0; }
};

/// Spectral gap of (q+1)^{-1} A. A disconnected or bipartite graph yields beta <= 0.
ExpansionReport exp_check(const RegularGraph& g);

/// JSON graph files: {"n": N, "q": q, "edges": [[u, v], ...]} with u < v.
std::string graph_to_json(const RegularGraph& g);
RegularGraph graph_from_json(const std::string& text);
void save_graph(const RegularGraph& g, const std::filesystem::path& path);
RegularGraph load_graph(const std::filesystem::path& path);

}  // namespace qelab
