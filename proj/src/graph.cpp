#include "qelab/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

#include "json.hpp"

#include "qelab/anderson.hpp"
#include "qelab/errors.hpp"
#include "qelab/rng.hpp"

namespace qelab {

DirectedEdgeIndex::DirectedEdgeIndex(const AdjacencyList& adjacency) {
  const std::size_t n = adjacency.size();
  offsets_.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) offsets_[u + 1] = offsets_[u] + adjacency[u].size();
  edges_.reserve(offsets_[n]);
  for (std::size_t u = 0; u < n; ++u)
    for (Vertex v : adjacency[u]) edges_.push_back({static_cast<Vertex>(u), v});
  reverse_.resize(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i)
    reverse_[i] = index_of(edges_[i].to, edges_[i].from);
}

std::size_t DirectedEdgeIndex::index_of(Vertex u, Vertex v) const {
  if (u + 1 >= offsets_.size()) throw InvalidInput("vertex out of range");
  const auto first = edges_.begin() + static_cast<std::ptrdiff_t>(offsets_[u]);
  const auto last = edges_.begin() + static_cast<std::ptrdiff_t>(offsets_[u + 1]);
  const auto it = std::lower_bound(first, last, v,
                                   [](const DirectedEdge& e, Vertex t) { return e.to < t; });
  if (it == last || it->to != v)
    throw InvalidInput("no edge " + std::to_string(u) + "->" + std::to_string(v));
  return static_cast<std::size_t>(it - edges_.begin());
}

void validate_simple(const AdjacencyList& adjacency) {
  const std::size_t n = adjacency.size();
  for (std::size_t u = 0; u < n; ++u) {
    const auto& nb = adjacency[u];
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const Vertex v = nb[k];
      if (v >= n) throw InvalidInput("neighbor id out of range at vertex " + std::to_string(u));
      if (v == u) throw InvalidInput("self-loop at vertex " + std::to_string(u));
      if (k > 0 && nb[k - 1] >= v)
        throw InvalidInput("neighbor list of vertex " + std::to_string(u) +
                           " is not strictly ascending (multi-edge or unsorted)");
      if (!std::binary_search(adjacency[v].begin(), adjacency[v].end(), static_cast<Vertex>(u)))
        throw InvalidInput("adjacency not symmetric between " + std::to_string(u) + " and " +
                           std::to_string(v));
    }
  }
}

RegularGraph::RegularGraph(int q, AdjacencyList adjacency) : q_(q), adjacency_(std::move(adjacency)) {
  if (q_ < 1) throw InvalidInput("branching number q must be positive");
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
  validate_simple(adjacency_);
  for (std::size_t u = 0; u < adjacency_.size(); ++u)
    if (adjacency_[u].size() != static_cast<std::size_t>(q_ + 1))
      throw InvalidInput("vertex " + std::to_string(u) + " has degree " +
                         std::to_string(adjacency_[u].size()) + ", expected " +
                         std::to_string(q_ + 1));
  directed_ = DirectedEdgeIndex(adjacency_);
}

RegularGraph RegularGraph::from_edges(std::size_t n, int q,
                                      std::span<const std::pair<Vertex, Vertex>> edges) {
  AdjacencyList adj(n);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) throw InvalidInput("edge endpoint out of range");
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return RegularGraph(q, std::move(adj));
}

std::vector<std::pair<Vertex, Vertex>> RegularGraph::edges() const {
  std::vector<std::pair<Vertex, Vertex>> out;
  out.reserve(size() * static_cast<std::size_t>(degree()) / 2);
  for (std::size_t u = 0; u < size(); ++u)
    for (Vertex v : adjacency_[u])
      if (u < v) out.emplace_back(static_cast<Vertex>(u), v);
  return out;
}

namespace {
thread_local std::size_t g_last_attempts = 0;
}

std::size_t last_generation_attempts() { return g_last_attempts; }

RegularGraph generate_random_regular(std::size_t n, int q, std::uint64_t seed,
                                     const GenerationOptions& options) {
  if (q < 2) throw InvalidInput("q must be at least 2");
  const std::size_t d = static_cast<std::size_t>(q) + 1;
  if ((n * d) % 2 != 0) throw InvalidInput("n*(q+1) must be even for a (q+1)-regular graph");
  if (n < d + 1) throw InvalidInput("n must be at least q+2");

  std::vector<Vertex> stubs(n * d);
  for (std::size_t attempt = 0; attempt < options.max_attempts; ++attempt) {
    for (std::size_t i = 0; i < stubs.size(); ++i) stubs[i] = static_cast<Vertex>(i / d);
    CounterRng rng(seed, StreamTag::graph, {attempt});
    for (std::size_t i = stubs.size() - 1; i > 0; --i) std::swap(stubs[i], stubs[rng.below(i + 1)]);

    AdjacencyList adj(n);
    bool simple = true;
    for (std::size_t i = 0; i < stubs.size() && simple; i += 2) {
      const Vertex u = stubs[i], v = stubs[i + 1];
      if (u == v || std::find(adj[u].begin(), adj[u].end(), v) != adj[u].end()) {
        simple = false;
        break;
      }
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    if (!simple) continue;
    g_last_attempts = attempt + 1;
    return RegularGraph(q, std::move(adj));
  }
  g_last_attempts = options.max_attempts;
  throw BudgetExceeded("pairing model produced no simple graph in " +
                       std::to_string(options.max_attempts) + " attempts (n=" + std::to_string(n) +
                       ", q=" + std::to_string(q) + ")");
}

BfsBall bfs_ball(const AdjacencyList& adjacency, Vertex x, std::size_t max_radius) {
  const std::size_t n = adjacency.size();
  if (x >= n) throw InvalidInput("vertex out of range");
  BfsBall ball;
  ball.distance.assign(n, kUnreachable);
  ball.parent.assign(n, 0);
  ball.distance[x] = 0;
  ball.parent[x] = x;
  ball.order.push_back(x);
  for (std::size_t head = 0; head < ball.order.size(); ++head) {
    const Vertex u = ball.order[head];
    if (ball.distance[u] >= max_radius) continue;
    for (Vertex w : adjacency[u]) {
      if (ball.distance[w] != kUnreachable) continue;
      ball.distance[w] = ball.distance[u] + 1;
      ball.parent[w] = u;
      ball.order.push_back(w);
    }
  }
  return ball;
}

std::vector<Vertex> BfsBall::path_to(Vertex y) const {
  std::vector<Vertex> path;
  if (distance[y] == kUnreachable) return path;
  for (Vertex v = y;; v = parent[v]) {
    path.push_back(v);
    if (parent[v] == v) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

Geodesic distance_and_geodesic(const AdjacencyList& adjacency, Vertex x, Vertex y) {
  if (x >= adjacency.size() || y >= adjacency.size()) throw InvalidInput("vertex out of range");
  const BfsBall ball = bfs_ball(adjacency, x, kUnreachable);
  Geodesic out;
  out.distance = ball.distance[y];
  out.path = ball.path_to(y);
  return out;
}

std::size_t injectivity_radius_at(const AdjacencyList& adjacency, Vertex x) {
  const std::size_t n = adjacency.size();
  std::vector<std::size_t> dist(n, kUnreachable);
  std::vector<Vertex> layer{x}, next;
  dist[x] = 0;
  std::size_t vertices = 1, edges = 0;
  for (std::size_t r = 0;; ++r) {
    // Extend B(x, r) to B(x, r + 1): new vertices and the edges they bring.
    next.clear();
    for (Vertex u : layer)
      for (Vertex w : adjacency[u])
        if (dist[w] == kUnreachable) {
          dist[w] = r + 1;
          next.push_back(w);
        }
    if (next.empty()) return r;  // whole component is a tree
    for (Vertex w : next)
      for (Vertex z : adjacency[w]) {
        if (dist[z] == r) ++edges;
        else if (dist[z] == r + 1 && w < z) ++edges;
      }
    vertices += next.size();
    if (edges != vertices - 1) return r;
    layer.swap(next);
  }
}

InjectivityProfile injectivity_radius(const RegularGraph& g) {
  InjectivityProfile out;
  out.radius.resize(g.size());
  for (std::size_t x = 0; x < g.size(); ++x)
    out.radius[x] = injectivity_radius_at(g.adjacency(), static_cast<Vertex>(x));
  const std::size_t top = g.size() ? *std::max_element(out.radius.begin(), out.radius.end()) : 0;
  out.histogram.assign(top + 1, 0);
  for (std::size_t r : out.radius) ++out.histogram[r];
  return out;
}

double InjectivityProfile::bst_statistic(std::size_t r) const {
  if (radius.empty()) return 0.0;
  std::size_t below = 0;
  for (std::size_t rho : radius)
    if (rho < r) ++below;
  return static_cast<double>(below) / static_cast<double>(radius.size());
}

std::size_t InjectivityProfile::min_radius() const {
  return radius.empty() ? 0 : *std::min_element(radius.begin(), radius.end());
}

ExpansionReport exp_check(const RegularGraph& g) {
  const PotentialAssignment zero{std::vector<double>(g.size(), 0.0), 0.0};
  const std::vector<double> spectrum = eigenvalues_only(assemble(g.adjacency(), zero));
  const double scale = 1.0 / static_cast<double>(g.degree());
  ExpansionReport out;
  // Drop the single top (Perron) eigenvalue; a repeated top value marks disconnection.
  double modulus = 0.0;
  for (std::size_t i = 0; i + 1 < spectrum.size(); ++i)
    modulus = std::max(modulus, std::abs(spectrum[i] * scale));
  out.second_modulus = modulus;
  out.beta = 1.0 - modulus;
  return out;
}

std::string graph_to_json(const RegularGraph& g) {
  nlohmann::json j;
  j["n"] = g.size();
  j["q"] = g.q();
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
  j["edges"] = std::move(edges);
  return j.dump();
}

RegularGraph graph_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("graph file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("q") || !j.contains("edges") ||
      !j["n"].is_number_integer() || !j["q"].is_number_integer() || !j["edges"].is_array())
    throw InvalidInput("graph file needs integer \"n\", \"q\" and array \"edges\"");
  const auto n = j["n"].get<std::int64_t>();
  const auto q = j["q"].get<std::int64_t>();
  if (n < 1 || q < 1) throw InvalidInput("graph file has non-positive n or q");
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw InvalidInput("each edge must be a 2-element integer array");
    const auto u = e[0].get<std::int64_t>(), v = e[1].get<std::int64_t>();
    if (u < 0 || v < 0 || u >= n || v >= n) throw InvalidInput("edge endpoint out of range");
    if (u >= v) throw InvalidInput("edges must be listed once with u < v");
    edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
  }
  return RegularGraph::from_edges(static_cast<std::size_t>(n), static_cast<int>(q), edges);
}

void save_graph(const RegularGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << graph_to_json(g) << '\n';
}

RegularGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return graph_from_json(ss.str());
}

}  // namespace qelab
