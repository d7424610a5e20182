#include "qelab/esd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qelab/csv.hpp"
#include "qelab/errors.hpp"

namespace qelab {

double kesten_mckay_density(double lambda, int q) {
  const double edge = 2.0 * std::sqrt(static_cast<double>(q));
  if (!(std::abs(lambda) < edge)) return 0.0;
  const Complex zeta = free_forward_green(lambda, q);
  const Complex g = 1.0 / (static_cast<double>(q + 1) * zeta - lambda);
  return g.imag() / std::numbers::pi;
}

double kesten_mckay_density_rational(double lambda, int q) {
  const double edge = 2.0 * std::sqrt(static_cast<double>(q));
  if (!(std::abs(lambda) < edge)) return 0.0;
  const double d = q + 1.0;
  return d * std::sqrt(4.0 * q - lambda * lambda) / (2.0 * std::numbers::pi * (d * d - lambda * lambda));
}

double kesten_mckay_cdf(double lambda, int q) {
  const double scale = 2.0 * std::sqrt(static_cast<double>(q));
  if (lambda <= -scale) return 0.0;
  if (lambda >= scale) return 1.0;
  const double d = q + 1.0;
  // density(scale sin t) * scale cos t, with the square root cancelled
  const auto integrand = [&](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return d * scale * scale * c * c / (2.0 * std::numbers::pi * (d * d - scale * scale * s * s));
  };
  const double upper = std::asin(lambda / scale);
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, -std::numbers::pi / 2.0, upper, 15, 1e-14);
}

double SpectralHistogram::cdf(double lambda) const {
  if (total == 0 || lambda < edges.front()) return 0.0;
  double acc = static_cast<double>(below);
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (lambda >= edges[b + 1]) {
      acc += static_cast<double>(counts[b]);
      continue;
    }
    const double t = (lambda - edges[b]) / (edges[b + 1] - edges[b]);
    return (acc + t * static_cast<double>(counts[b])) / static_cast<double>(total);
  }
  return acc / static_cast<double>(total);
}

SpectralHistogram make_histogram(std::span<const double> values, std::size_t bins, double lo,
                                 double hi) {
  if (bins == 0 || !(hi > lo)) throw InvalidInput("histogram needs bins > 0 and hi > lo");
  SpectralHistogram h;
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b)
    h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  h.total = values.size();
  for (double v : values) {
    if (v < lo) {
      ++h.below;
      continue;
    }
    if (v > hi) {
      ++h.above;
      continue;
    }
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

SpectralHistogram default_histogram(std::span<const double> eigenvalues, int q, double epsilon,
                                    double support) {
  const double bound = 2.0 * std::sqrt(static_cast<double>(q)) + std::abs(epsilon) * support;
  return make_histogram(eigenvalues, 200, -bound, bound);
}

MeanEstimate ids_density(int q, const PotentialSpec& spec, double epsilon, double lambda, double eta,
                         std::size_t samples, std::uint64_t seed, const TreeOptions& options,
                         std::uint64_t unit) {
  const ImGreenProfile p =
      mc_expectation_im_green(q, spec, epsilon, {lambda, eta}, 0, samples, seed, options, unit);
  return {p.im_green[0].mean / std::numbers::pi, p.im_green[0].std_error / std::numbers::pi};
}

GridCdf::GridCdf(std::vector<double> lambdas, std::vector<double> density)
    : lambdas_(std::move(lambdas)), density_(std::move(density)) {
  if (lambdas_.size() < 2 || lambdas_.size() != density_.size())
    throw InvalidInput("grid CDF needs at least two matching grid points");
  cumulative_.assign(lambdas_.size(), 0.0);
  for (std::size_t i = 1; i < lambdas_.size(); ++i)
    cumulative_[i] = cumulative_[i - 1] +
                     0.5 * (density_[i] + density_[i - 1]) * (lambdas_[i] - lambdas_[i - 1]);
  const double total = cumulative_.back();
  if (!(total > 0.0)) throw InvalidInput("grid density has no mass");
  for (double& c : cumulative_) c /= total;
}

double GridCdf::operator()(double lambda) const {
  if (lambda <= lambdas_.front()) return 0.0;
  if (lambda >= lambdas_.back()) return 1.0;
  const auto it = std::upper_bound(lambdas_.begin(), lambdas_.end(), lambda);
  const std::size_t hi = static_cast<std::size_t>(it - lambdas_.begin()), lo = hi - 1;
  const double t = (lambda - lambdas_[lo]) / (lambdas_[hi] - lambdas_[lo]);
  return cumulative_[lo] + t * (cumulative_[hi] - cumulative_[lo]);
}

GridCdf ids_reference(int q, const PotentialSpec& spec, double epsilon, double eta, double spacing,
                      std::size_t samples, std::uint64_t seed, const TreeOptions& options) {
  const double bound = 2.0 * std::sqrt(static_cast<double>(q)) + std::abs(epsilon) * spec.support +
                       10.0 * eta;
  std::vector<double> grid = uniform_grid(-bound, bound, spacing);
  std::vector<double> density(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    density[i] = ids_density(q, spec, epsilon, grid[i], eta, samples, seed, options, i).mean;
  });
  return GridCdf(std::move(grid), std::move(density));
}

double kolmogorov_distance(std::span<const double> eigenvalues,
                           const std::function<double(double)>& reference_cdf) {
  std::vector<double> sorted(eigenvalues.begin(), eigenvalues.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double f = reference_cdf(sorted[i]);
    dist = std::max({dist, std::abs(f - static_cast<double>(i) / n),
                     std::abs(f - static_cast<double>(j) / n)});
    i = j;
  }
  return dist;
}

double esd_compare_kesten_mckay(std::span<const double> eigenvalues, int q) {
  return kolmogorov_distance(eigenvalues, [q](double l) { return kesten_mckay_cdf(l, q); });
}

namespace {

class ReturnWalks {
 public:
  ReturnWalks(int q, double epsilon, const PotentialSpec& spec, int k) : q_(q), epsilon_(epsilon) {
    for (int j = 0; j <= k; ++j) site_weight_.push_back(std::pow(epsilon, j) * spec.moment(j));
    nodes_.push_back({-1, 0, 0, 0, {}});
  }

  double run(int k) {
    walk(0, k, 1.0);
    return total_;
  }

 private:
  struct Node {
    int parent;
    int depth;
    int stays;
    int created;
    std::vector<int> children;
  };

  void walk(int cur, int steps, double multiplicity) {
    Node& node = nodes_[static_cast<std::size_t>(cur)];
    if (steps < node.depth) return;
    if (steps == 0) {
      double w = multiplicity;
      for (const Node& n : nodes_) w *= site_weight_[static_cast<std::size_t>(n.stays)];
      total_ += w;
      return;
    }
    if (epsilon_ != 0.0) {
      ++nodes_[static_cast<std::size_t>(cur)].stays;
      walk(cur, steps - 1, multiplicity);
      --nodes_[static_cast<std::size_t>(cur)].stays;
    }
    if (nodes_[static_cast<std::size_t>(cur)].parent >= 0)
      walk(nodes_[static_cast<std::size_t>(cur)].parent, steps - 1, multiplicity);
    const std::vector<int> existing = nodes_[static_cast<std::size_t>(cur)].children;
    for (int c : existing) walk(c, steps - 1, multiplicity);
    const Node& here = nodes_[static_cast<std::size_t>(cur)];
    const int capacity = (here.parent < 0 ? q_ + 1 : q_) - here.created;
    if (capacity > 0 && steps - 1 >= here.depth + 1) {
      const int id = static_cast<int>(nodes_.size());
      const int depth = here.depth + 1;
      nodes_[static_cast<std::size_t>(cur)].children.push_back(id);
      ++nodes_[static_cast<std::size_t>(cur)].created;
      nodes_.push_back({cur, depth, 0, 0, {}});
      walk(id, steps - 1, multiplicity * capacity);
      nodes_.pop_back();
      --nodes_[static_cast<std::size_t>(cur)].created;
      nodes_[static_cast<std::size_t>(cur)].children.pop_back();
    }
  }

  int q_;
  double epsilon_;
  std::vector<double> site_weight_;
  std::vector<Node> nodes_;
  double total_ = 0.0;
};

}  // namespace

double tree_return_moment(int q, double epsilon, const PotentialSpec& spec, int k) {
  if (k < 0 || k > kMaxMomentOrder)
    throw BudgetExceeded("moment order k=" + std::to_string(k) + " outside 0.." +
                         std::to_string(kMaxMomentOrder));
  if (k == 0) return 1.0;
  return ReturnWalks(q, epsilon, spec, k).run(k);
}

std::vector<double> graph_power_traces(const AdjacencyList& adjacency,
                                       const PotentialAssignment& pot, int k_max) {
  if (k_max < 1 || k_max > kMaxMomentOrder)
    throw BudgetExceeded("moment order cap is " + std::to_string(kMaxMomentOrder));
  const std::size_t n = adjacency.size();
  std::vector<std::vector<double>> returns(static_cast<std::size_t>(k_max), std::vector<double>(n));
  std::vector<double> v(n), w(n);
  for (std::size_t x = 0; x < n; ++x) {
    std::fill(v.begin(), v.end(), 0.0);
    v[x] = 1.0;
    for (int k = 1; k <= k_max; ++k) {
      apply_hamiltonian(adjacency, pot, v, w);
      returns[static_cast<std::size_t>(k - 1)][x] = w[x];
      v.swap(w);
    }
  }
  std::vector<double> out;
  for (const auto& r : returns) out.push_back(pairwise_sum(r) / static_cast<double>(n));
  return out;
}

std::vector<MomentRow> lln_moment_check(const RegularGraph& g, const PotentialAssignment& pot,
                                        const PotentialSpec& spec, int k_max) {
  const std::vector<double> graph = graph_power_traces(g.adjacency(), pot, k_max);
  std::vector<MomentRow> rows;
  for (int k = 1; k <= k_max; ++k) {
    MomentRow row;
    row.k = k;
    row.graph_moment = graph[static_cast<std::size_t>(k - 1)];
    row.tree_moment = tree_return_moment(g.q(), pot.epsilon, spec, k);
    row.abs_diff = std::abs(row.graph_moment - row.tree_moment);
    rows.push_back(row);
  }
  return rows;
}

void write_moment_rows_csv(std::ostream& out, std::span<const MomentRow> rows) {
  CsvWriter csv(out, {"k", "graph_moment", "tree_moment", "abs_diff"});
  for (const auto& r : rows) csv.row(r.k, r.graph_moment, r.tree_moment, r.abs_diff);
}

void write_density_csv(std::ostream& out, std::span<const double> lambdas,
                       std::span<const double> density) {
  CsvWriter csv(out, {"lambda", "density"});
  for (std::size_t i = 0; i < lambdas.size(); ++i) csv.row(lambdas[i], density[i]);
}

}  // namespace qelab
