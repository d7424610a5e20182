#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "qelab/anderson.hpp"
#include "qelab/graph.hpp"
#include "qelab/numeric.hpp"
#include "qelab/tree_green.hpp"

namespace qelab {

/// (1/pi) Im G_free(o, o; lambda + i0); zero outside [-2 sqrt q, 2 sqrt q].
double kesten_mckay_density(double lambda, int q);
/// (q+1) sqrt(4q - lambda^2) / (2 pi ((q+1)^2 - lambda^2)).
double kesten_mckay_density_rational(double lambda, int q);
/// Integral of the density from -2 sqrt q to lambda, by adaptive Gauss-Kronrod
/// quadrature after lambda = 2 sqrt q sin(theta).
double kesten_mckay_cdf(double lambda, int q);

struct SpectralHistogram {
  std::vector<double> edges;  // bins + 1 ascending edges
  std::vector<std::size_t> counts;
  std::size_t total = 0;  // includes values outside the edges
  std::size_t below = 0;  // values left of edges.front()
  std::size_t above = 0;  // values right of edges.back()

  /// Fraction of values <= lambda, at bin resolution (linear within a bin).
  double cdf(double lambda) const;
};

SpectralHistogram make_histogram(std::span<const double> values, std::size_t bins, double lo,
                                 double hi);
/// 200 bins over [-2 sqrt q - |eps| A, 2 sqrt q + |eps| A].
SpectralHistogram default_histogram(std::span<const double> eigenvalues, int q, double epsilon,
                                    double support);

/// (1/pi) E[Im G(o, o; lambda + i eta)] from the tree Monte Carlo at r = 0.
MeanEstimate ids_density(int q, const PotentialSpec& spec, double epsilon, double lambda, double eta,
                         std::size_t samples, std::uint64_t seed, const TreeOptions& options = {},
                         std::uint64_t unit = 0);

/// Reference CDF built from a smoothed density sampled on a uniform grid and
/// integrated by the trapezoid rule, normalized to total mass one.
class GridCdf {
 public:
  GridCdf(std::vector<double> lambdas, std::vector<double> density);
  double operator()(double lambda) const;
  const std::vector<double>& lambdas() const { return lambdas_; }
  const std::vector<double>& density() const { return density_; }

 private:
  std::vector<double> lambdas_, density_, cumulative_;
};

/// Smoothed tree density of states at eta on a grid of the given spacing
/// covering the spectrum plus 10 eta on both sides.
GridCdf ids_reference(int q, const PotentialSpec& spec, double epsilon, double eta, double spacing,
                      std::size_t samples, std::uint64_t seed, const TreeOptions& options = {});

/// sup |F_emp - F| evaluated on both sides of every jump of F_emp.
double kolmogorov_distance(std::span<const double> eigenvalues,
                           const std::function<double(double)>& reference_cdf);
double esd_compare_kesten_mckay(std::span<const double> eigenvalues, int q);

struct MomentRow {
  int k = 0;
  double graph_moment = 0.0;  // (1/N) tr H^k
  double tree_moment = 0.0;   // E[H^k(o, o)]
  double abs_diff = 0.0;
};

inline constexpr int kMaxMomentOrder = 12;

/// Exact E[(A + eps W)^k (o, o)] on T_q: closed walks at the root enumerated up
/// to relabeling of unvisited children, with site moments of nu for stays.
double tree_return_moment(int q, double epsilon, const PotentialSpec& spec, int k);

/// (1/N) tr H^k for k = 1..k_max from sparse power iteration on every delta_x.
std::vector<double> graph_power_traces(const AdjacencyList& adjacency,
                                       const PotentialAssignment& pot, int k_max);

std::vector<MomentRow> lln_moment_check(const RegularGraph& g, const PotentialAssignment& pot,
                                        const PotentialSpec& spec, int k_max);

/// CSV "k,graph_moment,tree_moment,abs_diff".
void write_moment_rows_csv(std::ostream& out, std::span<const MomentRow> rows);
/// CSV "lambda,density".
void write_density_csv(std::ostream& out, std::span<const double> lambdas,
                       std::span<const double> density);

}  // namespace qelab
