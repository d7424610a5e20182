#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qelab/anderson.hpp"
#include "qelab/csv.hpp"
#include "qelab/graph.hpp"
#include "qelab/numeric.hpp"
#include "qelab/tree_green.hpp"

namespace qelab {

/// Diagonal test function a(x) with sup |a| <= 1. Built from the graph alone,
/// never from a potential.
struct Observable {
  std::vector<Complex> values;
  std::string description;

  std::size_t size() const { return values.size(); }
  /// <a> = (1/N) sum_x a(x)
  Complex mean() const;
};

enum class ObservableKind { constant, indicator, delta, file };

struct ObservableSpec {
  ObservableKind kind = ObservableKind::indicator;
  Complex constant = 1.0;
  double alpha = 0.5;
  Vertex vertex = 0;
  std::filesystem::path path;
  std::uint64_t seed = 0;
};

/// The indicator picks round(alpha N) vertices by a seeded partial shuffle.
/// File observables are JSON arrays of N numbers or [re, im] pairs.
Observable make_observable(const ObservableSpec& spec, std::size_t n);
Observable indicator_observable(std::size_t n, double alpha, std::uint64_t seed);

struct KernelEntry {
  Vertex y;
  Complex value;
  std::vector<Vertex> path;  // BFS geodesic x -> y, path.size() - 1 == d(x, y)
  std::size_t distance() const { return path.size() - 1; }
};

/// Finite-range kernel K(x, y), stored row-wise for d(x, y) <= R.
class Kernel {
 public:
  Kernel(std::size_t range, std::vector<std::vector<KernelEntry>> rows, std::string description);

  std::size_t range() const { return range_; }
  std::size_t size() const { return rows_.size(); }
  std::span<const KernelEntry> row(Vertex x) const { return rows_[x]; }
  const std::string& description() const { return description_; }
  bool is_real() const;
  double sup_norm() const;
  /// S_r = sum_{d(x,y) = r} K(x, y) for r = 0..R, each a pairwise sum over x.
  std::vector<Complex> shell_sums() const;
  /// sum_x K(x, x)
  Complex trace() const;

 private:
  std::size_t range_;
  std::vector<std::vector<KernelEntry>> rows_;
  std::string description_;
};

Kernel kernel_zero(std::size_t n, std::size_t range);
Kernel kernel_diagonal(const Observable& a);
/// K(x, y) = value when d(x, y) == r (shell) or d(x, y) <= r (ball).
Kernel kernel_shell(const AdjacencyList& adjacency, std::size_t r, Complex value);
Kernel kernel_ball(const AdjacencyList& adjacency, std::size_t r, Complex value);

struct EigenTerm {
  std::size_t index;
  double lambda;
  Complex bracket;  // <psi_i, K psi_i>
  Complex average;  // <K> at lambda_i
};

struct QEReport {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  double lambda0 = 0.0;
  double eta0 = 0.0;
  std::size_t range = 0;
  double statistic = 0.0;        // (1/N) sum over the window of |bracket - average|
  std::size_t window_count = 0;  // eigenvalues in (-lambda0, lambda0)
  std::size_t degenerate_in_window = 0;
  std::vector<EigenTerm> terms;  // filled when keep_terms
};

bool operator==(const QEReport& a, const QEReport& b);

/// (1/N) sum over eigenvalues in the open window (-lambda0, lambda0) of
/// |<psi_i, a psi_i> - <a>|, each bracket divided by the computed ||psi_i||^2.
QEReport qe_statistic_diag(const SpectralData& spec, const Observable& a, double lambda0,
                           bool keep_terms = false);

/// lambda -> <K>_lambda, complex valued.
using KernelAverage = std::function<Complex(double)>;

/// Linear interpolation of a sampled average curve, clamped at the ends.
struct AverageCurve {
  std::vector<double> lambdas;
  std::vector<Complex> values;
  Complex operator()(double lambda) const;
};

/// <K>_lambda^{eta0} = sum_r ratio_r(lambda) S_r / N with the ratios
/// interpolated from the table. For R = 0 this is exactly <a>.
KernelAverage kernel_average_simple(const Kernel& k, const PhiRatioTable& ratios);

/// Requires real eigenvectors (always true for SpectralData) and, for R >= 1,
/// a real-valued kernel.
QEReport qe_statistic_kernel(const SpectralData& spec, const Kernel& k, double lambda0,
                             double eta0, const KernelAverage& average, bool keep_terms = false);

/// <K>_{lambda + i eta0} = sum K(x,y) Im g~(x~,y~) / sum_x Im g~(x~,x~) with the
/// lifted Green function at depth L (0 selects default_depth(eta0)).
Complex kernel_average_general(const Kernel& k, const AdjacencyList& adjacency,
                               const PotentialAssignment& pot, const SpectralParameter& gamma,
                               std::size_t depth = 0);
AverageCurve kernel_average_general_curve(const Kernel& k, const AdjacencyList& adjacency,
                                          const PotentialAssignment& pot, double eta0,
                                          std::span<const double> lambdas, std::size_t depth = 0);

struct EquivalenceRow {
  std::size_t n = 0;
  std::vector<double> per_seed_median;  // median over the lambda grid, per seed pair
  double median = 0.0;                  // median of per_seed_median
};

struct EquivalenceTable {
  std::vector<EquivalenceRow> rows;  // in the order of the requested N values
  bool nonincreasing = false;        // median discrepancy nonincreasing in N
};

struct SeedPair {
  std::uint64_t graph_seed;
  std::uint64_t potential_seed;
};

struct EquivalenceSetup {
  int q = 2;
  std::vector<std::size_t> n_values;
  std::vector<SeedPair> seeds;
  PotentialSpec potential;
  double epsilon = 0.2;
  double eta0 = 0.2;
  std::vector<double> lambdas;  // evaluation grid for the discrepancy
  /// Built from the graph only; it never sees the potential.
  std::function<Kernel(const RegularGraph&)> kernel;
  const PhiRatioTable* ratios = nullptr;
  std::size_t depth = 0;
};

/// Median over the lambda grid of |<K>_{lambda + i eta0} - <K>_lambda^{eta0}|.
double equivalence_discrepancy(const Kernel& k, const AdjacencyList& adjacency,
                               const PotentialAssignment& pot, double eta0,
                               std::span<const double> lambdas, const PhiRatioTable& ratios,
                               std::size_t depth = 0);

/// equivalence_discrepancy per (N, seed pair), regenerating each graph and potential.
EquivalenceTable average_equivalence_check(const EquivalenceSetup& setup);

struct MassReport {
  double alpha = 0.0;
  double lambda0 = 0.0;
  std::vector<double> varsigma;
  /// fraction[s][j] = (1/N) #{window i : | ||chi psi_i||^2 - alpha | > varsigma_j } for seed s,
  /// with each mass divided by the computed ||psi_i||^2. alpha = 1 selects every vertex.
  std::vector<std::vector<double>> fraction;
  std::vector<double> median_fraction;  // over seeds, per varsigma
  std::vector<std::vector<double>> masses;  // per seed, window eigenfunctions in index order
};

MassReport mass_distribution_check(const SpectralData& spec, double alpha, double lambda0,
                                   std::span<const std::uint64_t> seeds,
                                   std::span<const double> varsigma);

/// CSV "n,seed,epsilon,lambda0,eta0,R,statistic,window_count".
std::vector<std::string> qe_csv_header();
void write_qe_row(CsvWriter& csv, const QEReport& r);
/// CSV "i,lambda_i,bracket,average" (real parts).
void write_qe_terms_csv(std::ostream& out, const QEReport& r);

}  // namespace qelab
