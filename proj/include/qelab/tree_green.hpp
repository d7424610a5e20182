#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <iosfwd>
#include <span>
#include <vector>

#include "qelab/anderson.hpp"
#include "qelab/graph.hpp"
#include "qelab/numeric.hpp"
#include "qelab/rng.hpp"

namespace qelab {

/// gamma = lambda + i eta with eta > 0.
struct SpectralParameter {
  double lambda = 0.0;
  double eta = 0.1;

  Complex gamma() const { return {lambda, eta}; }
  void validate() const;
};

// Sign convention throughout: zeta_w(v) = -G^{(v|w)}(v, v), so Im zeta < 0.

/// Boundary value zeta^{lambda + i0} = (lambda - i sqrt(4q - lambda^2)) / (2q) of
/// the potential-free recursion. Throws InvalidInput outside (-2 sqrt q, 2 sqrt q).
Complex free_forward_green(double lambda, int q);

/// Root of q z^2 - gamma z + 1 = 0 with Im z < 0 (fixed point of z = 1/(gamma - q z)).
Complex free_forward_green_complex(Complex gamma, int q);

/// G_free(o, o; gamma) = 1 / ((q+1) zeta_free - gamma).
Complex free_green_diagonal(Complex gamma, int q);

/// Schur step: G(o, o) = (eps omega_o - gamma + sum_u zeta_o(u))^{-1}.
Complex green_diagonal(std::span<const Complex> zeta_children, double omega_root, double epsilon,
                       Complex gamma);

/// G(v_0, v_d) = G(v_0, v_0) prod_k zeta_{v_{k-1}}(v_k).
Complex green_along_path(Complex g_diag, std::span<const Complex> zetas_on_path);

/// c~ = (q+1) + |eps| A + lambda0 + 1. For eta > 1 the last term becomes eta so
/// that c~ still bounds ||H - gamma||.
double deterministic_bound_constant(int q, double epsilon, double support, double lambda0,
                                    double eta = 0.0);

/// Counts cavity values against Im z < 0, |z| <= 1/eta and |Im z| >= eta / c~^2.
/// Comparisons allow a relative slack of 1e-12 for rounding.
struct CavityTally {
  std::uint64_t checked = 0;
  std::uint64_t sign_violations = 0;
  std::uint64_t modulus_violations = 0;
  std::uint64_t lower_bound_violations = 0;
  double min_lower_bound_ratio = std::numeric_limits<double>::infinity();

  void record(Complex z, double eta, double lower_bound) {
    ++checked;
    const double im = z.imag();
    if (!(im < 0.0)) ++sign_violations;
    if (!(std::abs(z) * eta <= 1.0 + 1e-12)) ++modulus_violations;
    const double ratio = -im / lower_bound;
    if (!(ratio >= 1.0 - 1e-12)) ++lower_bound_violations;
    if (ratio < min_lower_bound_ratio) min_lower_bound_ratio = ratio;
  }
  void merge(const CavityTally& other);
  std::uint64_t violations() const {
    return sign_violations + modulus_violations + lower_bound_violations;
  }
};

enum class LeafCondition {
  bare_site,   // zeta_leaf = (gamma - eps omega)^{-1}
  free_value,  // zeta_leaf = (gamma - eps omega - q zeta_free(gamma))^{-1}
};

enum class SweepMode {
  automatic,  // exact while the ball fits in work_cap, pooled otherwise
  exact,      // depth-first sweep over every node of the depth-L ball
  pooled,     // level-by-level population of cavity values
};

struct TreeOptions {
  std::size_t depth = 0;  // L; 0 selects default_depth(eta)
  LeafCondition leaf = LeafCondition::bare_site;
  SweepMode mode = SweepMode::automatic;
  std::uint64_t work_cap = std::uint64_t{1} << 22;  // node visits
  std::size_t pool_size = 0;                        // 0 selects max(1024, M)
  double lambda0 = 0.0;  // bound constant uses max(lambda0, |lambda|)
};

/// ceil(8 / eta) capped at 400.
std::size_t default_depth(double eta);

/// Node count 1 + (q+1)(q^L - 1)/(q - 1) of the depth-L ball of T_q, saturating.
std::uint64_t tree_ball_size(int q, std::size_t depth);

/// One realization of the forward field around the root.
struct TreeSample {
  double omega_root = 0.0;
  std::vector<Complex> root_children;  // zeta_o(u) for the q+1 neighbors u of the root
  /// ray[k-1] = zeta_{y_{k-1}}(y_k) along a fixed non-backtracking ray y_0 = o, y_1, ...
  /// with y_1 = root_children[0].
  std::vector<Complex> ray;
};

/// omega by node, nodes numbered in BFS order: root 0, its q+1 children 1..q+1,
/// then each depth-d node's q children consecutively.
using SiteSource = std::function<double(std::uint64_t)>;

/// Depth-first sweep of the depth-L ball keeping only the active path. The ray
/// follows the first child at every level. Throws BudgetExceeded if the ball is
/// larger than work_cap.
TreeSample sweep_tree_exact(int q, std::size_t depth, double epsilon, Complex gamma,
                            const SiteSource& sites, LeafCondition leaf, std::size_t ray_length,
                            std::uint64_t work_cap, CavityTally* tally = nullptr,
                            double lower_bound = 0.0);

/// Cavity values for the depth-L tree with i.i.d. potential. In pooled mode,
/// level k holds pool_size draws of the forward value at depth k; each entry is
/// computed from fresh omega and q entries resampled from level k+1. Level
/// streams are keyed by distance from the root so deeper truncations reuse the
/// randomness of the upper levels.
class CavityPool {
 public:
  CavityPool(int q, const PotentialSpec& spec, double epsilon, Complex gamma, std::size_t depth,
             LeafCondition leaf, std::size_t pool_size, std::uint64_t seed, std::uint64_t unit,
             std::size_t keep_levels, double lower_bound, CavityTally& tally);

  std::span<const Complex> level(std::size_t k) const { return levels_.at(k - 1); }
  std::size_t depth() const { return depth_; }

  /// Root sample with a freshly built ray of ray_length nodes (ray_length <= depth).
  TreeSample draw(std::uint64_t sample, std::size_t ray_length, CavityTally& tally) const;

 private:
  Complex fresh(std::size_t level, CounterRng& rng, std::optional<Complex> along) const;

  int q_;
  PotentialSpec spec_;
  double epsilon_;
  Complex gamma_;
  std::size_t depth_;
  LeafCondition leaf_;
  std::uint64_t seed_, unit_;
  double lower_bound_;
  Complex free_;
  std::vector<std::vector<Complex>> levels_;  // levels 1..keep_levels
};

/// Single realization keyed by seed. Automatic mode falls back to a pool of
/// pool_size (default 1024) when the ball exceeds work_cap.
TreeSample forward_recursion_tree(int q, const PotentialSpec& spec, double epsilon,
                                  const SpectralParameter& param, std::size_t depth,
                                  std::uint64_t seed, const TreeOptions& options = {},
                                  CavityTally* tally = nullptr);

struct ImGreenProfile {
  std::vector<MeanEstimate> im_green;  // r = 0..R: E[Im G(o, y_r)]
  std::size_t samples = 0;
  std::size_t depth = 0;
  SweepMode mode_used = SweepMode::exact;
  CavityTally tally;
};

/// M realizations; each evaluates one root-to-depth-R ray. `unit` separates
/// independent work units under the same seed.
ImGreenProfile mc_expectation_im_green(int q, const PotentialSpec& spec, double epsilon,
                                       const SpectralParameter& param, std::size_t range,
                                       std::size_t samples, std::uint64_t seed,
                                       const TreeOptions& options = {}, std::uint64_t unit = 0);

struct GreenMomentPoint {
  double lambda = 0.0;
  double eta = 0.0;
  MeanEstimate abs_mean;     // E|Im zeta|
  MeanEstimate square_mean;  // E(Im zeta)^2
  std::vector<MeanEstimate> inverse_moments;  // E|Im zeta|^{-s}, one per s
};

struct GreenMomentTable {
  int q = 2;
  double epsilon = 0.0;
  std::vector<double> s_values;
  std::size_t samples = 0;
  double bound_constant = 0.0;  // c~
  std::vector<GreenMomentPoint> points;  // lambda-major
  CavityTally tally;
};

GreenMomentTable green_condition_moments(int q, const PotentialSpec& spec, double epsilon,
                                         std::span<const double> lambdas,
                                         std::span<const double> etas,
                                         std::span<const double> s_values, std::size_t samples,
                                         std::uint64_t seed, const TreeOptions& options = {});

/// CSV "lambda,eta,s,estimate,stderr,kind"; s is 1 for abs_mean and 2 for square_mean.
void write_moment_csv(std::ostream& out, const GreenMomentTable& table);

/// E[Im G(o, y_r)] / E[Im G(o, o)] on a lambda grid at fixed eta0.
struct PhiRatioTable {
  int q = 2;
  double epsilon = 0.0;
  double eta0 = 0.0;
  std::size_t range = 0;
  std::vector<double> lambdas;               // ascending
  std::vector<std::vector<double>> ratios;   // [lambda][r], ratios[.][0] == 1
  std::vector<MeanEstimate> diagonal;        // E[Im G(o, o)] per lambda
  CavityTally tally;

  /// Linear interpolation in lambda, clamped to the grid ends.
  std::vector<double> at(double lambda) const;
};

PhiRatioTable compute_phi_ratios(int q, const PotentialSpec& spec, double epsilon, double eta0,
                                 std::span<const double> lambdas, std::size_t range,
                                 std::size_t samples, std::uint64_t seed,
                                 const TreeOptions& options = {});

/// Uniform grid from lo to hi inclusive with the given spacing (last point = hi).
std::vector<double> uniform_grid(double lo, double hi, double spacing);

/// Depth-L message passing on the directed edges of a graph, realizing the
/// Green function of the lifted operator on the universal cover truncated to
/// the ball of radius L around the lift of each vertex.
class LiftedMessages {
 public:
  /// Keeps the last `history` rounds so geodesics of length <= history can be
  /// evaluated against the same truncated ball.
  LiftedMessages(const AdjacencyList& adjacency, const PotentialAssignment& pot,
                 const SpectralParameter& param, std::size_t depth, std::size_t history,
                 LeafCondition leaf = LeafCondition::bare_site, double lower_bound = 0.0);

  Complex diagonal(Vertex x) const;
  /// g~(x~, y~) along a non-backtracking path x = path[0], ..., path[d] = y.
  Complex along(std::span<const Vertex> path) const;

  std::size_t depth() const { return depth_; }
  const CavityTally& tally() const { return tally_; }

 private:
  const AdjacencyList& adjacency_;
  const PotentialAssignment& pot_;
  DirectedEdgeIndex index_;
  Complex gamma_;
  std::size_t depth_;
  std::vector<std::vector<Complex>> history_;  // history_[j] = round L-1-j
  CavityTally tally_;
};

struct LiftedGreen {
  std::vector<Complex> diagonal;  // g~(x~, x~) for every vertex
  std::vector<Complex> pairs;     // one per requested path
  std::size_t depth = 0;
  CavityTally tally;
};

LiftedGreen lifted_green(const AdjacencyList& adjacency, const PotentialAssignment& pot,
                         const SpectralParameter& param, std::size_t depth,
                         std::span<const std::vector<Vertex>> paths,
                         LeafCondition leaf = LeafCondition::bare_site);

}  // namespace qelab
