#include "qelab/tree_green.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include "qelab/csv.hpp"
#include "qelab/errors.hpp"
#include "qelab/rng.hpp"

namespace qelab {

void SpectralParameter::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta) || !std::isfinite(lambda))
    throw InvalidInput("spectral parameter needs finite lambda and eta > 0");
}

Complex free_forward_green(double lambda, int q) {
  if (q < 1) throw InvalidInput("q must be positive");
  const double edge = 2.0 * std::sqrt(static_cast<double>(q));
  if (!(std::abs(lambda) < edge))
    throw InvalidInput("free forward Green function at lambda=" + format_double(lambda) +
                       " is outside the open band (-2 sqrt q, 2 sqrt q)");
  return {lambda / (2.0 * q), -std::sqrt(4.0 * q - lambda * lambda) / (2.0 * q)};
}

Complex free_forward_green_complex(Complex gamma, int q) {
  if (q < 1) throw InvalidInput("q must be positive");
  const double two_q = 2.0 * q;
  const Complex s = std::sqrt(gamma * gamma - 4.0 * static_cast<double>(q));
  // Take the larger-modulus root directly and the other from z1 z2 = 1/q.
  const Complex plus = (gamma + s) / two_q;
  const Complex minus = (gamma - s) / two_q;
  const Complex big = std::abs(plus) >= std::abs(minus) ? plus : minus;
  const Complex small = 1.0 / (static_cast<double>(q) * big);
  return big.imag() < 0.0 ? big : small;
}

Complex free_green_diagonal(Complex gamma, int q) {
  return 1.0 / (static_cast<double>(q + 1) * free_forward_green_complex(gamma, q) - gamma);
}

Complex green_diagonal(std::span<const Complex> zeta_children, double omega_root, double epsilon,
                       Complex gamma) {
  Complex denom = epsilon * omega_root - gamma;
  for (const Complex& z : zeta_children) denom += z;
  return 1.0 / denom;
}

Complex green_along_path(Complex g_diag, std::span<const Complex> zetas_on_path) {
  Complex g = g_diag;
  for (const Complex& z : zetas_on_path) g *= z;
  return g;
}

double deterministic_bound_constant(int q, double epsilon, double support, double lambda0,
                                    double eta) {
  return (q + 1) + std::abs(epsilon) * support + lambda0 + std::max(1.0, eta);
}

void CavityTally::merge(const CavityTally& other) {
  checked += other.checked;
  sign_violations += other.sign_violations;
  modulus_violations += other.modulus_violations;
  lower_bound_violations += other.lower_bound_violations;
  min_lower_bound_ratio = std::min(min_lower_bound_ratio, other.min_lower_bound_ratio);
}

std::size_t default_depth(double eta) {
  if (!(eta > 0.0)) throw InvalidInput("eta must be positive");
  const double l = std::ceil(8.0 / eta);
  return l >= 400.0 ? 400 : static_cast<std::size_t>(l);
}

std::uint64_t tree_ball_size(int q, std::size_t depth) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 1, level = static_cast<std::uint64_t>(q + 1);
  for (std::size_t d = 1; d <= depth; ++d) {
    if (total > kMax - level) return kMax;
    total += level;
    if (d < depth) {
      if (level > kMax / static_cast<std::uint64_t>(q)) return kMax;
      level *= static_cast<std::uint64_t>(q);
    }
  }
  return total;
}

namespace {

Complex leaf_value(Complex base, LeafCondition leaf, int q, Complex free) {
  return leaf == LeafCondition::bare_site ? 1.0 / base : 1.0 / (base - static_cast<double>(q) * free);
}

class ExactSweep {
 public:
  ExactSweep(int q, std::size_t depth, double epsilon, Complex gamma, const SiteSource& sites,
             LeafCondition leaf, std::size_t ray_length, CavityTally* tally, double lower_bound)
      : q_(q), depth_(depth), epsilon_(epsilon), gamma_(gamma), sites_(sites), leaf_(leaf),
        free_(free_forward_green_complex(gamma, q)), tally_(tally), lower_(lower_bound),
        ray_(ray_length) {
    offset_.assign(depth + 2, 0);
    offset_[1] = 1;
    std::uint64_t width = static_cast<std::uint64_t>(q + 1);
    for (std::size_t d = 1; d <= depth; ++d) {
      offset_[d + 1] = offset_[d] + width;
      width *= static_cast<std::uint64_t>(q);
    }
  }

  TreeSample run() {
    TreeSample out;
    out.omega_root = sites_(0);
    out.root_children.reserve(static_cast<std::size_t>(q_ + 1));
    for (int c = 0; c <= q_; ++c) out.root_children.push_back(node(1, static_cast<std::uint64_t>(c)));
    out.ray = std::move(ray_);
    return out;
  }

 private:
  Complex node(std::size_t d, std::uint64_t pos) {
    const Complex base = gamma_ - epsilon_ * sites_(offset_[d] + pos);
    Complex z;
    if (d == depth_) {
      z = leaf_value(base, leaf_, q_, free_);
    } else {
      Complex sum = 0.0;
      for (int c = 0; c < q_; ++c) sum += node(d + 1, pos * static_cast<std::uint64_t>(q_) + c);
      z = 1.0 / (base - sum);
    }
    if (tally_) tally_->record(z, gamma_.imag(), lower_);
    if (pos == 0 && d <= ray_.size()) ray_[d - 1] = z;
    return z;
  }

  int q_;
  std::size_t depth_;
  double epsilon_;
  Complex gamma_;
  const SiteSource& sites_;
  LeafCondition leaf_;
  Complex free_;
  CavityTally* tally_;
  double lower_;
  std::vector<std::uint64_t> offset_;
  std::vector<Complex> ray_;
};

void check_depth(std::size_t depth, std::size_t ray_length) {
  if (depth < 1) throw InvalidInput("tree depth L must be at least 1");
  if (ray_length > depth) throw InvalidInput("ray longer than the tree depth");
}

}  // namespace

TreeSample sweep_tree_exact(int q, std::size_t depth, double epsilon, Complex gamma,
                            const SiteSource& sites, LeafCondition leaf, std::size_t ray_length,
                            std::uint64_t work_cap, CavityTally* tally, double lower_bound) {
  if (q < 1) throw InvalidInput("q must be positive");
  if (!(gamma.imag() > 0.0)) throw InvalidInput("Im gamma must be positive");
  check_depth(depth, ray_length);
  const std::uint64_t nodes = tree_ball_size(q, depth);
  if (nodes > work_cap)
    throw BudgetExceeded("depth-" + std::to_string(depth) + " ball of T_" + std::to_string(q) +
                         " has " + std::to_string(nodes) + " nodes, above the sweep work cap " +
                         std::to_string(work_cap) + "; lower L or M");
  return ExactSweep(q, depth, epsilon, gamma, sites, leaf, ray_length, tally, lower_bound).run();
}

CavityPool::CavityPool(int q, const PotentialSpec& spec, double epsilon, Complex gamma,
                       std::size_t depth, LeafCondition leaf, std::size_t pool_size,
                       std::uint64_t seed, std::uint64_t unit, std::size_t keep_levels,
                       double lower_bound, CavityTally& tally)
    : q_(q), spec_(spec), epsilon_(epsilon), gamma_(gamma), depth_(depth), leaf_(leaf), seed_(seed),
      unit_(unit), lower_bound_(lower_bound), free_(free_forward_green_complex(gamma, q)) {
  if (depth < 1) throw InvalidInput("tree depth L must be at least 1");
  if (pool_size < 1) throw InvalidInput("pool size must be positive");
  keep_levels = std::clamp<std::size_t>(keep_levels, 1, depth);
  levels_.resize(keep_levels);
  const double eta = gamma.imag();
  std::vector<Complex> below, current(pool_size);
  for (std::size_t k = depth; k >= 1; --k) {
    CounterRng rng(seed, StreamTag::tree_level, {unit, k});
    for (std::size_t j = 0; j < pool_size; ++j) {
      const Complex base = gamma - epsilon * draw_omega(spec, rng);
      Complex z;
      if (k == depth) {
        z = leaf_value(base, leaf, q, free_);
      } else {
        Complex sum = 0.0;
        for (int c = 0; c < q; ++c) sum += below[rng.below(pool_size)];
        z = 1.0 / (base - sum);
      }
      tally.record(z, eta, lower_bound);
      current[j] = z;
    }
    if (k <= keep_levels) levels_[k - 1] = current;
    below.swap(current);
    current.resize(pool_size);
  }
}

TreeSample CavityPool::draw(std::uint64_t sample, std::size_t ray_length, CavityTally& tally) const {
  check_depth(depth_, ray_length);
  if (levels_.size() < std::min(ray_length + 1, depth_))
    throw InvalidInput("pool keeps too few levels for the requested ray");
  CounterRng rng(seed_, StreamTag::tree_draw, {unit_, sample});
  TreeSample out;
  out.omega_root = draw_omega(spec_, rng);
  out.ray.resize(ray_length);
  std::optional<Complex> below;
  for (std::size_t k = ray_length; k >= 1; --k) {
    const Complex z = fresh(k, rng, below);
    tally.record(z, gamma_.imag(), lower_bound_);
    out.ray[k - 1] = z;
    below = z;
  }
  const auto& top = levels_[0];
  out.root_children.reserve(static_cast<std::size_t>(q_ + 1));
  out.root_children.push_back(ray_length >= 1 ? out.ray[0] : top[rng.below(top.size())]);
  for (int c = 0; c < q_; ++c) out.root_children.push_back(top[rng.below(top.size())]);
  return out;
}

Complex CavityPool::fresh(std::size_t level, CounterRng& rng, std::optional<Complex> along) const {
  // Ray node at `level`: its ray child (if any) is `along`, the other children
  // are resampled from level + 1.
  const Complex base = gamma_ - epsilon_ * draw_omega(spec_, rng);
  if (level == depth_) return leaf_value(base, leaf_, q_, free_);
  const auto& pool = levels_[level];  // entries of level + 1
  Complex sum = along ? *along : pool[rng.below(pool.size())];
  for (int c = 1; c < q_; ++c) sum += pool[rng.below(pool.size())];
  return 1.0 / (base - sum);
}

TreeSample forward_recursion_tree(int q, const PotentialSpec& spec, double epsilon,
                                  const SpectralParameter& param, std::size_t depth,
                                  std::uint64_t seed, const TreeOptions& options,
                                  CavityTally* tally) {
  param.validate();
  spec.validate();
  CavityTally local;
  CavityTally& t = tally ? *tally : local;
  const double lower = param.eta / std::pow(deterministic_bound_constant(
                                                q, epsilon, spec.support,
                                                std::max(options.lambda0, std::abs(param.lambda)),
                                                param.eta),
                                            2);
  const bool fits = tree_ball_size(q, depth) <= options.work_cap;
  if (options.mode == SweepMode::exact || (options.mode == SweepMode::automatic && fits)) {
    const SiteSource sites = [&](std::uint64_t i) { return draw_site(spec, seed, i); };
    return sweep_tree_exact(q, depth, epsilon, param.gamma(), sites, options.leaf, 0,
                            options.work_cap, &t, lower);
  }
  const std::size_t pool = options.pool_size ? options.pool_size : 1024;
  CavityPool cavity(q, spec, epsilon, param.gamma(), depth, options.leaf, pool, seed, 0, 1, lower, t);
  return cavity.draw(0, 0, t);
}

namespace {

/// Produces the per-sample trees of one work unit in either sweep mode.
class SampleSource {
 public:
  SampleSource(int q, const PotentialSpec& spec, double epsilon, Complex gamma, std::size_t depth,
               const TreeOptions& options, std::size_t samples, std::size_t ray_length,
               std::uint64_t seed, std::uint64_t unit, double lower, CavityTally& tally)
      : q_(q), spec_(spec), epsilon_(epsilon), gamma_(gamma), depth_(depth), options_(options),
        ray_length_(ray_length), seed_(seed), unit_(unit), lower_(lower), tally_(tally) {
    check_depth(depth, ray_length);
    const std::uint64_t ball = tree_ball_size(q, depth);
    const bool fits = ball <= options.work_cap / std::max<std::uint64_t>(samples, 1);
    if (options.mode == SweepMode::exact && !fits)
      throw BudgetExceeded("exact sweep of " + std::to_string(samples) + " depth-" +
                           std::to_string(depth) + " balls exceeds the work cap " +
                           std::to_string(options.work_cap) + "; lower L or M");
    exact_ = options.mode == SweepMode::exact || (options.mode == SweepMode::automatic && fits);
    if (!exact_) {
      const std::size_t pool = options.pool_size ? options.pool_size : std::max<std::size_t>(1024, samples);
      pool_.emplace(q, spec, epsilon, gamma, depth, options.leaf, pool, seed, unit,
                    std::min(depth, ray_length + 1), lower, tally);
    }
  }

  bool exact() const { return exact_; }

  TreeSample sample(std::uint64_t m) {
    if (!exact_) return pool_->draw(m, ray_length_, tally_);
    const std::uint64_t key = stream_key(seed_, StreamTag::tree_exact, {unit_, m});
    const SiteSource sites = [&](std::uint64_t i) { return draw_site(spec_, key, i); };
    return sweep_tree_exact(q_, depth_, epsilon_, gamma_, sites, options_.leaf, ray_length_,
                            options_.work_cap, &tally_, lower_);
  }

 private:
  int q_;
  const PotentialSpec& spec_;
  double epsilon_;
  Complex gamma_;
  std::size_t depth_;
  const TreeOptions& options_;
  std::size_t ray_length_;
  std::uint64_t seed_, unit_;
  double lower_;
  CavityTally& tally_;
  bool exact_ = true;
  std::optional<CavityPool> pool_;
};

}  // namespace

ImGreenProfile mc_expectation_im_green(int q, const PotentialSpec& spec, double epsilon,
                                       const SpectralParameter& param, std::size_t range,
                                       std::size_t samples, std::uint64_t seed,
                                       const TreeOptions& options, std::uint64_t unit) {
  param.validate();
  spec.validate();
  if (samples < 1) throw InvalidInput("need at least one Monte-Carlo sample");
  const std::size_t depth = options.depth ? options.depth : default_depth(param.eta);
  if (depth <= range)
    throw InvalidInput("tree depth L=" + std::to_string(depth) + " must exceed the range R=" +
                       std::to_string(range));
  ImGreenProfile out;
  out.samples = samples;
  out.depth = depth;
  const double lower = param.eta / std::pow(deterministic_bound_constant(
                                                q, epsilon, spec.support,
                                                std::max(options.lambda0, std::abs(param.lambda)),
                                                param.eta),
                                            2);
  SampleSource source(q, spec, epsilon, param.gamma(), depth, options, samples, range, seed, unit,
                      lower, out.tally);
  out.mode_used = source.exact() ? SweepMode::exact : SweepMode::pooled;

  std::vector<std::vector<double>> im(range + 1, std::vector<double>(samples));
  for (std::size_t m = 0; m < samples; ++m) {
    const TreeSample s = source.sample(m);
    Complex g = green_diagonal(s.root_children, s.omega_root, epsilon, param.gamma());
    im[0][m] = g.imag();
    for (std::size_t r = 1; r <= range; ++r) {
      g *= s.ray[r - 1];
      im[r][m] = g.imag();
    }
  }
  out.im_green.reserve(range + 1);
  for (const auto& column : im) out.im_green.push_back(mean_and_stderr(column));
  return out;
}

GreenMomentTable green_condition_moments(int q, const PotentialSpec& spec, double epsilon,
                                         std::span<const double> lambdas,
                                         std::span<const double> etas,
                                         std::span<const double> s_values, std::size_t samples,
                                         std::uint64_t seed, const TreeOptions& options) {
  spec.validate();
  if (samples < 1) throw InvalidInput("need at least one Monte-Carlo sample");
  for (double s : s_values)
    if (!(s > 0.0)) throw InvalidInput("inverse-moment orders s must be positive");
  GreenMomentTable table;
  table.q = q;
  table.epsilon = epsilon;
  table.s_values.assign(s_values.begin(), s_values.end());
  table.samples = samples;
  double lambda0 = options.lambda0;
  for (double l : lambdas) lambda0 = std::max(lambda0, std::abs(l));
  table.bound_constant = deterministic_bound_constant(q, epsilon, spec.support, lambda0);

  const std::size_t units = lambdas.size() * etas.size();
  table.points.resize(units);
  std::vector<CavityTally> tallies(units);
  parallel_for(units, [&](std::size_t u) {
    const SpectralParameter param{lambdas[u / etas.size()], etas[u % etas.size()]};
    param.validate();
    const double ctilde =
        deterministic_bound_constant(q, epsilon, spec.support, lambda0, param.eta);
    const double lower = param.eta / (ctilde * ctilde);
    const std::size_t depth = options.depth ? options.depth : default_depth(param.eta);
    SampleSource source(q, spec, epsilon, param.gamma(), depth, options, samples, 1, seed, u, lower,
                        tallies[u]);
    std::vector<double> abs_im(samples), sq_im(samples);
    std::vector<std::vector<double>> inv(s_values.size(), std::vector<double>(samples));
    for (std::size_t m = 0; m < samples; ++m) {
      const double a = std::abs(source.sample(m).ray[0].imag());
      abs_im[m] = a;
      sq_im[m] = a * a;
      const double guarded = std::max(a, lower);
      for (std::size_t k = 0; k < s_values.size(); ++k) inv[k][m] = std::pow(guarded, -s_values[k]);
    }
    GreenMomentPoint& p = table.points[u];
    p.lambda = param.lambda;
    p.eta = param.eta;
    p.abs_mean = mean_and_stderr(abs_im);
    p.square_mean = mean_and_stderr(sq_im);
    for (const auto& column : inv) p.inverse_moments.push_back(mean_and_stderr(column));
  });
  for (const auto& t : tallies) table.tally.merge(t);
  return table;
}

void write_moment_csv(std::ostream& out, const GreenMomentTable& table) {
  CsvWriter csv(out, {"lambda", "eta", "s", "estimate", "stderr", "kind"});
  for (const auto& p : table.points) {
    csv.row(p.lambda, p.eta, 1.0, p.abs_mean.mean, p.abs_mean.std_error, "abs_mean");
    csv.row(p.lambda, p.eta, 2.0, p.square_mean.mean, p.square_mean.std_error, "square_mean");
    for (std::size_t k = 0; k < table.s_values.size(); ++k)
      csv.row(p.lambda, p.eta, table.s_values[k], p.inverse_moments[k].mean,
              p.inverse_moments[k].std_error, "inverse_moment");
  }
}

std::vector<double> PhiRatioTable::at(double lambda) const {
  if (lambdas.empty()) throw InvalidInput("empty phi-ratio table");
  if (lambdas.size() == 1 || lambda <= lambdas.front()) return ratios.front();
  if (lambda >= lambdas.back()) return ratios.back();
  const auto it = std::upper_bound(lambdas.begin(), lambdas.end(), lambda);
  const std::size_t hi = static_cast<std::size_t>(it - lambdas.begin());
  const std::size_t lo = hi - 1;
  const double t = (lambda - lambdas[lo]) / (lambdas[hi] - lambdas[lo]);
  std::vector<double> out(range + 1);
  for (std::size_t r = 0; r <= range; ++r)
    out[r] = ratios[lo][r] + t * (ratios[hi][r] - ratios[lo][r]);
  return out;
}

PhiRatioTable compute_phi_ratios(int q, const PotentialSpec& spec, double epsilon, double eta0,
                                 std::span<const double> lambdas, std::size_t range,
                                 std::size_t samples, std::uint64_t seed,
                                 const TreeOptions& options) {
  if (lambdas.empty()) throw InvalidInput("phi ratios need a non-empty lambda grid");
  if (!std::is_sorted(lambdas.begin(), lambdas.end()))
    throw InvalidInput("lambda grid must be ascending");
  PhiRatioTable out;
  out.q = q;
  out.epsilon = epsilon;
  out.eta0 = eta0;
  out.range = range;
  out.lambdas.assign(lambdas.begin(), lambdas.end());
  out.ratios.resize(lambdas.size());
  out.diagonal.resize(lambdas.size());
  std::vector<CavityTally> tallies(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    const ImGreenProfile p = mc_expectation_im_green(q, spec, epsilon, {lambdas[i], eta0}, range,
                                                     samples, seed, options, i);
    tallies[i] = p.tally;
    out.diagonal[i] = p.im_green[0];
    out.ratios[i].resize(range + 1);
    for (std::size_t r = 0; r <= range; ++r)
      out.ratios[i][r] = p.im_green[r].mean / p.im_green[0].mean;
  });
  for (const CavityTally& t : tallies) out.tally.merge(t);
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, double spacing) {
  if (!(spacing > 0.0) || !(hi >= lo)) throw InvalidInput("bad grid bounds or spacing");
  const auto n = static_cast<std::size_t>(std::llround(std::ceil((hi - lo) / spacing - 1e-9)));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    grid[i] = n ? lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n) : lo;
  return grid;
}

LiftedMessages::LiftedMessages(const AdjacencyList& adjacency, const PotentialAssignment& pot,
                               const SpectralParameter& param, std::size_t depth,
                               std::size_t history, LeafCondition leaf, double lower_bound)
    : adjacency_(adjacency), pot_(pot), index_(adjacency), gamma_(param.gamma()), depth_(depth) {
  param.validate();
  if (depth < 1) throw InvalidInput("lifted Green depth L must be at least 1");
  if (pot.size() != adjacency.size()) throw InvalidInput("potential length does not match graph");
  const std::size_t keep = std::clamp<std::size_t>(history, 1, depth);
  const int q_leaf = adjacency.empty() ? 1 : std::max<int>(1, static_cast<int>(adjacency[0].size()) - 1);
  const Complex free = free_forward_green_complex(gamma_, q_leaf);
  const std::size_t edges = index_.size();
  std::vector<Complex> current(edges), next(edges);
  for (std::size_t e = 0; e < edges; ++e) {
    const Vertex v = index_[e].to;
    current[e] = leaf_value(gamma_ - pot.site(v), leaf, q_leaf, free);
    tally_.record(current[e], param.eta, lower_bound);
  }
  history_.assign(keep, {});
  if (depth - 1 < keep) history_[depth - 1] = current;
  for (std::size_t round = 1; round < depth; ++round) {
    for (std::size_t e = 0; e < edges; ++e) {
      const Vertex u = index_[e].from, v = index_[e].to;
      Complex sum = 0.0;
      for (std::size_t f = index_.begin_of(v); f < index_.end_of(v); ++f)
        if (index_[f].to != u) sum += current[f];
      next[e] = 1.0 / (gamma_ - pot.site(v) - sum);
      tally_.record(next[e], param.eta, lower_bound);
    }
    current.swap(next);
    const std::size_t j = depth - 1 - round;
    if (j < keep) history_[j] = current;
  }
}

Complex LiftedMessages::diagonal(Vertex x) const {
  if (x >= adjacency_.size()) throw InvalidInput("vertex out of range");
  const auto& top = history_[0];
  Complex denom = pot_.site(x) - gamma_;
  for (std::size_t e = index_.begin_of(x); e < index_.end_of(x); ++e) denom += top[e];
  return 1.0 / denom;
}

Complex LiftedMessages::along(std::span<const Vertex> path) const {
  if (path.empty()) throw InvalidInput("empty path");
  const std::size_t d = path.size() - 1;
  if (d > history_.size())
    throw InvalidInput("path of length " + std::to_string(d) + " exceeds the kept message history " +
                       std::to_string(history_.size()) + " (depth L=" + std::to_string(depth_) + ")");
  for (std::size_t k = 2; k <= d; ++k)
    if (path[k] == path[k - 2])
      throw InvalidInput("path backtracks at position " + std::to_string(k));
  Complex g = diagonal(path[0]);
  for (std::size_t k = 1; k <= d; ++k) g *= history_[k - 1][index_.index_of(path[k - 1], path[k])];
  return g;
}

LiftedGreen lifted_green(const AdjacencyList& adjacency, const PotentialAssignment& pot,
                         const SpectralParameter& param, std::size_t depth,
                         std::span<const std::vector<Vertex>> paths, LeafCondition leaf) {
  std::size_t longest = 1;
  for (const auto& p : paths) {
    if (p.empty()) throw InvalidInput("empty path");
    longest = std::max(longest, p.size() - 1);
  }
  if (longest > depth)
    throw InvalidInput("path longer than the lift depth L=" + std::to_string(depth));
  const LiftedMessages messages(adjacency, pot, param, depth, longest, leaf);
  LiftedGreen out;
  out.depth = depth;
  out.diagonal.resize(adjacency.size());
  for (std::size_t x = 0; x < adjacency.size(); ++x)
    out.diagonal[x] = messages.diagonal(static_cast<Vertex>(x));
  out.pairs.reserve(paths.size());
  for (const auto& p : paths) out.pairs.push_back(messages.along(p));
  out.tally = messages.tally();
  return out;
}

}  // namespace qelab
