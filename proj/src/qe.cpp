#include "qelab/qe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "qelab/errors.hpp"
#include "qelab/rng.hpp"

namespace qelab {

Complex Observable::mean() const {
  return pairwise_sum(values) / static_cast<double>(values.size());
}

namespace {

void check_sup(Complex v, double bound, const std::string& what) {
  if (!(std::abs(v) <= bound * (1.0 + 1e-12)))
    throw InvalidInput(what + " has modulus " + format_double(std::abs(v)) + " > 1");
}

Observable observable_from_file(const std::filesystem::path& path, std::size_t n) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read observable file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("observable file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_array() || j.size() != n)
    throw InvalidInput("observable file must be a JSON array with one entry per vertex (" +
                       std::to_string(n) + ")");
  Observable a;
  a.description = "file:" + path.string();
  a.values.reserve(n);
  for (const auto& v : j) {
    Complex c;
    if (v.is_number()) {
      c = v.get<double>();
    } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      c = {v[0].get<double>(), v[1].get<double>()};
    } else {
      throw InvalidInput("observable entries must be numbers or [re, im] pairs");
    }
    check_sup(c, 1.0, "observable entry " + std::to_string(a.values.size()));
    a.values.push_back(c);
  }
  return a;
}

}  // namespace

Observable indicator_observable(std::size_t n, double alpha, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InvalidInput("indicator fraction alpha must lie in (0, 1]");
  const auto count = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n)));
  std::vector<Vertex> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<Vertex>(i);
  CounterRng rng(seed, StreamTag::observable, {0});
  for (std::size_t i = 0; i < count; ++i)
    std::swap(ids[i], ids[i + rng.below(n - i)]);
  Observable a;
  a.values.assign(n, 0.0);
  for (std::size_t i = 0; i < count; ++i) a.values[ids[i]] = 1.0;
  a.description = "indicator alpha=" + format_double(alpha) + " seed=" + std::to_string(seed);
  return a;
}

Observable make_observable(const ObservableSpec& spec, std::size_t n) {
  if (n == 0) throw InvalidInput("observable needs at least one vertex");
  Observable a;
  switch (spec.kind) {
    case ObservableKind::constant:
      check_sup(spec.constant, 1.0, "constant observable");
      a.values.assign(n, spec.constant);
      a.description = "constant";
      return a;
    case ObservableKind::indicator:
      return indicator_observable(n, spec.alpha, spec.seed);
    case ObservableKind::delta:
      if (spec.vertex >= n) throw InvalidInput("delta observable vertex out of range");
      a.values.assign(n, 0.0);
      a.values[spec.vertex] = 1.0;
      a.description = "delta at " + std::to_string(spec.vertex);
      return a;
    case ObservableKind::file:
      return observable_from_file(spec.path, n);
  }
  throw InvalidInput("unknown observable kind");
}

Kernel::Kernel(std::size_t range, std::vector<std::vector<KernelEntry>> rows, std::string description)
    : range_(range), rows_(std::move(rows)), description_(std::move(description)) {
  for (const auto& row : rows_)
    for (const auto& e : row) {
      if (e.path.empty() || e.distance() > range_)
        throw InvalidInput("kernel entry beyond the declared range R=" + std::to_string(range_));
      check_sup(e.value, 1.0, "kernel entry");
    }
}

bool Kernel::is_real() const {
  for (const auto& row : rows_)
    for (const auto& e : row)
      if (e.value.imag() != 0.0) return false;
  return true;
}

double Kernel::sup_norm() const {
  double s = 0.0;
  for (const auto& row : rows_)
    for (const auto& e : row) s = std::max(s, std::abs(e.value));
  return s;
}

std::vector<Complex> Kernel::shell_sums() const {
  std::vector<Complex> out(range_ + 1);
  std::vector<Complex> per_vertex(rows_.size());
  for (std::size_t r = 0; r <= range_; ++r) {
    for (std::size_t x = 0; x < rows_.size(); ++x) {
      bool first = true;
      Complex acc = 0.0;
      for (const auto& e : rows_[x]) {
        if (e.distance() != r) continue;
        acc = first ? e.value : acc + e.value;
        first = false;
      }
      per_vertex[x] = acc;
    }
    out[r] = pairwise_sum(per_vertex);
  }
  return out;
}

Complex Kernel::trace() const { return shell_sums()[0]; }

Kernel kernel_zero(std::size_t n, std::size_t range) {
  return Kernel(range, std::vector<std::vector<KernelEntry>>(n), "zero");
}

Kernel kernel_diagonal(const Observable& a) {
  std::vector<std::vector<KernelEntry>> rows(a.size());
  for (std::size_t x = 0; x < a.size(); ++x)
    rows[x].push_back({static_cast<Vertex>(x), a.values[x], {static_cast<Vertex>(x)}});
  return Kernel(0, std::move(rows), "diagonal(" + a.description + ")");
}

namespace {

Kernel distance_kernel(const AdjacencyList& adjacency, std::size_t r, Complex value, bool shell) {
  std::vector<std::vector<KernelEntry>> rows(adjacency.size());
  for (std::size_t x = 0; x < adjacency.size(); ++x) {
    const BfsBall ball = bfs_ball(adjacency, static_cast<Vertex>(x), r);
    for (Vertex y : ball.order) {
      const std::size_t d = ball.distance[y];
      if (shell && d != r) continue;
      rows[x].push_back({y, value, ball.path_to(y)});
    }
  }
  return Kernel(r, std::move(rows),
                std::string(shell ? "shell" : "ball") + " r=" + std::to_string(r));
}

}  // namespace

Kernel kernel_shell(const AdjacencyList& adjacency, std::size_t r, Complex value) {
  return distance_kernel(adjacency, r, value, true);
}

Kernel kernel_ball(const AdjacencyList& adjacency, std::size_t r, Complex value) {
  return distance_kernel(adjacency, r, value, false);
}

bool operator==(const QEReport& a, const QEReport& b) {
  if (a.n != b.n || a.seed != b.seed || a.epsilon != b.epsilon || a.lambda0 != b.lambda0 ||
      a.eta0 != b.eta0 || a.range != b.range || a.statistic != b.statistic ||
      a.window_count != b.window_count || a.degenerate_in_window != b.degenerate_in_window ||
      a.terms.size() != b.terms.size())
    return false;
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    const auto &s = a.terms[i], &t = b.terms[i];
    if (s.index != t.index || s.lambda != t.lambda || s.bracket != t.bracket || s.average != t.average)
      return false;
  }
  return true;
}

namespace {

struct Window {
  std::vector<std::size_t> indices;
  std::size_t degenerate = 0;
};

Window spectral_window(const SpectralData& spec, double lambda0) {
  Window w;
  std::vector<double> inside;
  double norm = 1.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double l = spec.eigenvalues(static_cast<Eigen::Index>(i));
    norm = std::max(norm, std::abs(l));
    if (-lambda0 < l && l < lambda0) {
      w.indices.push_back(i);
      inside.push_back(l);
    }
  }
  w.degenerate = degenerate_count(inside, 1e-8 * norm);
  return w;
}

template <typename Bracket, typename Average>
QEReport window_sum(const SpectralData& spec, double lambda0, bool keep_terms, Bracket&& bracket,
                    Average&& average) {
  QEReport r;
  r.n = spec.size();
  r.lambda0 = lambda0;
  const Window w = spectral_window(spec, lambda0);
  r.window_count = w.indices.size();
  r.degenerate_in_window = w.degenerate;
  std::vector<double> deviations(w.indices.size());
  std::vector<EigenTerm> terms(w.indices.size());
  parallel_for(w.indices.size(), [&](std::size_t k) {
    const std::size_t i = w.indices[k];
    const double l = spec.eigenvalues(static_cast<Eigen::Index>(i));
    const auto psi = spec.eigenvectors.col(static_cast<Eigen::Index>(i));
    std::vector<double> squares(static_cast<std::size_t>(psi.size()));
    for (std::size_t x = 0; x < squares.size(); ++x) {
      const double p = psi(static_cast<Eigen::Index>(x));
      squares[x] = p * p;
    }
    const Complex b = bracket(i) / pairwise_sum(squares);
    const Complex avg = average(l);
    deviations[k] = std::abs(b - avg);
    terms[k] = {i, l, b, avg};
  });
  r.statistic = pairwise_sum(deviations) / static_cast<double>(r.n);
  if (keep_terms) r.terms = std::move(terms);
  return r;
}

}  // namespace

QEReport qe_statistic_diag(const SpectralData& spec, const Observable& a, double lambda0,
                           bool keep_terms) {
  if (a.size() != spec.size()) throw InvalidInput("observable and spectrum sizes differ");
  if (!(lambda0 > 0.0)) throw InvalidInput("lambda0 must be positive");
  const Complex mean = a.mean();
  const std::size_t n = spec.size();
  return window_sum(
      spec, lambda0, keep_terms,
      [&](std::size_t i) {
        std::vector<Complex> per_vertex(n);
        const auto psi = spec.eigenvectors.col(static_cast<Eigen::Index>(i));
        for (std::size_t x = 0; x < n; ++x) {
          const double p = psi(static_cast<Eigen::Index>(x));
          per_vertex[x] = a.values[x] * (p * p);
        }
        return pairwise_sum(per_vertex);
      },
      [&](double) { return mean; });
}

Complex AverageCurve::operator()(double lambda) const {
  if (lambdas.empty()) throw InvalidInput("empty average curve");
  if (lambdas.size() == 1 || lambda <= lambdas.front()) return values.front();
  if (lambda >= lambdas.back()) return values.back();
  const auto it = std::upper_bound(lambdas.begin(), lambdas.end(), lambda);
  const std::size_t hi = static_cast<std::size_t>(it - lambdas.begin()), lo = hi - 1;
  const double t = (lambda - lambdas[lo]) / (lambdas[hi] - lambdas[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

KernelAverage kernel_average_simple(const Kernel& k, const PhiRatioTable& ratios) {
  if (ratios.range < k.range())
    throw InvalidInput("phi-ratio table range " + std::to_string(ratios.range) +
                       " is shorter than the kernel range " + std::to_string(k.range()));
  const std::vector<Complex> shells = k.shell_sums();
  const double n = static_cast<double>(k.size());
  std::vector<Complex> normalized(shells.size());
  for (std::size_t r = 0; r < shells.size(); ++r) normalized[r] = shells[r] / n;
  if (k.range() == 0) {
    const Complex mean = normalized[0];
    return [mean](double) { return mean; };
  }
  return [normalized, ratios](double lambda) {
    const std::vector<double> phi = ratios.at(lambda);
    Complex total = phi[0] * normalized[0];
    for (std::size_t r = 1; r < normalized.size(); ++r) total += phi[r] * normalized[r];
    return total;
  };
}

QEReport qe_statistic_kernel(const SpectralData& spec, const Kernel& k, double lambda0, double eta0,
                             const KernelAverage& average, bool keep_terms) {
  if (k.size() != spec.size()) throw InvalidInput("kernel and spectrum sizes differ");
  if (!(lambda0 > 0.0)) throw InvalidInput("lambda0 must be positive");
  if (k.range() >= 1 && !k.is_real())
    throw InvalidInput(
        "kernels with R >= 1 must be real-valued");
  const std::size_t n = spec.size();
  QEReport r = window_sum(
      spec, lambda0, keep_terms,
      [&](std::size_t i) {
        std::vector<Complex> per_vertex(n);
        const auto psi = spec.eigenvectors.col(static_cast<Eigen::Index>(i));
        for (std::size_t x = 0; x < n; ++x) {
          const double px = psi(static_cast<Eigen::Index>(x));
          bool first = true;
          Complex acc = 0.0;
          for (const auto& e : k.row(static_cast<Vertex>(x))) {
            const Complex term = e.value * (px * psi(static_cast<Eigen::Index>(e.y)));
            acc = first ? term : acc + term;
            first = false;
          }
          per_vertex[x] = acc;
        }
        return pairwise_sum(per_vertex);
      },
      average);
  r.eta0 = eta0;
  r.range = k.range();
  return r;
}

Complex kernel_average_general(const Kernel& k, const AdjacencyList& adjacency,
                               const PotentialAssignment& pot, const SpectralParameter& gamma,
                               std::size_t depth) {
  if (k.size() != adjacency.size()) throw InvalidInput("kernel and graph sizes differ");
  gamma.validate();
  const std::size_t l = depth ? depth : default_depth(gamma.eta);
  const LiftedMessages messages(adjacency, pot, gamma, l, std::max<std::size_t>(k.range(), 1));
  const std::size_t n = adjacency.size();
  std::vector<double> diag(n);
  std::vector<Complex> weighted(n);
  for (std::size_t x = 0; x < n; ++x) {
    diag[x] = messages.diagonal(static_cast<Vertex>(x)).imag();
    bool first = true;
    Complex acc = 0.0;
    for (const auto& e : k.row(static_cast<Vertex>(x))) {
      const Complex term = e.value * messages.along(e.path).imag();
      acc = first ? term : acc + term;
      first = false;
    }
    weighted[x] = acc;
  }
  return pairwise_sum(weighted) / pairwise_sum(diag);
}

AverageCurve kernel_average_general_curve(const Kernel& k, const AdjacencyList& adjacency,
                                          const PotentialAssignment& pot, double eta0,
                                          std::span<const double> lambdas, std::size_t depth) {
  AverageCurve curve;
  curve.lambdas.assign(lambdas.begin(), lambdas.end());
  curve.values.resize(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    curve.values[i] = kernel_average_general(k, adjacency, pot, {lambdas[i], eta0}, depth);
  });
  return curve;
}

double equivalence_discrepancy(const Kernel& k, const AdjacencyList& adjacency,
                               const PotentialAssignment& pot, double eta0,
                               std::span<const double> lambdas, const PhiRatioTable& ratios,
                               std::size_t depth) {
  if (lambdas.empty()) throw InvalidInput("equivalence check needs a lambda grid");
  const KernelAverage simple = kernel_average_simple(k, ratios);
  const AverageCurve general = kernel_average_general_curve(k, adjacency, pot, eta0, lambdas, depth);
  std::vector<double> gaps(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    gaps[i] = std::abs(general.values[i] - simple(lambdas[i]));
  return median(gaps);
}

EquivalenceTable average_equivalence_check(const EquivalenceSetup& setup) {
  if (!setup.ratios) throw InvalidInput("equivalence check needs a phi-ratio table");
  if (!setup.kernel) throw InvalidInput("equivalence check needs a kernel builder");
  if (setup.seeds.empty() || setup.n_values.empty() || setup.lambdas.empty())
    throw InvalidInput("equivalence check needs N values, seed pairs and a lambda grid");
  EquivalenceTable table;
  for (std::size_t n : setup.n_values) {
    EquivalenceRow row;
    row.n = n;
    row.per_seed_median.resize(setup.seeds.size());
    for (std::size_t s = 0; s < setup.seeds.size(); ++s) {
      const RegularGraph g = generate_random_regular(n, setup.q, setup.seeds[s].graph_seed);
      const Kernel k = setup.kernel(g);  // sealed before the potential exists
      const PotentialAssignment pot =
          sample_potential(n, setup.potential, setup.epsilon, setup.seeds[s].potential_seed);
      row.per_seed_median[s] = equivalence_discrepancy(k, g.adjacency(), pot, setup.eta0,
                                                       setup.lambdas, *setup.ratios, setup.depth);
    }
    row.median = median(row.per_seed_median);
    table.rows.push_back(std::move(row));
  }
  table.nonincreasing = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (table.rows[i].median > table.rows[i - 1].median) table.nonincreasing = false;
  return table;
}

MassReport mass_distribution_check(const SpectralData& spec, double alpha, double lambda0,
                                   std::span<const std::uint64_t> seeds,
                                   std::span<const double> varsigma) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in (0, 1]");
  MassReport out;
  out.alpha = alpha;
  out.lambda0 = lambda0;
  out.varsigma.assign(varsigma.begin(), varsigma.end());
  const std::size_t n = spec.size();
  const Window w = spectral_window(spec, lambda0);
  for (std::uint64_t seed : seeds) {
    const Observable chi = indicator_observable(n, alpha, seed);
    std::vector<double> masses(w.indices.size());
    std::vector<double> per_vertex(n), squares(n);
    for (std::size_t k = 0; k < w.indices.size(); ++k) {
      const auto psi = spec.eigenvectors.col(static_cast<Eigen::Index>(w.indices[k]));
      for (std::size_t x = 0; x < n; ++x) {
        const double p = psi(static_cast<Eigen::Index>(x));
        squares[x] = p * p;
        per_vertex[x] = chi.values[x].real() * squares[x];
      }
      masses[k] = pairwise_sum(per_vertex) / pairwise_sum(squares);
    }
    std::vector<double> fractions;
    for (double s : varsigma) {
      const auto count = std::count_if(masses.begin(), masses.end(),
                                       [&](double m) { return std::abs(m - alpha) > s; });
      fractions.push_back(static_cast<double>(count) / static_cast<double>(n));
    }
    out.fraction.push_back(std::move(fractions));
    out.masses.push_back(std::move(masses));
  }
  for (std::size_t j = 0; j < varsigma.size(); ++j) {
    std::vector<double> column;
    for (const auto& f : out.fraction) column.push_back(f[j]);
    out.median_fraction.push_back(median(column));
  }
  return out;
}

std::vector<std::string> qe_csv_header() {
  return {"n", "seed", "epsilon", "lambda0", "eta0", "R", "statistic", "window_count"};
}

void write_qe_row(CsvWriter& csv, const QEReport& r) {
  csv.row(r.n, r.seed, r.epsilon, r.lambda0, r.eta0, r.range, r.statistic, r.window_count);
}

void write_qe_terms_csv(std::ostream& out, const QEReport& r) {
  CsvWriter csv(out, {"i", "lambda_i", "bracket", "average"});
  for (const auto& t : r.terms) csv.row(t.index, t.lambda, t.bracket.real(), t.average.real());
}

}  // namespace qelab
