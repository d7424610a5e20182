#include "qelab/anderson.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/random/beta_distribution.hpp>
#include <lapacke.h>

#include "qelab/csv.hpp"
#include "qelab/errors.hpp"
#include "qelab/rng.hpp"

namespace qelab {

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::uniform: return "uniform";
    case PotentialKind::rescaled_beta: return "rescaled-beta";
    case PotentialKind::two_point: return "two-point";
  }
  return "unknown";
}

PotentialKind potential_kind_from_string(const std::string& name) {
  if (name == "uniform") return PotentialKind::uniform;
  if (name == "rescaled-beta") return PotentialKind::rescaled_beta;
  if (name == "two-point") return PotentialKind::two_point;
  throw InvalidInput("unknown potential kind '" + name +
                     "' (expected uniform, rescaled-beta or two-point)");
}

bool PotentialSpec::symmetric() const {
  return kind != PotentialKind::rescaled_beta || beta_a == beta_b;
}

double PotentialSpec::moment(int k) const {
  if (k < 0) throw InvalidInput("negative moment order");
  if (k == 0) return 1.0;
  const double a_k = std::pow(support, k);
  switch (kind) {
    case PotentialKind::uniform:
    case PotentialKind::two_point:
      if (k % 2 == 1) return 0.0;
      return kind == PotentialKind::uniform ? a_k / (k + 1) : a_k;
    case PotentialKind::rescaled_beta: {
      // E[(2B-1)^k] = sum_j C(k,j) 2^j (-1)^(k-j) E[B^j]
      double total = 0.0;
      double beta_moment = 1.0;
      for (int j = 0; j <= k; ++j) {
        if (j > 0) beta_moment *= (beta_a + j - 1) / (beta_a + beta_b + j - 1);
        const double sign = (k - j) % 2 == 0 ? 1.0 : -1.0;
        total += boost::math::binomial_coefficient<double>(k, j) * std::ldexp(1.0, j) * sign *
                 beta_moment;
      }
      return a_k * total;
    }
  }
  return 0.0;
}

void PotentialSpec::validate() const {
  if (!(support > 0.0) || !std::isfinite(support))
    throw InvalidInput("potential support bound A must be positive");
  if (!(holder_exponent > 0.0 && holder_exponent <= 1.0))
    throw InvalidInput("Hoelder exponent b must lie in (0, 1]");
  if (kind == PotentialKind::rescaled_beta && !(beta_a > 0.0 && beta_b > 0.0))
    throw InvalidInput("beta shape parameters must be positive");
  if (kind == PotentialKind::two_point && !allow_non_pot)
    throw InvalidInput(
        "two-point potential violates (POT), the compactly supported Hoelder-continuous law "
        "condition; "
        "set allow_non_pot to use it anyway");
}

double draw_site(const PotentialSpec& spec, std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, StreamTag::potential, {index});
  return draw_omega(spec, rng);
}

double draw_omega(const PotentialSpec& spec, CounterRng& rng) {
  switch (spec.kind) {
    case PotentialKind::uniform: return spec.support * (2.0 * rng.uniform() - 1.0);
    case PotentialKind::two_point: return (rng() >> 63) ? spec.support : -spec.support;
    case PotentialKind::rescaled_beta: {
      boost::random::beta_distribution<double> beta(spec.beta_a, spec.beta_b);
      return spec.support * (2.0 * beta(rng) - 1.0);
    }
  }
  return 0.0;
}

PotentialAssignment sample_potential(std::size_t n, const PotentialSpec& spec, double epsilon,
                                     std::uint64_t seed) {
  if (n < 1) throw InvalidInput("potential needs at least one site");
  spec.validate();
  PotentialAssignment pot;
  pot.epsilon = epsilon;
  pot.omega.resize(n);
  for (std::size_t x = 0; x < n; ++x) pot.omega[x] = draw_site(spec, seed, x);
  return pot;
}

Eigen::MatrixXd assemble(const AdjacencyList& adjacency, const PotentialAssignment& pot) {
  const std::size_t n = adjacency.size();
  if (pot.size() != n)
    throw InvalidInput("potential has " + std::to_string(pot.size()) + " sites but graph has " +
                       std::to_string(n) + " vertices");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) {
    const auto i = static_cast<Eigen::Index>(x);
    m(i, i) = pot.site(x);
    for (Vertex y : adjacency[x]) m(i, static_cast<Eigen::Index>(y)) = 1.0;
  }
  return m;
}

void apply_hamiltonian(const AdjacencyList& adjacency, const PotentialAssignment& pot,
                       std::span<const double> in, std::span<double> out) {
  for (std::size_t x = 0; x < adjacency.size(); ++x) {
    double acc = pot.site(x) * in[x];
    for (Vertex y : adjacency[x]) acc += in[y];
    out[x] = acc;
  }
}

namespace {

void check_dimension(const Eigen::MatrixXd& matrix, std::size_t max_dimension) {
  if (matrix.rows() != matrix.cols()) throw InvalidInput("operator matrix is not square");
  if (static_cast<std::size_t>(matrix.rows()) > max_dimension)
    throw BudgetExceeded("operator dimension " + std::to_string(matrix.rows()) +
                         " exceeds the dense eigensolver cap " + std::to_string(max_dimension) +
                         "; lower N or raise the cap");
}

void run_dsyevd(char jobz, Eigen::MatrixXd& a, Eigen::VectorXd& w) {
  const auto n = static_cast<lapack_int>(a.rows());
  w.resize(n);
  if (n == 0) return;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, jobz, 'L', n, a.data(), n, w.data());
  if (info != 0)
    throw InvariantViolation("eigensolver convergence", "dsyevd returned info=" + std::to_string(info));
}

}  // namespace

SpectralData eigendecompose(const Eigen::MatrixXd& matrix, std::size_t max_dimension) {
  check_dimension(matrix, max_dimension);
  SpectralData out;
  out.eigenvectors = matrix;
  run_dsyevd('V', out.eigenvectors, out.eigenvalues);
  for (Eigen::Index j = 0; j < out.eigenvectors.cols(); ++j) {
    auto col = out.eigenvectors.col(j);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > 1e-8) {
        if (col(i) < 0) col = -col;
        break;
      }
    }
  }
  return out;
}

std::vector<double> eigenvalues_only(const Eigen::MatrixXd& matrix, std::size_t max_dimension) {
  check_dimension(matrix, max_dimension);
  Eigen::MatrixXd work = matrix;
  Eigen::VectorXd w;
  run_dsyevd('N', work, w);
  return {w.data(), w.data() + w.size()};
}

SpectralCheck measure_spectral_data(const Eigen::MatrixXd& matrix, const SpectralData& spec) {
  SpectralCheck out;
  const Eigen::MatrixXd& v = spec.eigenvectors;
  const Eigen::MatrixXd residual = matrix * v - v * spec.eigenvalues.asDiagonal();
  out.max_residual = residual.size() ? residual.colwise().norm().maxCoeff() : 0.0;
  const Eigen::MatrixXd gram = v.transpose() * v;
  const auto n = gram.rows();
  out.max_gram_deviation = n ? (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() : 0.0;
  out.operator_norm = spec.size() ? spec.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

void check_spectral_data(const Eigen::MatrixXd& matrix, const SpectralData& spec, double bound) {
  const SpectralCheck c = measure_spectral_data(matrix, spec);
  const double norm = std::max(c.operator_norm, 1.0);
  if (!(c.max_residual <= 1e-8 * norm))
    throw InvariantViolation("eigenpair residual",
                             "max residual " + format_double(c.max_residual) + " > 1e-8*||H||");
  if (!(c.max_gram_deviation <= 1e-8))
    throw InvariantViolation("eigenvector orthonormality",
                             "Gram deviation " + format_double(c.max_gram_deviation));
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
    if (std::abs(spec.eigenvalues(i)) > bound * (1.0 + 1e-12))
      throw InvariantViolation("spectral bound", "eigenvalue " + format_double(spec.eigenvalues(i)) +
                                                     " outside +-" + format_double(bound));
}

std::size_t degenerate_count(std::span<const double> eigenvalues, double tol) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    const bool left = i > 0 && eigenvalues[i] - eigenvalues[i - 1] <= tol;
    const bool right = i + 1 < eigenvalues.size() && eigenvalues[i + 1] - eigenvalues[i] <= tol;
    if (left || right) ++count;
  }
  return count;
}

void write_spectrum_csv(std::ostream& out, const SpectralData& spec) {
  CsvWriter csv(out, {"index", "eigenvalue"});
  for (std::size_t i = 0; i < spec.size(); ++i)
    csv.row(i, spec.eigenvalues(static_cast<Eigen::Index>(i)));
}

}  // namespace qelab
