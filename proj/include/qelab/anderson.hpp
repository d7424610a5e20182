#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qelab/graph.hpp"

namespace qelab {

enum class PotentialKind { uniform, rescaled_beta, two_point };

std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& name);

/// Single-site distribution nu with support in [-A, A].
///   uniform:       Unif[-A, A]
///   rescaled_beta: A (2B - 1), B ~ Beta(beta_a, beta_b)
///   two_point:     +-A with probability 1/2 each (no Hoelder continuity)
struct PotentialSpec {
  PotentialKind kind = PotentialKind::uniform;
  double support = 1.0;  // A
  double beta_a = 2.0;
  double beta_b = 2.0;
  double holder_exponent = 1.0;  // informational
  double holder_constant = 0.5;  // informational
  bool allow_non_pot = false;

  bool continuous() const { return kind != PotentialKind::two_point; }
  bool symmetric() const;
  /// E[omega^k].
  double moment(int k) const;
  /// Throws InvalidInput for bad parameters or an unapproved two-point law.
  void validate() const;
};

class CounterRng;

/// One draw from nu using the given stream.
double draw_omega(const PotentialSpec& spec, CounterRng& rng);

/// Draw of omega for one site: the stream is keyed by (seed, potential, index).
double draw_site(const PotentialSpec& spec, std::uint64_t seed, std::uint64_t index);

struct PotentialAssignment {
  std::vector<double> omega;
  double epsilon = 0.0;

  std::size_t size() const { return omega.size(); }
  double site(std::size_t x) const { return epsilon * omega[x]; }
};

PotentialAssignment sample_potential(std::size_t n, const PotentialSpec& spec, double epsilon,
                                     std::uint64_t seed);

/// Dense H = A + eps W. The adjacency need not be regular.
Eigen::MatrixXd assemble(const AdjacencyList& adjacency, const PotentialAssignment& pot);

/// out = H in without forming the matrix.
void apply_hamiltonian(const AdjacencyList& adjacency, const PotentialAssignment& pot,
                       std::span<const double> in, std::span<double> out);

struct SpectralData {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalues[i]

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

inline constexpr std::size_t kDefaultMaxDimension = 4096;

/// Full symmetric eigendecomposition (LAPACK dsyevd). Each eigenvector is
/// signed so that its first coordinate with magnitude above 1e-8 is positive.
SpectralData eigendecompose(const Eigen::MatrixXd& matrix,
                            std::size_t max_dimension = kDefaultMaxDimension);
std::vector<double> eigenvalues_only(const Eigen::MatrixXd& matrix,
                                     std::size_t max_dimension = kDefaultMaxDimension);

struct SpectralCheck {
  double max_residual = 0.0;        // max_i ||H psi_i - lambda_i psi_i||
  double max_gram_deviation = 0.0;  // max |<psi_i, psi_j> - delta_ij|
  double operator_norm = 0.0;       // max |lambda_i|
};

SpectralCheck measure_spectral_data(const Eigen::MatrixXd& matrix, const SpectralData& spec);

/// Throws InvariantViolation unless residual <= 1e-8 ||H||, Gram deviation <= 1e-8,
/// and every eigenvalue lies within +-bound.
void check_spectral_data(const Eigen::MatrixXd& matrix, const SpectralData& spec, double bound);

/// Number of eigenvalues i having a neighbor within tol (numerically degenerate).
std::size_t degenerate_count(std::span<const double> eigenvalues, double tol);

/// CSV with header "index,eigenvalue".
void write_spectrum_csv(std::ostream& out, const SpectralData& spec);

}  // namespace qelab
