#include <cmath>
#include <sstream>

#include "doctest.h"

#include "qelab/anderson.hpp"
#include "qelab/errors.hpp"
#include "qelab/graph.hpp"
#include "qelab/numeric.hpp"

using namespace qelab;

namespace {

RegularGraph complete4() {
  const std::pair<Vertex, Vertex> e[] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  return RegularGraph::from_edges(4, 2, e);
}

RegularGraph k33() {
  std::vector<std::pair<Vertex, Vertex>> e;
  for (Vertex a = 0; a < 3; ++a)
    for (Vertex b = 3; b < 6; ++b) e.push_back({a, b});
  return RegularGraph::from_edges(6, 2, e);
}

PotentialSpec uniform() { return {}; }

}  // namespace

TEST_CASE("zero coupling removes the potential") {
  const PotentialAssignment pot = sample_potential(3, uniform(), 0.0, 5);
  for (std::size_t x = 0; x < 3; ++x) CHECK(pot.site(x) == 0.0);
}

TEST_CASE("uniform draws have the moments of Unif[-1, 1]") {
  const PotentialAssignment pot = sample_potential(100000, uniform(), 1.0, 5);
  std::vector<double> w(pot.omega), w2(pot.omega.size());
  for (std::size_t i = 0; i < w.size(); ++i) w2[i] = w[i] * w[i];
  CHECK(std::abs(pairwise_sum(w) / 1e5) < 0.01);
  CHECK(std::abs(pairwise_sum(w2) / 1e5 - 1.0 / 3.0) < 0.01);
  for (double o : pot.omega) CHECK((o >= -1.0 && o <= 1.0));
}

TEST_CASE("site values respect the support bound") {
  const PotentialAssignment pot = sample_potential(4, uniform(), 0.2, 9);
  for (std::size_t x = 0; x < 4; ++x) CHECK(std::abs(pot.site(x)) <= 0.2);
}

TEST_CASE("draws are keyed by seed and site index") {
  const PotentialAssignment a = sample_potential(50, uniform(), 0.3, 11);
  const PotentialAssignment b = sample_potential(80, uniform(), 0.3, 11);
  for (std::size_t x = 0; x < 50; ++x) {
    CHECK(a.omega[x] == b.omega[x]);
    CHECK(a.omega[x] == draw_site(uniform(), 11, x));
  }
  CHECK(sample_potential(50, uniform(), 0.3, 12).omega != a.omega);
}

TEST_CASE("rescaled beta draws stay in [-A, A] with the right mean") {
  PotentialSpec s;
  s.kind = PotentialKind::rescaled_beta;
  s.support = 2.0;
  s.beta_a = 2.0;
  s.beta_b = 5.0;
  const PotentialAssignment pot = sample_potential(40000, s, 1.0, 3);
  for (double o : pot.omega) CHECK((o >= -2.0 && o <= 2.0));
  const double expected = 2.0 * (2.0 * 2.0 / 7.0 - 1.0);
  CHECK(std::abs(pairwise_sum(pot.omega) / 4e4 - expected) < 0.02);
  CHECK(s.moment(1) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_FALSE(s.symmetric());
}

TEST_CASE("two-point potential needs an explicit override") {
  PotentialSpec s;
  s.kind = PotentialKind::two_point;
  try {
    sample_potential(10, s, 0.1, 1);
    FAIL("two-point potential accepted without override");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("(POT)") != std::string::npos);
  }
  s.allow_non_pot = true;
  const PotentialAssignment pot = sample_potential(1000, s, 1.0, 1);
  for (double o : pot.omega) CHECK(std::abs(o) == 1.0);
}

TEST_CASE("potential kind names round trip") {
  for (PotentialKind k : {PotentialKind::uniform, PotentialKind::rescaled_beta, PotentialKind::two_point})
    CHECK(potential_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(potential_kind_from_string("gaussian"), InvalidInput);
}

TEST_CASE("assembly of small operators") {
  const RegularGraph g = complete4();
  const Eigen::MatrixXd m = assemble(g.adjacency(), sample_potential(4, uniform(), 0.0, 1));
  for (Eigen::Index x = 0; x < 4; ++x) {
    CHECK(m.row(x).sum() == 3.0);
    CHECK(m(x, x) == 0.0);
  }
  const AdjacencyList chain{{1}, {0}};
  PotentialAssignment zero;
  zero.omega = {0.0, 0.0};
  const Eigen::MatrixXd c = assemble(chain, zero);
  CHECK(c(0, 0) == 0.0);
  CHECK(c(0, 1) == 1.0);
  CHECK(c(1, 0) == 1.0);
  CHECK(c(1, 1) == 0.0);
  PotentialAssignment wrong;
  wrong.omega = {0.0};
  CHECK_THROWS_AS(assemble(chain, wrong), InvalidInput);
}

TEST_CASE("diagonal of the operator carries exactly eps * omega") {
  const RegularGraph g = generate_random_regular(64, 2, 7);
  const PotentialAssignment pot = sample_potential(64, uniform(), 0.2, 3);
  const Eigen::MatrixXd m = assemble(g.adjacency(), pot);
  double trace = 0.0, expected = 0.0;
  for (std::size_t x = 0; x < 64; ++x) {
    trace += m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x));
    expected += 0.2 * pot.omega[x];
  }
  CHECK(trace == expected);
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sparse application equals the dense product") {
  const RegularGraph g = generate_random_regular(64, 2, 7);
  const PotentialAssignment pot = sample_potential(64, uniform(), 0.2, 3);
  const Eigen::MatrixXd m = assemble(g.adjacency(), pot);
  std::vector<double> in(64), out(64);
  for (std::size_t i = 0; i < 64; ++i) in[i] = std::sin(1.0 + static_cast<double>(i));
  apply_hamiltonian(g.adjacency(), pot, in, out);
  const Eigen::VectorXd dense = m * Eigen::Map<const Eigen::VectorXd>(in.data(), 64);
  for (std::size_t i = 0; i < 64; ++i) CHECK(out[i] == doctest::Approx(dense(static_cast<Eigen::Index>(i))).epsilon(1e-13));
}

TEST_CASE("spectra of structured graphs") {
  const SpectralData k4 = eigendecompose(assemble(complete4().adjacency(), sample_potential(4, uniform(), 0.0, 1)));
  const double e4[] = {-1, -1, -1, 3};
  for (int i = 0; i < 4; ++i) CHECK(k4.eigenvalues(i) == doctest::Approx(e4[i]).epsilon(1e-12));
  const SpectralData b = eigendecompose(assemble(k33().adjacency(), sample_potential(6, uniform(), 0.0, 1)));
  const double e6[] = {-3, 0, 0, 0, 0, 3};
  for (int i = 0; i < 6; ++i) CHECK(std::abs(b.eigenvalues(i) - e6[i]) < 1e-12);
}

TEST_CASE("decomposition invariants on a random instance") {
  const RegularGraph g = generate_random_regular(64, 2, 7);
  const PotentialAssignment pot = sample_potential(64, uniform(), 0.2, 3);
  const Eigen::MatrixXd m = assemble(g.adjacency(), pot);
  const SpectralData s = eigendecompose(m);
  CHECK(s.eigenvalues.minCoeff() >= -3.2);
  CHECK(s.eigenvalues.maxCoeff() <= 3.2);
  CHECK_NOTHROW(check_spectral_data(m, s, 3.2));
  const SpectralCheck c = measure_spectral_data(m, s);
  CHECK(c.max_residual <= 1e-8 * c.operator_norm);
  CHECK(c.max_gram_deviation <= 1e-8);
  for (Eigen::Index i = 1; i < 64; ++i) CHECK(s.eigenvalues(i - 1) <= s.eigenvalues(i));

  double sum_omega = 0.0, sum_omega2 = 0.0;
  for (double o : pot.omega) {
    sum_omega += o;
    sum_omega2 += o * o;
  }
  const double tr = s.eigenvalues.sum();
  CHECK(tr == doctest::Approx(0.2 * sum_omega).epsilon(1e-8));
  CHECK(s.eigenvalues.squaredNorm() == doctest::Approx(64.0 * 3 + 0.04 * sum_omega2).epsilon(1e-8));

  for (Eigen::Index i = 0; i < 64; ++i) {
    Eigen::Index first = 0;
    while (std::abs(s.eigenvectors(first, i)) <= 1e-8) ++first;
    CHECK(s.eigenvectors(first, i) > 0.0);
  }
  CHECK(eigendecompose(m).eigenvectors == s.eigenvectors);
  const std::vector<double> values = eigenvalues_only(m);
  for (std::size_t i = 0; i < 64; ++i)
    CHECK(values[i] == doctest::Approx(s.eigenvalues(static_cast<Eigen::Index>(i))).epsilon(1e-12));
}

TEST_CASE("top eigenvalue q+1 is simple exactly for connected graphs") {
  const RegularGraph g = generate_random_regular(200, 2, 4);
  const std::vector<double> v = eigenvalues_only(assemble(g.adjacency(), sample_potential(200, uniform(), 0.0, 1)));
  const auto count3 = std::count_if(v.begin(), v.end(), [](double l) { return std::abs(l - 3.0) < 1e-9; });
  CHECK(count3 == 1);

  AdjacencyList two_k4(8);
  for (Vertex base : {0u, 4u})
    for (Vertex a = 0; a < 4; ++a)
      for (Vertex b = 0; b < 4; ++b)
        if (a != b) two_k4[base + a].push_back(base + b);
  PotentialAssignment zero;
  zero.omega.assign(8, 0.0);
  const std::vector<double> w = eigenvalues_only(assemble(two_k4, zero));
  const auto twice = std::count_if(w.begin(), w.end(), [](double l) { return std::abs(l - 3.0) < 1e-9; });
  CHECK(twice == 2);
  CHECK(exp_check(RegularGraph(2, two_k4)).beta <= 1e-12);
}

TEST_CASE("dimension cap rejects oversized operators") {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(20, 20);
  try {
    eigendecompose(m, 10);
    FAIL("cap not enforced");
  } catch (const BudgetExceeded& e) {
    CHECK(std::string(e.what()).find("lower N") != std::string::npos);
  }
  CHECK_THROWS_AS(eigendecompose(Eigen::MatrixXd::Zero(3, 4)), InvalidInput);
}

TEST_CASE("invariant checker flags a corrupted decomposition") {
  const Eigen::MatrixXd m = assemble(complete4().adjacency(), sample_potential(4, uniform(), 0.0, 1));
  SpectralData s = eigendecompose(m);
  s.eigenvalues(3) += 1e-3;
  CHECK_THROWS_AS(check_spectral_data(m, s, 3.0 + 1e-2), InvariantViolation);
}

TEST_CASE("degenerate clusters are counted") {
  const double v[] = {-1.0, -1.0 + 1e-12, -1.0 + 2e-12, 0.5, 3.0};
  CHECK(degenerate_count(v, 1e-9) == 3);
}

TEST_CASE("spectrum CSV") {
  const SpectralData s = eigendecompose(assemble(complete4().adjacency(), sample_potential(4, uniform(), 0.0, 1)));
  std::ostringstream out;
  write_spectrum_csv(out, s);
  const std::string text = out.str();
  CHECK(text.rfind("index,eigenvalue\n0,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}
