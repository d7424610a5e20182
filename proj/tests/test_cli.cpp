#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "qelab/config.hpp"
#include "qelab/errors.hpp"
#include "qelab/experiment.hpp"

using namespace qelab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = QELAB_CONFIG_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qelab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string invalid_message(const json& j) {
  try {
    parse_config(j);
  } catch (const InvalidInput& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty config resolves to defaults") {
  const ExperimentConfig c = parse_config(json::object());
  CHECK(c.q == 2);
  CHECK(c.n_values == std::vector<std::size_t>{250});
  CHECK(c.mc.samples == 10000);
  CHECK(c.mc.lambda_spacing == 0.01);
  CHECK(c.lambda0 == 2.4);
  CHECK(c.tree_options().depth == 0);
  CHECK(c.seed_pairs().size() == 1);
}

TEST_CASE("config round trip through the resolved form") {
  for (const char* name : {"minimal.json", "reference.json", "k4.json"}) {
    const ExperimentConfig c = load_config(kConfigs / name);
    const json resolved = to_json(c);
    CHECK(to_json(parse_config(resolved)) == resolved);
  }
  const ExperimentConfig r = load_config(kConfigs / "reference.json");
  CHECK(r.n_values == std::vector<std::size_t>{250, 1000, 2000});
  CHECK(r.seed_pairs().size() == 5);
}

TEST_CASE("config rejections") {
  CHECK(invalid_message({{"qq", 2}}).find("unknown key 'qq'") != std::string::npos);
  CHECK(invalid_message({{"mc", {{"sample", 5}}}}).find("unknown key 'sample'") != std::string::npos);
  CHECK_FALSE(invalid_message({{"q", "two"}}).empty());
  CHECK_FALSE(invalid_message({{"n", 5}}).empty());  // (q+1) N odd
  CHECK_FALSE(invalid_message({{"graph_seeds", {1, 2}}, {"pot_seeds", {1}}}).empty());
  CHECK_FALSE(invalid_message({{"eta0_values", {0.0}}}).empty());
  CHECK_FALSE(invalid_message({{"kernel", {{"shape", "diagonal"}, {"R", 1}}}}).empty());
  CHECK_FALSE(invalid_message({{"kernel", {{"value", 2.0}}}}).empty());
  CHECK_FALSE(invalid_message({{"observable", {{"kind", "indicator"}, {"alpha", 1.5}}}}).empty());
  CHECK_FALSE(invalid_message({{"potential", {{"kind", "two-point"}}}}).empty());
  CHECK(invalid_message({{"potential", {{"kind", "two-point"}, {"allow_non_pot", true}}}}).empty());
  const std::string band = invalid_message({{"lambda0", 3.0}});
  CHECK(band.find("open band (0, 2 sqrt q)") != std::string::npos);
  CHECK(band.find("(-2 sqrt q, 2 sqrt q)") != std::string::npos);
  CHECK_FALSE(invalid_message({{"lambda0", 0.0}}).empty());
  CHECK(invalid_message({{"q", 3}, {"lambda0", 3.0}}).empty());
  CHECK_THROWS_AS(load_config(kConfigs / "does-not-exist.json"), InvalidInput);
}

TEST_CASE("exit codes by error class") {
  CHECK(exit_code_for(InvalidInput("x")) == 2);
  CHECK(exit_code_for(BudgetExceeded("x")) == 3);
  CHECK(exit_code_for(InvariantViolation("inv", "x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("grid order and point observables") {
  ExperimentConfig c = parse_config({{"n_values", {64, 128}}, {"graph_seeds", {1, 2}}, {"pot_seeds", {5, 6}},
                                     {"observable", {{"kind", "indicator"}, {"seed", 10}}}});
  const auto pts = grid_points(c);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].n == 64);
  CHECK(pts[1].graph_seed == 2);
  CHECK(pts[1].pot_seed == 6);
  CHECK(pts[2].n == 128);
  CHECK(point_observable(c, pts[1]).values == indicator_observable(64, 0.5, 12).values);
}

TEST_CASE("minimal pipeline gives vanishing statistics") {
  const ExperimentConfig c = load_config(kConfigs / "minimal.json");
  const ExperimentReport r = compute_experiment(c, {stage_all, true});
  REQUIRE(r.points.size() == 1);
  const PointResult& p = r.points[0];
  REQUIRE(p.diag.has_value());
  CHECK(p.diag->statistic == 0.0);
  CHECK(p.kernel.size() == 1);
  CHECK(p.kernel[0].statistic == 0.0);
  CHECK(p.equivalence[0] == 0.0);
  CHECK(r.esd_reference == "kesten-mckay");
  CHECK(p.expansion.expanding());
  for (const MomentRow& m : p.lln)
    if (m.k <= 4) CHECK(m.abs_diff < 1e-12);
  REQUIRE(r.trend.size() == 1);
}

TEST_CASE("complete graph flags the injectivity condition") {
  const ExperimentConfig c = load_config(kConfigs / "k4.json");
  const ExperimentReport r = compute_experiment(c, {stage_graphs | stage_conditions, false});
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].bst[0] == 1.0);
  CHECK(r.points[0].min_radius == 0);
  CHECK(r.points[0].expansion.expanding());
  const fs::path out = scratch("k4");
  write_experiment(c, r, {stage_graphs | stage_conditions, false}, out);
  const json summary = json::parse(slurp(out / "conditions_summary.json"));
  CHECK(summary["any_bst_flagged"] == true);
  fs::remove_all(out);
}

TEST_CASE("free moments at tiny eta match the closed form") {
  const double lambdas[] = {-2.0, 0.0, 1.0};
  const double etas[] = {1e-9};
  const double s[] = {1.0, 2.0};
  TreeOptions o;
  o.leaf = LeafCondition::free_value;
  o.depth = 30;
  const GreenMomentTable t = green_condition_moments(2, PotentialSpec{}, 0.0, lambdas, etas, s, 50, 3, o);
  for (const GreenMomentPoint& p : t.points) {
    const double im = std::sqrt(8.0 - p.lambda * p.lambda) / 4.0;
    CHECK(p.abs_mean.mean == doctest::Approx(im).epsilon(1e-7));
    CHECK(p.square_mean.mean == doctest::Approx(im * im).epsilon(1e-7));
    CHECK(p.inverse_moments[0].mean == doctest::Approx(1.0 / im).epsilon(1e-7));
  }
}

TEST_CASE("reference-size graphs expand") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ExpansionReport e = exp_check(generate_random_regular(250, 2, seed));
    CHECK(e.beta > 0.0);
  }
}

TEST_CASE("pipeline output is deterministic and reproducible from the resolved config") {
  ExperimentConfig c = load_config(kConfigs / "minimal.json");
  c.epsilon = 0.2;
  c.observable.kind = ObservableKind::indicator;
  c.kernel.shape = "shell";
  c.kernel.range = 1;
  c.mc.samples = 200;
  c.moments.samples = 100;
  c.esd.ids_samples = 50;
  const fs::path a = scratch("det_a"), b = scratch("det_b"), d = scratch("det_c");
  const auto files = run_experiment(c, {stage_all, true}, a);
  set_thread_count(3);
  run_experiment(c, {stage_all, true}, b);
  set_thread_count(0);
  run_experiment(load_config(a / "resolved_config.json"), {stage_all, true}, d);
  CHECK(std::find(files.begin(), files.end(), "trend.csv") != files.end());
  for (const std::string& f : files) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / f) == slurp(d / f));
  }
  for (const fs::path& p : {a, b, d}) fs::remove_all(p);
}

TEST_CASE("mass distribution concentrates as N grows") {
  ExperimentConfig c = load_config(kConfigs / "reference.json");
  c.n_values = {250, 2000};
  const ExperimentReport r = compute_experiment(c, {stage_graphs | stage_spectrum | stage_qe_diag, false});
  std::size_t col = c.mass_varsigma.size();
  for (std::size_t j = 0; j < c.mass_varsigma.size(); ++j)
    if (c.mass_varsigma[j] == 0.1) col = j;
  REQUIRE(col < c.mass_varsigma.size());
  std::vector<double> small, large;
  for (const PointResult& p : r.points) (p.point.n == 250 ? small : large).push_back(p.mass_fraction.at(col));
  REQUIRE(small.size() == 5);
  MESSAGE("median fraction at varsigma=0.1, N=250: " << median(small) << ", N=2000: " << median(large));
  CHECK(median(large) < median(small));
}
