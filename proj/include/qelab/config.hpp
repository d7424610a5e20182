#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "qelab/anderson.hpp"
#include "qelab/qe.hpp"
#include "qelab/tree_green.hpp"

namespace qelab {

struct MonteCarloSettings {
  std::size_t samples = 10000;
  std::size_t depth = 0;  // 0: ceil(8 / eta) capped at 400
  double lambda_spacing = 0.01;
  std::uint64_t seed = 20240601;
  std::size_t pool_size = 0;
  LeafCondition leaf = LeafCondition::bare_site;
  std::uint64_t work_cap = std::uint64_t{1} << 22;
};

struct KernelSpec {
  std::string shape = "shell";  // zero | diagonal | shell | ball
  std::size_t range = 1;
  double value = 1.0;
};

struct MomentSettings {
  std::vector<double> lambdas{-2.0, -1.0, 0.0, 1.0, 2.0};
  std::vector<double> etas{0.05, 0.1, 0.2, 0.4};
  std::vector<double> s_values{0.5, 1.0, 2.0};
  std::size_t samples = 10000;
  double threshold_c = 0.05;  // pass if inf E|Im zeta| >= c
  double threshold_C = 10.0;  // pass if sup E(Im zeta)^2 <= C
  double bst_threshold = 0.1;  // flag graphs with a fraction above this of rho(x) < 1
};

struct EsdSettings {
  std::string reference = "auto";  // auto (kesten-mckay when epsilon == 0, else ids) | kesten-mckay | ids
  std::size_t bins = 200;
  double ids_eta = 0.05;
  double ids_spacing = 0.02;
  std::size_t ids_samples = 2000;
};

/// Parameters of one experiment grid. Graph and potential seeds are paired by
/// position: pair k uses graph_seeds[k] and pot_seeds[k].
struct ExperimentConfig {
  int q = 2;
  std::vector<std::size_t> n_values{250};
  std::vector<std::uint64_t> graph_seeds{1};
  std::vector<std::uint64_t> pot_seeds{1};
  double epsilon = 0.2;
  PotentialSpec potential;
  double lambda0 = 2.4;
  std::vector<double> eta0_values{0.2};
  /// Indicator observables of a grid point use seed observable.seed + graph seed.
  ObservableSpec observable;
  KernelSpec kernel;
  MonteCarloSettings mc;
  MomentSettings moments;
  EsdSettings esd;
  std::vector<double> mass_varsigma{0.05, 0.1, 0.2};
  std::vector<double> equivalence_lambdas{-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0};
  int lln_k_max = 8;
  std::size_t max_dimension = kDefaultMaxDimension;
  std::size_t max_generation_attempts = 1000;
  bool keep_terms = false;
  std::string output_dir = "qelab-out";

  std::vector<SeedPair> seed_pairs() const;
  /// Depth 0 lets each call pick default_depth(eta).
  TreeOptions tree_options() const;
};

/// Unknown keys, wrong types and violated constraints throw InvalidInput.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every field, defaults included.
nlohmann::json to_json(const ExperimentConfig& config);
void validate(const ExperimentConfig& config);

}  // namespace qelab
