#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qelab/config.hpp"
#include "qelab/esd.hpp"
#include "qelab/graph.hpp"
#include "qelab/qe.hpp"
#include "qelab/tree_green.hpp"

namespace qelab {

/// Pipeline stages as bit flags; a subcommand selects a subset.
enum Stage : unsigned {
  stage_graphs = 1u << 0,
  stage_spectrum = 1u << 1,
  stage_qe_diag = 1u << 2,
  stage_qe_kernel = 1u << 3,
  stage_green_moments = 1u << 4,
  stage_esd = 1u << 5,
  stage_conditions = 1u << 6,
  stage_all = (1u << 7) - 1,
};

struct PipelineOptions {
  unsigned stages = stage_all;
  bool strict_invariants = false;
};

struct GridPoint {
  std::size_t n = 0;
  std::size_t pair = 0;  // index into the seed pair lists
  std::uint64_t graph_seed = 0;
  std::uint64_t pot_seed = 0;
};

/// Grid points with N in config order as the outer loop and seed pairs inside.
std::vector<GridPoint> grid_points(const ExperimentConfig& config);

struct PointResult {
  GridPoint point;
  std::size_t attempts = 0;
  std::string graph_json;
  ExpansionReport expansion;
  std::vector<double> bst;  // r = 1..4
  std::size_t min_radius = 0;
  std::vector<double> eigenvalues;
  std::optional<QEReport> diag;
  std::vector<QEReport> kernel;      // per eta0
  std::vector<double> equivalence;   // per eta0, median over the lambda grid
  std::vector<double> mass_fraction; // per varsigma; empty unless the observable is an indicator
  double kolmogorov = 0.0;
  std::vector<MomentRow> lln;
};

struct TrendRow {
  std::size_t n = 0;
  double eta0 = 0.0;
  double qe_diag = 0.0;
  double qe_kernel = 0.0;
  double equivalence = 0.0;
  double kolmogorov = 0.0;
};

struct ExperimentReport {
  std::vector<PointResult> points;  // grid order
  std::vector<PhiRatioTable> ratios;  // per eta0, filled by the kernel stage
  std::optional<GreenMomentTable> moments;
  std::string esd_reference;  // kesten-mckay or ids
  std::vector<double> reference_lambdas, reference_density;
  std::vector<TrendRow> trend;  // filled when every stage ran
};

/// Computes the selected stages. Grid points run on the worker pool; the
/// report is in grid order regardless of scheduling.
ExperimentReport compute_experiment(const ExperimentConfig& config, const PipelineOptions& options);

/// Writes resolved_config.json plus the artifacts of the selected stages and
/// returns the written paths relative to out_dir, in writing order.
std::vector<std::string> write_experiment(const ExperimentConfig& config,
                                          const ExperimentReport& report,
                                          const PipelineOptions& options,
                                          const std::filesystem::path& out_dir);

std::vector<std::string> run_experiment(const ExperimentConfig& config, const PipelineOptions& options,
                                        const std::filesystem::path& out_dir);

/// Kernel of the configured shape for one graph; the observable is used by
/// the diagonal shape only.
Kernel build_kernel(const KernelSpec& spec, const RegularGraph& g, const Observable& a);

Observable point_observable(const ExperimentConfig& config, const GridPoint& point);

}  // namespace qelab
