#include "qelab/experiment.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <set>

#include "qelab/anderson.hpp"
#include "qelab/csv.hpp"
#include "qelab/errors.hpp"
#include "qelab/numeric.hpp"

namespace qelab {

using nlohmann::json;

std::vector<GridPoint> grid_points(const ExperimentConfig& config) {
  std::vector<GridPoint> out;
  for (std::size_t n : config.n_values)
    for (std::size_t k = 0; k < config.graph_seeds.size(); ++k)
      out.push_back({n, k, config.graph_seeds[k], config.pot_seeds[k]});
  return out;
}

Observable point_observable(const ExperimentConfig& config, const GridPoint& point) {
  ObservableSpec spec = config.observable;
  if (spec.kind == ObservableKind::indicator) spec.seed += point.graph_seed;
  return make_observable(spec, point.n);
}

Kernel build_kernel(const KernelSpec& spec, const RegularGraph& g, const Observable& a) {
  if (spec.shape == "zero") return kernel_zero(g.size(), spec.range);
  if (spec.shape == "diagonal") return kernel_diagonal(a);
  if (spec.shape == "shell") return kernel_shell(g.adjacency(), spec.range, spec.value);
  if (spec.shape == "ball") return kernel_ball(g.adjacency(), spec.range, spec.value);
  throw InvalidInput("unknown kernel shape '" + spec.shape + "'");
}

namespace {

std::string resolved_reference(const ExperimentConfig& c) {
  if (c.esd.reference != "auto") return c.esd.reference;
  return c.epsilon == 0.0 ? "kesten-mckay" : "ids";
}

double spectral_bound(const ExperimentConfig& c) {
  return (c.q + 1) + std::abs(c.epsilon) * c.potential.support;
}

void require_clean(const CavityTally& tally, const std::string& where) {
  if (tally.sign_violations)
    throw InvariantViolation("Im zeta < 0", std::to_string(tally.sign_violations) +
                                                " cavity values in " + where);
  if (tally.modulus_violations)
    throw InvariantViolation("|zeta| <= 1/eta", std::to_string(tally.modulus_violations) +
                                                    " cavity values in " + where);
  if (tally.lower_bound_violations)
    throw InvariantViolation("|Im zeta| >= eta / c~^2",
                             std::to_string(tally.lower_bound_violations) + " cavity values in " +
                                 where);
}

void require_finite(const QEReport& r, const std::string& what) {
  if (!std::isfinite(r.statistic))
    throw InvariantViolation("finite QE statistic", what + " at N=" + std::to_string(r.n));
}

PointResult compute_point(const ExperimentConfig& c, const PipelineOptions& options,
                          const GridPoint& point, const std::vector<PhiRatioTable>& ratios,
                          const std::function<double(double)>* reference_cdf) {
  const unsigned st = options.stages;
  PointResult out;
  out.point = point;
  const RegularGraph g = generate_random_regular(point.n, c.q, point.graph_seed,
                                                 {c.max_generation_attempts});
  out.attempts = last_generation_attempts();
  if (st & stage_graphs) out.graph_json = graph_to_json(g);
  if (st & stage_conditions) {
    out.expansion = exp_check(g);
    const InjectivityProfile prof = injectivity_radius(g);
    for (std::size_t r = 1; r <= 4; ++r) out.bst.push_back(prof.bst_statistic(r));
    out.min_radius = prof.min_radius();
  }

  const bool need_spectrum = st & (stage_spectrum | stage_qe_diag | stage_qe_kernel | stage_esd);
  const bool need_potential = need_spectrum || (st & stage_esd);
  if (!need_potential) return out;

  // The observable and kernel depend on the graph alone and are fixed before
  // the potential is drawn.
  const Observable a = point_observable(c, point);
  std::optional<Kernel> kernel;
  if (st & stage_qe_kernel) kernel.emplace(build_kernel(c.kernel, g, a));
  const PotentialAssignment pot = sample_potential(point.n, c.potential, c.epsilon, point.pot_seed);

  if (st & stage_esd) out.lln = lln_moment_check(g, pot, c.potential, c.lln_k_max);
  if (!need_spectrum) return out;

  const Eigen::MatrixXd h = assemble(g.adjacency(), pot);
  const SpectralData spec = eigendecompose(h, c.max_dimension);
  if (options.strict_invariants) check_spectral_data(h, spec, spectral_bound(c));
  out.eigenvalues.assign(spec.eigenvalues.data(), spec.eigenvalues.data() + spec.eigenvalues.size());

  if (st & stage_qe_diag) {
    QEReport r = qe_statistic_diag(spec, a, c.lambda0, c.keep_terms);
    r.seed = point.graph_seed;
    r.epsilon = c.epsilon;
    if (options.strict_invariants) require_finite(r, "diagonal statistic");
    out.diag = std::move(r);
    if (c.observable.kind == ObservableKind::indicator) {
      const std::uint64_t seeds[] = {c.observable.seed + point.graph_seed};
      const MassReport m =
          mass_distribution_check(spec, c.observable.alpha, c.lambda0, seeds, c.mass_varsigma);
      out.mass_fraction = m.fraction.front();
    }
  }
  if (st & stage_qe_kernel) {
    for (std::size_t e = 0; e < c.eta0_values.size(); ++e) {
      const double eta0 = c.eta0_values[e];
      QEReport r = qe_statistic_kernel(spec, *kernel, c.lambda0, eta0,
                                       kernel_average_simple(*kernel, ratios[e]), c.keep_terms);
      r.seed = point.graph_seed;
      r.epsilon = c.epsilon;
      if (options.strict_invariants) require_finite(r, "kernel statistic");
      out.kernel.push_back(std::move(r));
      out.equivalence.push_back(equivalence_discrepancy(*kernel, g.adjacency(), pot, eta0,
                                                        c.equivalence_lambdas, ratios[e],
                                                        c.mc.depth));
    }
  }
  if (st & stage_esd) out.kolmogorov = kolmogorov_distance(out.eigenvalues, *reference_cdf);
  return out;
}

std::vector<double> column(const std::vector<PointResult>& pts, std::size_t n,
                           const std::function<double(const PointResult&)>& f) {
  std::vector<double> v;
  for (const PointResult& p : pts)
    if (p.point.n == n) v.push_back(f(p));
  return v;
}

}  // namespace

ExperimentReport compute_experiment(const ExperimentConfig& c, const PipelineOptions& options) {
  validate(c);
  const unsigned st = options.stages;
  ExperimentReport report;
  const TreeOptions tree = c.tree_options();

  if (st & stage_qe_kernel) {
    for (double eta0 : c.eta0_values) {
      if (c.kernel.range == 0) {
        PhiRatioTable t;
        t.q = c.q;
        t.epsilon = c.epsilon;
        t.eta0 = eta0;
        t.lambdas = {0.0};
        t.ratios = {{1.0}};
        report.ratios.push_back(std::move(t));
        continue;
      }
      const std::vector<double> grid = uniform_grid(-c.lambda0, c.lambda0, c.mc.lambda_spacing);
      PhiRatioTable t = compute_phi_ratios(c.q, c.potential, c.epsilon, eta0, grid, c.kernel.range,
                                           c.mc.samples, c.mc.seed, tree);
      if (options.strict_invariants) require_clean(t.tally, "phi ratios");
      report.ratios.push_back(std::move(t));
    }
  }

  if (st & (stage_green_moments | stage_conditions)) {
    GreenMomentTable t = green_condition_moments(c.q, c.potential, c.epsilon, c.moments.lambdas,
                                                 c.moments.etas, c.moments.s_values,
                                                 c.moments.samples, c.mc.seed, tree);
    if (options.strict_invariants) require_clean(t.tally, "green moments");
    report.moments = std::move(t);
  }

  std::function<double(double)> reference_cdf;
  if (st & stage_esd) {
    report.esd_reference = resolved_reference(c);
    if (report.esd_reference == "kesten-mckay") {
      const int q = c.q;
      reference_cdf = [q](double l) { return kesten_mckay_cdf(l, q); };
      const double edge = 2.0 * std::sqrt(static_cast<double>(q));
      report.reference_lambdas = uniform_grid(-edge, edge, c.esd.ids_spacing);
      for (double l : report.reference_lambdas)
        report.reference_density.push_back(kesten_mckay_density(l, q));
    } else {
      auto ids = std::make_shared<GridCdf>(ids_reference(c.q, c.potential, c.epsilon, c.esd.ids_eta,
                                                         c.esd.ids_spacing, c.esd.ids_samples,
                                                         c.mc.seed, tree));
      report.reference_lambdas = ids->lambdas();
      report.reference_density = ids->density();
      reference_cdf = [ids](double l) { return (*ids)(l); };
    }
  }

  const std::vector<GridPoint> points = grid_points(c);
  report.points.resize(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    report.points[i] = compute_point(c, options, points[i], report.ratios, &reference_cdf);
  });

  if (st == stage_all) {
    for (std::size_t n : c.n_values) {
      for (std::size_t e = 0; e < c.eta0_values.size(); ++e) {
        TrendRow row;
        row.n = n;
        row.eta0 = c.eta0_values[e];
        row.qe_diag = median(column(report.points, n, [](const PointResult& p) {
          return p.diag->statistic;
        }));
        row.qe_kernel = median(column(report.points, n, [e](const PointResult& p) {
          return p.kernel[e].statistic;
        }));
        row.equivalence = median(column(report.points, n, [e](const PointResult& p) {
          return p.equivalence[e];
        }));
        row.kolmogorov = median(column(report.points, n, [](const PointResult& p) {
          return p.kolmogorov;
        }));
        report.trend.push_back(row);
      }
    }
  }
  return report;
}

namespace {

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
  }

  std::ofstream open(const std::string& relative) {
    const std::filesystem::path p = root_ / relative;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + p.string());
    written_.push_back(relative);
    return out;
  }

  std::vector<std::string> written() const { return written_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> written_;
};

std::string point_tag(const GridPoint& p) {
  return "n" + std::to_string(p.n) + "_g" + std::to_string(p.graph_seed) + "_p" +
         std::to_string(p.pot_seed);
}

std::string graph_file(const GridPoint& p) {
  return "graphs/graph_n" + std::to_string(p.n) + "_seed" + std::to_string(p.graph_seed) + ".json";
}

}  // namespace

std::vector<std::string> write_experiment(const ExperimentConfig& c, const ExperimentReport& report,
                                          const PipelineOptions& options,
                                          const std::filesystem::path& out_dir) {
  const unsigned st = options.stages;
  OutputDir dir(out_dir);
  {
    auto out = dir.open("resolved_config.json");
    out << to_json(c).dump(2) << '\n';
  }

  if (st & stage_graphs) {
    auto out = dir.open("graphs.csv");
    CsvWriter csv(out, {"n", "graph_seed", "attempts", "file"});
    std::set<std::string> done;
    for (const PointResult& p : report.points) {
      const std::string name = graph_file(p.point);
      if (!done.insert(name).second) continue;
      csv.row(p.point.n, p.point.graph_seed, p.attempts, name);
      auto g = dir.open(name);
      g << p.graph_json << '\n';
    }
  }

  if (st & stage_spectrum) {
    for (const PointResult& p : report.points) {
      auto out = dir.open("spectra/spectrum_" + point_tag(p.point) + ".csv");
      CsvWriter csv(out, {"index", "eigenvalue"});
      for (std::size_t i = 0; i < p.eigenvalues.size(); ++i) csv.row(i, p.eigenvalues[i]);
    }
  }

  if (st & stage_qe_diag) {
    {
      auto out = dir.open("qe_diag.csv");
      CsvWriter csv(out, qe_csv_header());
      for (const PointResult& p : report.points) write_qe_row(csv, *p.diag);
    }
    if (c.observable.kind == ObservableKind::indicator) {
      auto out = dir.open("mass.csv");
      CsvWriter csv(out, {"n", "graph_seed", "pot_seed", "alpha", "varsigma", "fraction"});
      for (const PointResult& p : report.points)
        for (std::size_t j = 0; j < c.mass_varsigma.size(); ++j)
          csv.row(p.point.n, p.point.graph_seed, p.point.pot_seed, c.observable.alpha,
                  c.mass_varsigma[j], p.mass_fraction[j]);
    }
    if (c.keep_terms)
      for (const PointResult& p : report.points) {
        auto out = dir.open("terms/qe_diag_" + point_tag(p.point) + ".csv");
        write_qe_terms_csv(out, *p.diag);
      }
  }

  if (st & stage_qe_kernel) {
    {
      auto out = dir.open("phi_ratios.csv");
      CsvWriter csv(out, {"eta0", "lambda", "r", "ratio", "diag_mean", "diag_stderr"});
      for (const PhiRatioTable& t : report.ratios) {
        if (t.diagonal.empty()) continue;
        for (std::size_t i = 0; i < t.lambdas.size(); ++i)
          for (std::size_t r = 0; r <= t.range; ++r)
            csv.row(t.eta0, t.lambdas[i], r, t.ratios[i][r], t.diagonal[i].mean,
                    t.diagonal[i].std_error);
      }
    }
    {
      auto out = dir.open("qe_kernel.csv");
      CsvWriter csv(out, qe_csv_header());
      for (std::size_t e = 0; e < c.eta0_values.size(); ++e)
        for (const PointResult& p : report.points) write_qe_row(csv, p.kernel[e]);
    }
    {
      auto out = dir.open("equivalence.csv");
      CsvWriter csv(out, {"n", "graph_seed", "pot_seed", "eta0", "R", "median_discrepancy"});
      for (std::size_t e = 0; e < c.eta0_values.size(); ++e)
        for (const PointResult& p : report.points)
          csv.row(p.point.n, p.point.graph_seed, p.point.pot_seed, c.eta0_values[e], c.kernel.range,
                  p.equivalence[e]);
    }
    if (c.keep_terms)
      for (std::size_t e = 0; e < c.eta0_values.size(); ++e)
        for (const PointResult& p : report.points) {
          auto out = dir.open("terms/qe_kernel_" + point_tag(p.point) + "_eta" +
                              std::to_string(e) + ".csv");
          write_qe_terms_csv(out, p.kernel[e]);
        }
  }

  if (st & stage_green_moments) {
    auto out = dir.open("green_moments.csv");
    write_moment_csv(out, *report.moments);
  }

  if (st & stage_esd) {
    {
      auto out = dir.open("esd.csv");
      CsvWriter csv(out, {"n", "graph_seed", "pot_seed", "epsilon", "reference", "kolmogorov"});
      for (const PointResult& p : report.points)
        csv.row(p.point.n, p.point.graph_seed, p.point.pot_seed, c.epsilon, report.esd_reference,
                p.kolmogorov);
    }
    {
      auto out = dir.open("esd_reference.csv");
      write_density_csv(out, report.reference_lambdas, report.reference_density);
    }
    for (const PointResult& p : report.points) {
      auto out = dir.open("lln/lln_" + point_tag(p.point) + ".csv");
      write_moment_rows_csv(out, p.lln);
    }
  }

  if (st & stage_conditions) {
    bool all_expanding = true, any_flagged = false;
    {
      auto out = dir.open("conditions.csv");
      CsvWriter csv(out, {"n", "graph_seed", "beta", "second_modulus", "min_rho", "bst_r1", "bst_r2",
                          "bst_r3", "bst_r4", "expanding", "bst_flagged"});
      std::set<std::string> done;
      for (const PointResult& p : report.points) {
        if (!done.insert(graph_file(p.point)).second) continue;
        const bool flagged = p.bst[0] > c.moments.bst_threshold;
        all_expanding = all_expanding && p.expansion.expanding();
        any_flagged = any_flagged || flagged;
        csv.row(p.point.n, p.point.graph_seed, p.expansion.beta, p.expansion.second_modulus,
                p.min_radius, p.bst[0], p.bst[1], p.bst[2], p.bst[3],
                p.expansion.expanding() ? "true" : "false", flagged ? "true" : "false");
      }
    }
    bool pass_c = true, pass_C = true;
    {
      auto out = dir.open("green_conditions.csv");
      CsvWriter csv(out, {"lambda", "eta", "abs_mean", "square_mean", "pass_c", "pass_C"});
      for (const GreenMomentPoint& g : report.moments->points) {
        const bool pc = g.abs_mean.mean >= c.moments.threshold_c;
        const bool pC = g.square_mean.mean <= c.moments.threshold_C;
        pass_c = pass_c && pc;
        pass_C = pass_C && pC;
        csv.row(g.lambda, g.eta, g.abs_mean.mean, g.square_mean.mean, pc ? "true" : "false",
                pC ? "true" : "false");
      }
    }
    if (!(st & stage_green_moments)) {
      auto out = dir.open("green_moments.csv");
      write_moment_csv(out, *report.moments);
    }
    auto out = dir.open("conditions_summary.json");
    const json summary = {{"all_expanding", all_expanding},
                          {"any_bst_flagged", any_flagged},
                          {"bst_threshold", c.moments.bst_threshold},
                          {"green_pass_c", pass_c},
                          {"green_pass_C", pass_C},
                          {"threshold_c", c.moments.threshold_c},
                          {"threshold_C", c.moments.threshold_C},
                          {"cavity_values_checked", report.moments->tally.checked},
                          {"cavity_violations", report.moments->tally.violations()}};
    out << summary.dump(2) << '\n';
  }

  if (!report.trend.empty()) {
    auto out = dir.open("trend.csv");
    CsvWriter csv(out, {"n", "eta0", "median_qe_diag", "median_qe_kernel", "median_equivalence",
                        "median_kolmogorov"});
    for (const TrendRow& r : report.trend)
      csv.row(r.n, r.eta0, r.qe_diag, r.qe_kernel, r.equivalence, r.kolmogorov);
  }
  return dir.written();
}

std::vector<std::string> run_experiment(const ExperimentConfig& config, const PipelineOptions& options,
                                        const std::filesystem::path& out_dir) {
  const ExperimentReport report = compute_experiment(config, options);
  return write_experiment(config, report, options, out_dir);
}

}  // namespace qelab
