#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qelab/config.hpp"
#include "qelab/errors.hpp"
#include "qelab/esd.hpp"
#include "qelab/experiment.hpp"

namespace py = pybind11;
using namespace qelab;

namespace {

unsigned stage_mask(const std::vector<std::string>& names) {
  if (names.empty()) return stage_all;
  unsigned mask = 0;
  for (const std::string& s : names) {
    if (s == "graphs") mask |= stage_graphs;
    else if (s == "spectrum") mask |= stage_spectrum;
    else if (s == "qe-diag") mask |= stage_qe_diag;
    else if (s == "qe-kernel") mask |= stage_qe_kernel;
    else if (s == "green-moments") mask |= stage_green_moments;
    else if (s == "esd") mask |= stage_esd;
    else if (s == "conditions") mask |= stage_conditions;
    else if (s == "all") mask |= stage_all;
    else throw InvalidInput("unknown stage '" + s + "'");
  }
  return mask;
}

SpectralData spectral_data(Eigen::VectorXd values, Eigen::MatrixXd vectors) {
  if (vectors.rows() != values.size() || vectors.cols() != values.size())
    throw InvalidInput("eigenvector matrix must be N x N for N eigenvalues");
  return {std::move(values), std::move(vectors)};
}

Observable observable_from(const std::vector<Complex>& values) {
  Observable a;
  a.values = values;
  return a;
}

py::dict qe_dict(const QEReport& r) {
  py::dict d;
  d["n"] = r.n;
  d["lambda0"] = r.lambda0;
  d["eta0"] = r.eta0;
  d["R"] = r.range;
  d["statistic"] = r.statistic;
  d["window_count"] = r.window_count;
  d["degenerate_in_window"] = r.degenerate_in_window;
  py::list terms;
  for (const EigenTerm& t : r.terms) terms.append(py::make_tuple(t.index, t.lambda, t.bracket, t.average));
  d["terms"] = terms;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Anderson model on random regular graphs: spectra, tree Green functions and ergodicity statistics";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_ArithmeticError);

  py::class_<RegularGraph>(m, "RegularGraph")
      .def_property_readonly("q", &RegularGraph::q)
      .def_property_readonly("degree", &RegularGraph::degree)
      .def("__len__", &RegularGraph::size)
      .def_property_readonly("adjacency", [](const RegularGraph& g) { return g.adjacency(); })
      .def("to_json", [](const RegularGraph& g) { return graph_to_json(g); })
      .def_static("from_json", &graph_from_json)
      .def_static("from_edges", [](std::size_t n, int q, const std::vector<std::pair<Vertex, Vertex>>& e) {
        return RegularGraph::from_edges(n, q, e);
      });

  m.def("generate_random_regular",
        [](std::size_t n, int q, std::uint64_t seed, std::size_t max_attempts) {
          return generate_random_regular(n, q, seed, GenerationOptions{max_attempts});
        },
        py::arg("n"), py::arg("q"), py::arg("seed"), py::arg("max_attempts") = 1000);
  m.def("distance", [](const RegularGraph& g, Vertex x, Vertex y) {
    const Geodesic geo = distance_and_geodesic(g.adjacency(), x, y);
    return py::make_tuple(geo.distance, geo.path);
  });
  m.def("exp_check", [](const RegularGraph& g) {
    const ExpansionReport e = exp_check(g);
    return py::make_tuple(e.second_modulus, e.beta);
  }, "(second modulus, beta) of the normalized adjacency");
  m.def("injectivity_radius", [](const RegularGraph& g) {
    const InjectivityProfile p = injectivity_radius(g);
    std::vector<double> bst;
    for (std::size_t r = 1; r <= 4; ++r) bst.push_back(p.bst_statistic(r));
    return py::make_tuple(p.radius, bst);
  }, "(per-vertex injectivity radius, fraction with radius < r for r = 1..4)");

  m.def("sample_potential", [](std::size_t n, double epsilon, std::uint64_t seed, double support) {
    PotentialSpec spec;
    spec.support = support;
    return sample_potential(n, spec, epsilon, seed).omega;
  }, py::arg("n"), py::arg("epsilon"), py::arg("seed"), py::arg("support") = 1.0,
     "Uniform site potentials omega on [-support, support]");
  m.def("hamiltonian", [](const RegularGraph& g, const std::vector<double>& omega, double epsilon) {
    PotentialAssignment pot{omega, epsilon};
    if (pot.size() != g.size()) throw InvalidInput("omega must have one entry per vertex");
    return assemble(g.adjacency(), pot);
  }, py::arg("graph"), py::arg("omega"), py::arg("epsilon"));
  m.def("eigendecompose", [](const Eigen::MatrixXd& h, std::size_t max_dimension) {
    SpectralData s = eigendecompose(h, max_dimension);
    return py::make_tuple(std::move(s.eigenvalues), std::move(s.eigenvectors));
  }, py::arg("matrix"), py::arg("max_dimension") = kDefaultMaxDimension);

  m.def("indicator_observable", [](std::size_t n, double alpha, std::uint64_t seed) {
    return indicator_observable(n, alpha, seed).values;
  });
  m.def("qe_statistic_diag",
        [](Eigen::VectorXd values, Eigen::MatrixXd vectors, const std::vector<Complex>& a, double lambda0,
           bool keep_terms) {
          return qe_dict(qe_statistic_diag(spectral_data(std::move(values), std::move(vectors)),
                                           observable_from(a), lambda0, keep_terms));
        },
        py::arg("eigenvalues"), py::arg("eigenvectors"), py::arg("observable"), py::arg("lambda0"),
        py::arg("keep_terms") = false);
  m.def("qe_statistic_edge_kernel",
        [](Eigen::VectorXd values, Eigen::MatrixXd vectors, const RegularGraph& g, double lambda0,
           double eta0, const std::function<Complex(double)>& average) {
          return qe_dict(qe_statistic_kernel(spectral_data(std::move(values), std::move(vectors)),
                                             kernel_shell(g.adjacency(), 1, 1.0), lambda0, eta0, average));
        },
        py::arg("eigenvalues"), py::arg("eigenvectors"), py::arg("graph"), py::arg("lambda0"),
        py::arg("eta0"), py::arg("average"));

  m.def("free_forward_green", &free_forward_green, py::arg("lam"), py::arg("q"));
  m.def("free_forward_green_complex", &free_forward_green_complex, py::arg("gamma"), py::arg("q"));
  m.def("free_green_diagonal", &free_green_diagonal, py::arg("gamma"), py::arg("q"));
  m.def("default_depth", &default_depth, py::arg("eta"));
  m.def("mc_im_green",
        [](int q, double epsilon, double lam, double eta, std::size_t range, std::size_t samples,
           std::uint64_t seed, std::size_t depth) {
          TreeOptions o;
          o.depth = depth;
          const ImGreenProfile p =
              mc_expectation_im_green(q, PotentialSpec{}, epsilon, {lam, eta}, range, samples, seed, o);
          py::list out;
          for (const MeanEstimate& e : p.im_green) out.append(py::make_tuple(e.mean, e.std_error));
          return out;
        },
        py::arg("q"), py::arg("epsilon"), py::arg("lam"), py::arg("eta"), py::arg("range"),
        py::arg("samples"), py::arg("seed"), py::arg("depth") = 0,
        "[(mean, stderr)] of E Im G(o, y_r) for r = 0..range with a uniform potential");
  m.def("lifted_green",
        [](const RegularGraph& g, const std::vector<double>& omega, double epsilon, Complex gamma,
           std::size_t depth, const std::vector<std::vector<Vertex>>& paths) {
          PotentialAssignment pot{omega, epsilon};
          if (pot.size() != g.size()) throw InvalidInput("omega must have one entry per vertex");
          const LiftedGreen lg = lifted_green(g.adjacency(), pot, {gamma.real(), gamma.imag()}, depth, paths);
          return py::make_tuple(lg.diagonal, lg.pairs);
        },
        py::arg("graph"), py::arg("omega"), py::arg("epsilon"), py::arg("gamma"), py::arg("depth"),
        py::arg("paths") = std::vector<std::vector<Vertex>>{});

  m.def("kesten_mckay_density", &kesten_mckay_density, py::arg("lam"), py::arg("q"));
  m.def("kesten_mckay_cdf", &kesten_mckay_cdf, py::arg("lam"), py::arg("q"));
  m.def("kolmogorov_to_kesten_mckay", [](const std::vector<double>& eigs, int q) {
    return esd_compare_kesten_mckay(eigs, q);
  });
  m.def("tree_return_moment", [](int q, double epsilon, int k) {
    return tree_return_moment(q, epsilon, PotentialSpec{}, k);
  }, py::arg("q"), py::arg("epsilon"), py::arg("k"));

  m.def("resolve_config", [](const std::string& text) {
    return to_json(parse_config(nlohmann::json::parse(text))).dump();
  }, "Validated config with every default filled in, as JSON text");
  m.def("run_experiment",
        [](const std::string& text, const std::filesystem::path& out_dir,
           const std::vector<std::string>& stages, bool strict) {
          nlohmann::json j;
          try {
            j = nlohmann::json::parse(text);
          } catch (const nlohmann::json::exception& e) {
            throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
          }
          const ExperimentConfig c = parse_config(j);
          py::gil_scoped_release release;
          return run_experiment(c, {stage_mask(stages), strict}, out_dir);
        },
        py::arg("config_json"), py::arg("out_dir"), py::arg("stages") = std::vector<std::string>{},
        py::arg("strict_invariants") = false, "Runs the pipeline and returns the written file paths");
}
