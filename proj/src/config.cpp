#include "qelab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "qelab/csv.hpp"
#include "qelab/errors.hpp"

namespace qelab {

using nlohmann::json;

std::vector<SeedPair> ExperimentConfig::seed_pairs() const {
  std::vector<SeedPair> out;
  for (std::size_t k = 0; k < graph_seeds.size(); ++k) out.push_back({graph_seeds[k], pot_seeds[k]});
  return out;
}

TreeOptions ExperimentConfig::tree_options() const {
  TreeOptions o;
  o.depth = mc.depth;
  o.leaf = mc.leaf;
  o.work_cap = mc.work_cap;
  o.pool_size = mc.pool_size;
  o.lambda0 = lambda0;
  return o;
}

namespace {

std::string leaf_name(LeafCondition leaf) {
  return leaf == LeafCondition::bare_site ? "bare-site" : "free-value";
}

LeafCondition leaf_from(const std::string& s) {
  if (s == "bare-site") return LeafCondition::bare_site;
  if (s == "free-value") return LeafCondition::free_value;
  throw InvalidInput("mc.leaf must be bare-site or free-value, got '" + s + "'");
}

std::string observable_kind_name(ObservableKind k) {
  switch (k) {
    case ObservableKind::constant: return "constant";
    case ObservableKind::indicator: return "indicator";
    case ObservableKind::delta: return "delta";
    case ObservableKind::file: return "file";
  }
  return "unknown";
}

ObservableKind observable_kind_from(const std::string& s) {
  if (s == "constant") return ObservableKind::constant;
  if (s == "indicator") return ObservableKind::indicator;
  if (s == "delta") return ObservableKind::delta;
  if (s == "file") return ObservableKind::file;
  throw InvalidInput("observable.kind must be constant, indicator, delta or file, got '" + s + "'");
}

/// Reads the keys of one JSON object, rejecting anything it was not asked for.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidInput(where_ + " must be a JSON object");
  }

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw InvalidInput("unknown key '" + key + "' in " + where_);
  }

  template <typename T>
  void get(const std::string& key, T& target) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      target = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw InvalidInput(where_ + "." + key + " has the wrong type");
    }
  }

  const json* sub(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  {
    Reader r(j, "config");
    r.get("q", c.q);
    if (const json* n = r.sub("n")) {
      if (!n->is_number_integer()) throw InvalidInput("config.n must be an integer");
      c.n_values = {n->get<std::size_t>()};
    }
    r.get("n_values", c.n_values);
    r.get("graph_seeds", c.graph_seeds);
    r.get("pot_seeds", c.pot_seeds);
    r.get("epsilon", c.epsilon);
    r.get("lambda0", c.lambda0);
    r.get("eta0_values", c.eta0_values);
    r.get("mass_varsigma", c.mass_varsigma);
    r.get("equivalence_lambdas", c.equivalence_lambdas);
    r.get("lln_k_max", c.lln_k_max);
    r.get("max_dimension", c.max_dimension);
    r.get("max_generation_attempts", c.max_generation_attempts);
    r.get("keep_terms", c.keep_terms);
    r.get("output_dir", c.output_dir);
    if (const json* p = r.sub("potential")) {
      Reader pr(*p, "potential");
      std::string kind = to_string(c.potential.kind);
      pr.get("kind", kind);
      c.potential.kind = potential_kind_from_string(kind);
      pr.get("A", c.potential.support);
      pr.get("beta_a", c.potential.beta_a);
      pr.get("beta_b", c.potential.beta_b);
      pr.get("holder_exponent", c.potential.holder_exponent);
      pr.get("holder_constant", c.potential.holder_constant);
      pr.get("allow_non_pot", c.potential.allow_non_pot);
    }
    if (const json* o = r.sub("observable")) {
      Reader orr(*o, "observable");
      std::string kind = observable_kind_name(c.observable.kind);
      orr.get("kind", kind);
      c.observable.kind = observable_kind_from(kind);
      double constant = c.observable.constant.real();
      orr.get("constant", constant);
      c.observable.constant = constant;
      orr.get("alpha", c.observable.alpha);
      orr.get("vertex", c.observable.vertex);
      std::string path = c.observable.path.string();
      orr.get("path", path);
      c.observable.path = path;
      orr.get("seed", c.observable.seed);
    }
    if (const json* k = r.sub("kernel")) {
      Reader kr(*k, "kernel");
      kr.get("shape", c.kernel.shape);
      kr.get("R", c.kernel.range);
      kr.get("value", c.kernel.value);
    }
    if (const json* m = r.sub("mc")) {
      Reader mr(*m, "mc");
      mr.get("samples", c.mc.samples);
      mr.get("depth", c.mc.depth);
      mr.get("lambda_spacing", c.mc.lambda_spacing);
      mr.get("seed", c.mc.seed);
      mr.get("pool_size", c.mc.pool_size);
      std::string leaf = leaf_name(c.mc.leaf);
      mr.get("leaf", leaf);
      c.mc.leaf = leaf_from(leaf);
      mr.get("work_cap", c.mc.work_cap);
    }
    if (const json* m = r.sub("moments")) {
      Reader mr(*m, "moments");
      mr.get("lambdas", c.moments.lambdas);
      mr.get("etas", c.moments.etas);
      mr.get("s_values", c.moments.s_values);
      mr.get("samples", c.moments.samples);
      mr.get("threshold_c", c.moments.threshold_c);
      mr.get("threshold_C", c.moments.threshold_C);
      mr.get("bst_threshold", c.moments.bst_threshold);
    }
    if (const json* e = r.sub("esd")) {
      Reader er(*e, "esd");
      er.get("reference", c.esd.reference);
      er.get("bins", c.esd.bins);
      er.get("ids_eta", c.esd.ids_eta);
      er.get("ids_spacing", c.esd.ids_spacing);
      er.get("ids_samples", c.esd.ids_samples);
    }
  }
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  if (c.q < 2) throw InvalidInput("q must be at least 2");
  const double edge = 2.0 * std::sqrt(static_cast<double>(c.q));
  if (c.n_values.empty()) throw InvalidInput("n_values must not be empty");
  for (std::size_t n : c.n_values) {
    if (n < static_cast<std::size_t>(c.q) + 2) throw InvalidInput("every N must be at least q+2");
    if ((n * static_cast<std::size_t>(c.q + 1)) % 2 != 0)
      throw InvalidInput("N*(q+1) must be even for N=" + std::to_string(n));
  }
  if (c.graph_seeds.empty() || c.graph_seeds.size() != c.pot_seeds.size())
    throw InvalidInput("graph_seeds and pot_seeds must be non-empty and of equal length");
  if (!std::isfinite(c.epsilon)) throw InvalidInput("epsilon must be finite");
  c.potential.validate();
  if (!(c.lambda0 > 0.0 && c.lambda0 < edge))
    throw InvalidInput("lambda0=" + format_double(c.lambda0) +
                       " must lie in the open band (0, 2 sqrt q) = (0, " + format_double(edge) +
                       "), i.e. the window (-lambda0, lambda0) must sit inside (-2 sqrt q, 2 sqrt q)");
  if (c.eta0_values.empty()) throw InvalidInput("eta0_values must not be empty");
  for (double e : c.eta0_values)
    if (!(e > 0.0)) throw InvalidInput("every eta0 must be positive");
  switch (c.observable.kind) {
    case ObservableKind::constant:
      if (!(std::abs(c.observable.constant) <= 1.0))
        throw InvalidInput("constant observable must satisfy |c| <= 1");
      break;
    case ObservableKind::indicator:
      if (!(c.observable.alpha > 0.0 && c.observable.alpha < 1.0))
        throw InvalidInput("observable.alpha must lie in (0, 1)");
      break;
    case ObservableKind::file:
      if (c.observable.path.empty()) throw InvalidInput("file observable needs a path");
      break;
    case ObservableKind::delta: break;
  }
  static const std::set<std::string> shapes{"zero", "diagonal", "shell", "ball"};
  if (!shapes.count(c.kernel.shape))
    throw InvalidInput("kernel.shape must be zero, diagonal, shell or ball");
  if (!(std::abs(c.kernel.value) <= 1.0)) throw InvalidInput("kernel.value must satisfy |value| <= 1");
  if (c.kernel.shape == "diagonal" && c.kernel.range != 0)
    throw InvalidInput("diagonal kernels have R = 0");
  if (c.mc.samples < 1) throw InvalidInput("mc.samples must be positive");
  if (!(c.mc.lambda_spacing > 0.0)) throw InvalidInput("mc.lambda_spacing must be positive");
  if (c.moments.samples < 1) throw InvalidInput("moments.samples must be positive");
  for (double e : c.moments.etas)
    if (!(e > 0.0)) throw InvalidInput("moment grid eta values must be positive");
  for (double s : c.moments.s_values)
    if (!(s > 0.0)) throw InvalidInput("moments.s_values must be positive");
  if (c.esd.reference != "auto" && c.esd.reference != "kesten-mckay" && c.esd.reference != "ids")
    throw InvalidInput("esd.reference must be auto, kesten-mckay or ids");
  if (c.esd.bins < 1) throw InvalidInput("esd.bins must be positive");
  if (!(c.esd.ids_eta > 0.0) || !(c.esd.ids_spacing > 0.0))
    throw InvalidInput("esd.ids_eta and esd.ids_spacing must be positive");
  if (c.lln_k_max < 1 || c.lln_k_max > 12) throw InvalidInput("lln_k_max must lie in 1..12");
  for (double s : c.mass_varsigma)
    if (!(s > 0.0)) throw InvalidInput("mass_varsigma values must be positive");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidInput("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["q"] = c.q;
  j["n_values"] = c.n_values;
  j["graph_seeds"] = c.graph_seeds;
  j["pot_seeds"] = c.pot_seeds;
  j["epsilon"] = c.epsilon;
  j["potential"] = {{"kind", to_string(c.potential.kind)},
                    {"A", c.potential.support},
                    {"beta_a", c.potential.beta_a},
                    {"beta_b", c.potential.beta_b},
                    {"holder_exponent", c.potential.holder_exponent},
                    {"holder_constant", c.potential.holder_constant},
                    {"allow_non_pot", c.potential.allow_non_pot}};
  j["lambda0"] = c.lambda0;
  j["eta0_values"] = c.eta0_values;
  j["observable"] = {{"kind", observable_kind_name(c.observable.kind)},
                     {"constant", c.observable.constant.real()},
                     {"alpha", c.observable.alpha},
                     {"vertex", c.observable.vertex},
                     {"path", c.observable.path.string()},
                     {"seed", c.observable.seed}};
  j["kernel"] = {{"shape", c.kernel.shape}, {"R", c.kernel.range}, {"value", c.kernel.value}};
  j["mc"] = {{"samples", c.mc.samples},     {"depth", c.mc.depth},
             {"lambda_spacing", c.mc.lambda_spacing}, {"seed", c.mc.seed},
             {"pool_size", c.mc.pool_size}, {"leaf", leaf_name(c.mc.leaf)},
             {"work_cap", c.mc.work_cap}};
  j["moments"] = {{"lambdas", c.moments.lambdas},         {"etas", c.moments.etas},
                  {"s_values", c.moments.s_values},       {"samples", c.moments.samples},
                  {"threshold_c", c.moments.threshold_c}, {"threshold_C", c.moments.threshold_C},
                  {"bst_threshold", c.moments.bst_threshold}};
  j["esd"] = {{"reference", c.esd.reference}, {"bins", c.esd.bins}, {"ids_eta", c.esd.ids_eta},
              {"ids_spacing", c.esd.ids_spacing}, {"ids_samples", c.esd.ids_samples}};
  j["mass_varsigma"] = c.mass_varsigma;
  j["equivalence_lambdas"] = c.equivalence_lambdas;
  j["lln_k_max"] = c.lln_k_max;
  j["max_dimension"] = c.max_dimension;
  j["max_generation_attempts"] = c.max_generation_attempts;
  j["keep_terms"] = c.keep_terms;
  j["output_dir"] = c.output_dir;
  return j;
}

}  // namespace qelab
