#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "qelab/config.hpp"
#include "qelab/errors.hpp"
#include "qelab/experiment.hpp"
#include "qelab/numeric.hpp"

namespace {

struct Command {
  const char* name;
  const char* help;
  unsigned stages;
};

constexpr Command kCommands[] = {
    {"generate-graph", "Sample the random regular graphs of the grid and save them as JSON",
     qelab::stage_graphs},
    {"spectrum", "Dump the eigenvalues of every grid point", qelab::stage_spectrum},
    {"qe-diag", "Diagonal-observable QE statistic per grid point", qelab::stage_qe_diag},
    {"qe-kernel", "Finite-range kernel QE statistic and average equivalence per grid point",
     qelab::stage_qe_kernel},
    {"green-moments", "Tree Monte Carlo moments of the cavity Green function",
     qelab::stage_green_moments},
    {"esd", "Empirical spectral distance to the reference law and moment matching",
     qelab::stage_esd},
    {"check-conditions", "Expansion, injectivity radius and Green condition report",
     qelab::stage_conditions},
    {"run", "Every stage", qelab::stage_all},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum ergodicity experiments for Anderson models on random regular graphs"};
  app.require_subcommand(1);

  std::filesystem::path config_path;
  std::string out_dir;
  unsigned threads = 0;
  bool strict = false;
  app.add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (default: output_dir from the config)");
  app.add_option("--threads", threads, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  app.add_flag("--strict-invariants", strict, "Fail with exit code 4 on numerical invariant violations");

  std::map<const CLI::App*, unsigned> stages;
  for (const Command& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->fallthrough();
    stages[sub] = c.stages;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  try {
    qelab::set_thread_count(threads);
    const qelab::ExperimentConfig config = qelab::load_config(config_path);
    const std::filesystem::path out = out_dir.empty() ? config.output_dir : out_dir;
    qelab::PipelineOptions options;
    options.stages = stages.at(chosen);
    options.strict_invariants = strict;
    const auto written = qelab::run_experiment(config, options, out);
    for (const std::string& f : written) std::cout << (out / f).string() << '\n';
    return 0;
  } catch (const qelab::InvariantViolation& e) {
    std::cerr << "error: invariant violated (" << e.invariant() << "): " << e.what() << '\n';
    return qelab::exit_code_for(e);
  } catch (const std::exception& e) {
    const int code = qelab::exit_code_for(e);
    const char* kind = code == 2 ? "invalid input: " : code == 3 ? "compute budget exceeded: " : "";
    std::cerr << "error: " << kind << e.what() << '\n';
    return code;
  }
}
