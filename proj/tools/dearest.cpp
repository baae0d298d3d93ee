// Command-line driver: run experiments, inspect topologies, derive parameters.

#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dearest/error.hpp"
#include "dearest/experiment.hpp"
#include "dearest/optimizer.hpp"
#include "dearest/topology.hpp"

namespace {

dearest::Graph make_graph(const std::string &kind, int m, double prob, std::uint64_t seed,
                          const std::string &file) {
  if (kind == "ring") return dearest::build_ring(m);
  if (kind == "complete") return dearest::build_complete(m);
  if (kind == "path") return dearest::build_path(m);
  if (kind == "random") return dearest::build_random(m, prob, seed);
  if (kind == "file") return dearest::read_graph(file);
  throw dearest::ConfigError("unknown topology '" + kind + "'");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Decentralized probabilistic recursive gradient descent"};
  app.require_subcommand(1);

  auto *run_cmd = app.add_subcommand("run", "Run an experiment description");
  std::string spec_path;
  run_cmd->add_option("spec", spec_path, "key = value experiment file")->required();

  auto *spectra_cmd = app.add_subcommand("spectra", "Print lambda2 and the spectral gap of W");
  std::string kind = "ring";
  int m = 0;
  double prob = 0.15;
  std::uint64_t seed = 1;
  std::string graph_file;
  spectra_cmd->add_option("topology", kind, "ring | complete | path | random | file")
      ->required();
  spectra_cmd->add_option("m", m, "number of agents");
  spectra_cmd->add_option("--prob", prob, "edge probability for random graphs");
  spectra_cmd->add_option("--seed", seed, "seed for random graphs");
  spectra_cmd->add_option("--graph", graph_file, "edge-list file for topology 'file'");

  auto *params_cmd = app.add_subcommand("params", "Print the derived run configuration");
  int pm = 0, pn = 0;
  double lip = 0.0, lambda2 = 0.0, eps = 0.0, delta0 = 1.0, g0c = 0.0;
  params_cmd->add_option("m", pm)->required();
  params_cmd->add_option("n", pn)->required();
  params_cmd->add_option("L", lip)->required();
  params_cmd->add_option("lambda2", lambda2)->required();
  params_cmd->add_option("eps", eps)->required();
  params_cmd->add_option("--delta0", delta0, "bound on f(x0) - f*");
  params_cmd->add_option("--g0-consensus-sq", g0c, "|g0 - 1 g0bar|^2");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      return dearest::run_experiment(dearest::load_spec(spec_path), std::cout, std::cerr);
    }
    if (*spectra_cmd) {
      if (kind != "file" && m < 1) throw dearest::ConfigError("spectra needs m");
      const auto g = make_graph(kind, m, prob, seed, graph_file);
      const auto w = dearest::gossip_for(g);
      std::cout << std::setprecision(10) << "m " << g.size() << "\nedges " << g.edges().size()
                << "\nlambda2 " << w.lambda2() << "\ngap " << w.gap() << '\n';
      return 0;
    }
    if (*params_cmd) {
      const auto cfg = dearest::theorem1_config(pm, pn, lip, lambda2, eps, delta0, g0c);
      std::cout << std::setprecision(10) << "eta " << cfg.eta << "\nb " << cfg.b << "\np "
                << cfg.p << "\nK " << cfg.big_k << "\nK_hat " << cfg.hat_k << "\nK_in "
                << cfg.k_in << "\nT " << cfg.t_max << '\n';
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
