// Command-line front end: experiment configs in, CSV/SVG artifacts out.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "coarsequant/common.hpp"
#include "coarsequant/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw cq::ConfigInvalid("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("COARSEQUANT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coarsequant: coarse operator quantization workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long long seed = -1;
  int threads = 0;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--out", out_dir, "output directory for artifacts");
  app.add_option("--seed", seed, "seed override");
  app.add_option("--threads", threads,
                 "worker threads (env COARSEQUANT_THREADS as fallback)");

  // direct flags for the index verb
  std::string idx_symbol = "winding_w";
  int idx_winding = 1, idx_grid = 512, idx_ladder_levels = 1;
  bool idx_emit_csv = false;

  const std::vector<std::string> verbs = {"quantize", "index",   "recover",
                                          "jacobi",   "average", "diagnose",
                                          "compare",  "suite"};
  for (const std::string& v : verbs) {
    CLI::App* sub = app.add_subcommand(v);
    if (v == "index") {
      sub->add_option("--symbol", idx_symbol, "catalog symbol name");
      sub->add_option("--winding", idx_winding, "winding parameter");
      sub->add_option("--grid", idx_grid, "grid size");
      sub->add_option("--ladder-levels", idx_ladder_levels,
                      "refinement levels");
      sub->add_flag("--emit-csv", idx_emit_csv, "write the CSV artifact");
    }
  }

  CLI11_PARSE(app, argc, argv);
  cq::set_default_threads(resolve_threads(threads));

  const std::string verb = app.get_subcommands().front()->get_name();

  try {
    cq::run::ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = cq::run::parse_config(read_file(config_path));
    } else {
      cfg.name = verb;
      cfg.verb = cq::run::verb_from_string(verb);
      if (verb == "index") {
        cfg.symbol_name = idx_symbol;
        cfg.winding_lo = -std::abs(idx_winding);
        cfg.winding_hi = std::abs(idx_winding);
        std::ostringstream m;
        m << "{\"model\":\"circle\",\"n\":" << idx_grid << "}";
        cfg.manifold_json = m.str();
      }
    }
    cfg.verb = cq::run::verb_from_string(verb);  // CLI verb wins
    if (seed >= 0) {
      cfg.seed = static_cast<std::uint64_t>(seed);
      cfg.seed_set = true;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if ((cfg.verb == cq::run::Verb::Jacobi ||
         cfg.verb == cq::run::Verb::Average) &&
        !cfg.seed_set)
      throw cq::ConfigInvalid("randomized verbs require --seed");

    cq::run::RunResult res = cq::run::run(cfg);
    for (const std::string& a : res.artifacts)
      std::cout << "wrote " << a << "\n";
    return res.exit_code;
  } catch (const cq::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cq::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
