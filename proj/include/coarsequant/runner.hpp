#pragma once
//
// Batch experiment runner: JSON experiment configs, verb dispatch, CSV/SVG
// artifacts, deterministic for a fixed seed.
//

#include "coarsequant/common.hpp"

#include <string>

namespace cq::run {

enum class Verb {
  Quantize,
  Index,
  Recover,
  Jacobi,
  Average,
  Diagnose,
  Compare,
  Suite
};

Verb verb_from_string(const std::string& s);

struct LadderLevel {
  int n = 0;
  double radius = 0.0;
  double epsilon = 0.0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Verb verb = Verb::Suite;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string manifold_json;   // stanza passed through to the geometry module
  std::string symbol_name = "winding_w";
  int winding = 1;
  std::string symbol_expr;     // expression sublanguage (overrides name)
  int partition_centers = 0;   // 0: derived from the radius
  double partition_radius = 0.0;
  double epsilon = 0.1;
  std::vector<LadderLevel> ladder;
  std::vector<double> cutoffs = {0.2, 0.1, 0.05};
  int winding_lo = -3, winding_hi = 3;
  int trials = 20;
  bool emit_svg = false;
  std::string out_dir = ".";
};

// Parses and validates a config document. Throws ConfigInvalid.
ExperimentConfig parse_config(const std::string& json_text);

// exit codes: 0 pass, 1 check failure, 2 config error, 3 numerical error
struct RunResult {
  int exit_code = 0;
  std::vector<std::string> artifacts;
};

RunResult run(const ExperimentConfig& config);

}  // namespace cq::run
