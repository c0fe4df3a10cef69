#include "coarsequant/runner.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>

#include "json.hpp"

#include "coarsequant/acceptance.hpp"
#include "coarsequant/coarse.hpp"
#include "coarsequant/diagnostics.hpp"
#include "coarsequant/geometry.hpp"
#include "coarsequant/index.hpp"
#include "coarsequant/linalg.hpp"
#include "coarsequant/opint.hpp"
#include "coarsequant/report.hpp"
#include "coarsequant/symbol.hpp"

namespace cq::run {

Verb verb_from_string(const std::string& s) {
  if (s == "quantize") return Verb::Quantize;
  if (s == "index") return Verb::Index;
  if (s == "recover") return Verb::Recover;
  if (s == "jacobi") return Verb::Jacobi;
  if (s == "average") return Verb::Average;
  if (s == "diagnose") return Verb::Diagnose;
  if (s == "compare") return Verb::Compare;
  if (s == "suite") return Verb::Suite;
  throw ConfigInvalid("unknown verb '" + s + "'");
}

ExperimentConfig parse_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.name = j.value("name", "experiment");
  cfg.verb = verb_from_string(j.value("verb", "suite"));
  if (j.contains("seed")) {
    cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.seed_set = true;
  }
  if (j.contains("manifold")) cfg.manifold_json = j["manifold"].dump();
  if (j.contains("symbol")) {
    cfg.symbol_name = j["symbol"].value("name", "winding_w");
    cfg.winding = j["symbol"].value("winding", 1);
    cfg.symbol_expr = j["symbol"].value("expr", "");
  }
  if (j.contains("partition")) {
    cfg.partition_centers = j["partition"].value("centers", 0);
    cfg.partition_radius = j["partition"].value("radius", 0.0);
  }
  cfg.epsilon = j.value("epsilon", 0.1);
  if (j.contains("ladder")) {
    for (const auto& lev : j["ladder"]) {
      LadderLevel l;
      l.n = lev.value("n", 0);
      l.radius = lev.value("radius", 0.0);
      l.epsilon = lev.value("epsilon", 0.0);
      cfg.ladder.push_back(l);
    }
    for (std::size_t i = 0; i + 1 < cfg.ladder.size(); ++i) {
      if (cfg.ladder[i + 1].n <= cfg.ladder[i].n)
        throw ConfigInvalid("ladder grid sizes must strictly increase");
      if (cfg.ladder[i + 1].radius > cfg.ladder[i].radius + 1e-15)
        throw ConfigInvalid("ladder radii must not increase");
    }
  }
  if (j.contains("cutoffs"))
    cfg.cutoffs = j["cutoffs"].get<std::vector<double>>();
  if (j.contains("windings")) {
    cfg.winding_lo = j["windings"][0].get<int>();
    cfg.winding_hi = j["windings"][1].get<int>();
  }
  cfg.trials = j.value("trials", 20);
  cfg.emit_svg = j.value("emit_svg", false);
  cfg.out_dir = j.value("out", ".");

  if ((cfg.verb == Verb::Jacobi || cfg.verb == Verb::Average) &&
      !cfg.seed_set)
    throw ConfigInvalid("randomized verbs require an explicit seed");
  return cfg;
}

namespace {

geo::ManifoldGrid grid_from(const ExperimentConfig& cfg, int default_n) {
  if (!cfg.manifold_json.empty())
    return geo::manifold_from_json(cfg.manifold_json);
  geo::ManifoldSpec spec;
  spec.model = geo::Model::Circle;
  spec.n = default_n;
  return geo::ManifoldGrid(spec);
}

sym::Symbol symbol_from(const ExperimentConfig& cfg,
                        const geo::ManifoldGrid& grid) {
  if (!cfg.symbol_expr.empty())
    return sym::symbol_from_expression(cfg.symbol_expr, grid.dim(),
                                       grid.dim());
  return sym::make_symbol(cfg.symbol_name, cfg.winding);
}

std::string artifact_path(const ExperimentConfig& cfg,
                          const std::string& ext) {
  std::filesystem::create_directories(cfg.out_dir);
  return cfg.out_dir + "/" + cfg.name + "." + ext;
}

void emit(const ExperimentConfig& cfg, const report::Table& table, int x_col,
          const std::vector<int>& y_cols, const std::string& title,
          RunResult& out, bool log_y = false) {
  const std::string csv_path = artifact_path(cfg, "csv");
  report::write_file(csv_path, report::to_csv(table));
  out.artifacts.push_back(csv_path);
  if (cfg.emit_svg && !table.rows.empty()) {
    const std::string svg_path = artifact_path(cfg, "svg");
    report::write_file(svg_path, report::to_svg(table, x_col, y_cols, title,
                                                log_y));
    out.artifacts.push_back(svg_path);
  }
}

RunResult run_jacobi(const ExperimentConfig& cfg) {
  RunResult out;
  geo::ManifoldGrid grid = grid_from(cfg, 16);
  CounterRng rng(cfg.seed, 100);
  const double c = grid.effective_bound();
  report::Table table;
  table.header = {"trial", "p_norm", "distortion", "bound", "ok"};
  bool all_ok = true;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const int dim = grid.dim();
    Vec x(dim);
    for (int d = 0; d < dim; ++d)
      x[d] = grid.period(d) > 0 ? rng.uniform(0, grid.period(d))
                                : rng.uniform(-1, 1);
    Vec p = rng.normal_vec(dim);
    p *= rng.uniform(0.02, 1.0 / c) / p.norm();
    Vec q = rng.normal_vec(dim).normalized();
    geo::GeodesicProblem prob;
    prob.base = x;
    prob.direction = p;
    prob.variation = q;
    Vec w1 =
        geo::solve_jacobi(prob, geo::jacobi_coefficients(grid, x, p)).w1;
    const double dist = (w1 - q).norm();
    const double bound = q.norm() * p.squaredNorm() * c * c * std::exp(1.0);
    const bool ok = dist <= bound + 1e-12;
    all_ok = all_ok && ok;
    report::add_row(table, {static_cast<double>(trial), p.norm(), dist,
                            bound, ok ? 1.0 : 0.0});
  }
  emit(cfg, table, 1, {2, 3}, "Jacobi distortion", out);
  out.exit_code = all_ok ? 0 : 1;
  return out;
}

RunResult run_average(const ExperimentConfig& cfg) {
  RunResult out;
  CounterRng rng(cfg.seed, 101);
  lie::ProperActionScene scene = lie::make_scene(96, 0.1, 5, 12);
  report::Table table;
  table.header = {"trial", "k_translates", "norm_t", "norm_avg", "ok"};
  bool all_ok = true;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const int width = 4 + static_cast<int>(rng.uniform() * 26);
    const int lo = 8 + static_cast<int>(rng.uniform() * (96 - width - 16));
    CMat t = CMat::Zero(96, 96);
    t.block(lo, lo, width, width) = rng.cnormal_mat(width, width);
    lie::AverageResult avg = lie::group_average(scene, t);
    const double nt = op_norm(t), na = op_norm(avg.mat);
    const bool ok = na <= avg.effective_translates * nt + 1e-12;
    all_ok = all_ok && ok;
    report::add_row(table,
                    {static_cast<double>(trial),
                     static_cast<double>(avg.effective_translates), nt, na,
                     ok ? 1.0 : 0.0});
  }
  emit(cfg, table, 0, {2, 3}, "group averaging", out);
  out.exit_code = all_ok ? 0 : 1;
  return out;
}

std::vector<LadderLevel> default_ladder(const ExperimentConfig& cfg) {
  if (!cfg.ladder.empty()) return cfg.ladder;
  return {{128, 0.2, 0.2}, {256, 0.1, 0.1}, {512, 0.05, 0.05}};
}

RunResult run_quantize(const ExperimentConfig& cfg) {
  RunResult out;
  report::Table table;
  table.header = {"epsilon", "grid_n", "defect", "rank_budget"};
  for (const LadderLevel& lev : default_ladder(cfg)) {
    geo::ManifoldSpec mspec;
    mspec.model = geo::Model::Circle;
    mspec.n = lev.n;
    geo::ManifoldGrid grid(mspec);
    coarse::NuCutoff nu{grid.ball_radius()};
    auto cos = std::make_shared<const sym::Cosymbol>(
        coarse::cosymbol_of(symbol_from(cfg, grid), grid, nu));
    opint::OperatorField field = coarse::transplant_field(grid, cos, nu);
    opint::EpsilonCover cover = opint::epsilon_cover(grid, field,
                                                     lev.epsilon);
    opint::PartitionOfUnity pou1 =
        opint::build_partition(grid, cover.centers, cover.radius);
    const int k2 = static_cast<int>(cover.centers.size()) + 1;
    std::vector<Vec> centers2;
    for (int i = 0; i < k2; ++i) {
      Vec x(1);
      x[0] = grid.period(0) * (i + 0.37) / k2;
      centers2.push_back(x);
    }
    opint::PartitionOfUnity pou2 =
        opint::build_partition(grid, centers2, cover.radius);
    const double defect = opint::integral_stability(field, pou1, pou2);
    report::add_row(table, {lev.epsilon, static_cast<double>(lev.n), defect,
                            static_cast<double>(truncation_rank(lev.n))});
  }
  emit(cfg, table, 1, {2}, "partition stability defect", out);
  return out;
}

RunResult run_compare(const ExperimentConfig& cfg) {
  RunResult out;
  std::vector<std::tuple<int, double, double>> ladder;
  for (const LadderLevel& lev : default_ladder(cfg))
    ladder.emplace_back(lev.n, lev.radius, lev.epsilon);
  geo::ManifoldGrid probe = grid_from(cfg, 128);
  sym::Symbol s = symbol_from(cfg, probe);
  std::vector<coarse::CompareLevel> levels =
      coarse::compare_with_direct(s, ladder);
  report::Table table;
  table.header = {"level", "grid_n", "radius", "epsilon", "defect",
                  "sigma_sup"};
  bool ok = true;
  const double sup = levels.back().sigma_sup;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    report::add_row(table,
                    {static_cast<double>(i),
                     static_cast<double>(levels[i].n), levels[i].radius,
                     levels[i].epsilon, levels[i].defect,
                     levels[i].sigma_sup});
    if (i > 0) {
      const bool at_floor = levels[i].defect <= 1e-6 * sup &&
                            levels[i - 1].defect <= 1e-6 * sup;
      if (!at_floor && levels[i].defect * 2.0 > levels[i - 1].defect)
        ok = false;
    }
  }
  if (levels.back().defect > 0.05 * sup) ok = false;
  emit(cfg, table, 0, {4}, "coarse vs direct defect", out, true);
  out.exit_code = ok ? 0 : 1;
  return out;
}

RunResult run_recover(const ExperimentConfig& cfg) {
  RunResult out;
  geo::ManifoldGrid grid = grid_from(cfg, 512);
  coarse::NuCutoff nu{grid.ball_radius()};
  sym::Symbol s = symbol_from(cfg, grid);
  sym::Cosymbol cos = coarse::cosymbol_of(s, grid, nu);
  const double radius =
      cfg.partition_radius > 0 ? cfg.partition_radius : 0.12;
  const int count =
      cfg.partition_centers > 0
          ? cfg.partition_centers
          : static_cast<int>(std::ceil(grid.period(0) / radius));
  opint::PartitionOfUnity pou = opint::build_partition(
      grid, coarse::uniform_centers(grid, count), radius);
  coarse::QuantizeOptions qopts;
  qopts.epsilon = cfg.epsilon > 0 ? std::max(cfg.epsilon, 0.5) : 0.5;
  coarse::CoarseOperator F = coarse::quantize(cos, grid, pou, nu, qopts);
  Vec x = Vec::Zero(1);
  sym::CosymbolFiber truth = cos.fiber(x);
  report::Table table;
  table.header = {"level", "cutoff", "rel_error"};
  bool ok = true;
  double prev = 1e300;
  for (std::size_t lev = 0; lev < cfg.cutoffs.size(); ++lev) {
    sym::CosymbolFiber rec = coarse::recover_cosymbol(
        F.mat, grid, x, nu, truth.lat, cfg.cutoffs[lev]);
    double num = 0.0;
    for (int i = 0; i < truth.lat.size(); ++i)
      num += (rec.samples[i] - truth.samples[i]).squaredNorm();
    const double rel =
        std::sqrt(num * truth.lat.cell_volume()) / truth.l2_norm();
    if (rel > prev + 1e-12) ok = false;
    prev = rel;
    report::add_row(table,
                    {static_cast<double>(lev), cfg.cutoffs[lev], rel});
  }
  if (prev > 0.1) ok = false;
  emit(cfg, table, 1, {2}, "recovery roundtrip error", out);
  out.exit_code = ok ? 0 : 1;
  return out;
}

RunResult run_index(const ExperimentConfig& cfg) {
  RunResult out;
  geo::ManifoldGrid grid = grid_from(cfg, 512);
  const int n = grid.spec().n;
  report::Table table;
  table.header = {"winding",  "grid_n",      "analytic_index", "rounded",
                  "residual", "topological", "match"};
  bool ok = true;
  for (int w = cfg.winding_lo; w <= cfg.winding_hi; ++w) {
    CMat a = idx::toeplitz_winding_operator(n, w);
    CMat p = idx::toeplitz_winding_parametrix(n, w);
    idx::IndexReport rep = idx::fredholm_index_calderon(a, p);
    const int topo =
        idx::winding_number(sym::make_symbol("winding_w", w), 4096, 1.0);
    const bool match = rep.rounded == -topo && rep.residual <= 0.05;
    ok = ok && match;
    report::add_row(table, {static_cast<double>(w), static_cast<double>(n),
                            rep.analytic_index,
                            static_cast<double>(rep.rounded), rep.residual,
                            static_cast<double>(topo), match ? 1.0 : 0.0});
  }
  emit(cfg, table, 0, {2}, "analytic index vs winding", out);
  out.exit_code = ok ? 0 : 1;
  return out;
}

RunResult run_diagnose(const ExperimentConfig& cfg) {
  RunResult out;
  report::Table table;
  table.header = {"grid_n", "op_id", "r", "tail_ratio"};
  const std::vector<int> ns = {128, 256, 512};
  struct Entry {
    std::string name;
    bool x_dependent;
    bool must_pass;
  };
  const std::vector<Entry> entries = {{"constant", false, true},
                                      {"dirac1d", false, true},
                                      {"winding_w", true, true},
                                      {"sin_xi_control", false, false}};
  bool ok = true;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    std::vector<diag::CompactnessReport> ladder;
    for (int n : ns) {
      geo::ManifoldSpec mspec;
      mspec.model = geo::Model::Circle;
      mspec.n = n;
      geo::ManifoldGrid grid(mspec);
      CMat op;
      if (entries[e].name == "sin_xi_control") {
        CVec m(n);
        for (int r = 0; r < n; ++r)
          m[r] = std::sin(static_cast<double>(dft_frequency(r, n)));
        op = fourier_multiplier(m);
      } else if (entries[e].x_dependent) {
        op = coarse::kohn_nirenberg(grid,
                                    sym::make_symbol(entries[e].name, 1));
      } else {
        sym::Symbol s = sym::make_symbol(entries[e].name, 1);
        CVec m(n);
        for (int r = 0; r < n; ++r) {
          Vec xi(1);
          xi[0] = dft_frequency(r, n);
          m[r] = s.eval(Vec::Zero(1), xi)(0, 0);
        }
        op = fourier_multiplier(m);
      }
      Vec a(n);
      for (int i = 0; i < n; ++i)
        a[i] = std::sin(grid.points()[i][0]);
      diag::CompactnessReport rep = diag::commutator_report(op, a);
      for (std::size_t ri = 0; ri < rep.ranks.size(); ++ri)
        report::add_row(table, {static_cast<double>(n),
                                static_cast<double>(e),
                                static_cast<double>(rep.ranks[ri]),
                                rep.tail_ratios[ri]});
      ladder.push_back(std::move(rep));
    }
    diag::ProxyVerdict v = diag::compactness_verdict(ladder);
    std::cout << entries[e].name << ": proxy "
              << (v.pass ? "pass" : "fail") << " (expected "
              << (entries[e].must_pass ? "pass" : "fail") << ")\n";
    if (v.pass != entries[e].must_pass) ok = false;
  }
  emit(cfg, table, 0, {3}, "commutator tail ratios", out, true);
  out.exit_code = ok ? 0 : 1;
  return out;
}

RunResult run_suite(const ExperimentConfig& cfg) {
  RunResult out;
  auto results = accept::run_all(cfg.seed_set ? cfg.seed : 12345,
                                 std::cout);
  out.exit_code = accept::all_pass(results) ? 0 : 1;
  return out;
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
  switch (cfg.verb) {
    case Verb::Jacobi: return run_jacobi(cfg);
    case Verb::Average: return run_average(cfg);
    case Verb::Quantize: return run_quantize(cfg);
    case Verb::Compare: return run_compare(cfg);
    case Verb::Recover: return run_recover(cfg);
    case Verb::Index: return run_index(cfg);
    case Verb::Diagnose: return run_diagnose(cfg);
    case Verb::Suite: return run_suite(cfg);
  }
  throw ConfigInvalid("unhandled verb");
}

}  // namespace cq::run
