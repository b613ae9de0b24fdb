// plateopt command line driver.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plateopt/benchmarks.hpp"
#include "plateopt/export.hpp"
#include "plateopt/harness.hpp"
#include "plateopt/solver.hpp"

namespace fs = std::filesystem;
using namespace plateopt;

namespace {

struct Common {
  std::string problem = "ex1";
  std::string disc = "rt0";
  double tol = 1e-3;
  int max_iterations = 50;
  int split_depth = 2;
};

void add_common(CLI::App* sub, Common& c, bool with_problem = true) {
  if (with_problem) sub->add_option("--problem", c.problem, "ex1 or ex2")->check(CLI::IsMember({"ex1", "ex2"}));
  sub->add_option("--disc", c.disc, "rt0 or p1")->check(CLI::IsMember({"rt0", "p1"}));
  sub->add_option("--tol", c.tol, "Newton tolerance on ||F||")->check(CLI::PositiveNumber);
  sub->add_option("--max-iterations", c.max_iterations, "Newton iteration limit")->check(CLI::PositiveNumber);
  sub->add_option("--split-depth", c.split_depth, "subdivision depth of the split quadrature")->check(CLI::Range(0, 6));
}

ProblemSpec make_spec(const Common& c) {
  const Discretization d = parse_discretization(c.disc);
  return c.problem == "ex1" ? example1_spec(d) : example2_spec(d);
}

NewtonOptions newton_options(const Common& c) {
  NewtonOptions n;
  n.tol = c.tol;
  n.max_iterations = c.max_iterations;
  return n;
}

// Appends the key=value pairs of a config file as --key=value tokens so they
// land after the subcommand and override the same flag given earlier.
std::vector<std::string> config_tokens(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::vector<std::string> out;
  std::string line;
  int n = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": empty key");
    if (key == "config") continue;
    for (auto& ch : key) {
      if (ch == '_') ch = '-';
    }
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

std::string find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ExportError(dir, "cannot create output directory: " + ec.message());
}

std::string eoc_cell(const std::vector<double>& eoc, std::size_t i) {
  return i == 0 || i > eoc.size() ? std::string(11, ' ') : sci(eoc[i - 1]);
}

void print_eoc_table(const EocTable& t) {
  const bool h1 = !t.eoc_h1.empty() || (t.rows.size() == 1 && t.rows[0].err_h1_y);
  std::printf("%5s %12s %12s %12s %11s %12s %11s", "level", "h", "gamma", "err_linf_y", "eoc_y", "err_l2_l", "eoc_l");
  if (h1) std::printf(" %12s %11s", "err_h1_y", "eoc_h1_y");
  std::printf(" %6s %12s\n", "newton", "wall_s");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    std::printf("%5d %12s %12s %12s %11s %12s %11s", r.level, sci(r.h).c_str(), sci(r.gamma).c_str(),
                sci(r.err_linf_y).c_str(), eoc_cell(t.eoc_y, i).c_str(), sci(r.err_l2_l).c_str(),
                eoc_cell(t.eoc_l, i).c_str());
    if (h1) std::printf(" %12s %11s", r.err_h1_y ? sci(*r.err_h1_y).c_str() : "", eoc_cell(t.eoc_h1, i).c_str());
    std::printf(" %6d %12s\n", r.newton_iters, sci(r.wall_s).c_str());
  }
}

void print_newton(const NewtonReport& r) {
  std::printf("status      %s\n", std::string(to_string(r.status)).c_str());
  std::printf("iterations  %d\n", r.iterations);
  std::printf("residuals  ");
  for (double v : r.residuals) std::printf(" %s", sci(v).c_str());
  std::printf("\n");
  if (!r.halvings.empty()) {
    std::printf("halvings   ");
    for (int h : r.halvings) std::printf(" %d", h);
    std::printf("\n");
  }
  if (!r.message.empty()) std::printf("message     %s\n", r.message.c_str());
}

void print_failure(const PathFailure& f) {
  std::printf("\nPATH FAILED\n");
  std::printf("level       %d\n", f.level);
  std::printf("gamma       %s\n", sci(f.gamma).c_str());
  print_newton(f.report);
  std::printf("reason      %s\n", f.message.c_str());
}

void print_level(const LevelRecord& r) {
  const double res = r.report.residuals.empty() ? 0.0 : r.report.residuals.back();
  std::printf("level %2d  h %s  gamma %s  newton %2d  ||F|| %s  J %s  retries %d  wall %s s\n", r.level,
              sci(r.h).c_str(), sci(r.gamma).c_str(), r.report.iterations, sci(res).c_str(), sci(r.objective).c_str(),
              r.retries, sci(r.wall_s).c_str());
  std::fflush(stdout);
}

std::string stem(const Common& c) { return c.problem + "_" + c.disc; }

int cmd_poisson_conv(const Common& c, const std::string& levels, const fs::path& out) {
  const auto [a, b] = parse_level_range(levels);
  const Discretization d = parse_discretization(c.disc);
  const auto rows = poisson_convergence(d, a, b);
  std::vector<std::pair<double, double>> l2, h1;
  for (const auto& r : rows) {
    l2.emplace_back(r.h, r.err_l2);
    h1.emplace_back(r.h, r.err_h1);
  }
  const auto eoc_l2 = compute_eoc(l2), eoc_h1 = compute_eoc(h1);
  const char* second = d == Discretization::rt0 ? "err_l2_flux" : "err_h1_semi";
  std::printf("%5s %12s %12s %11s %12s %11s %12s", "level", "h", "err_l2", "eoc_l2", second, "eoc", "err_linf");
  if (d == Discretization::rt0) std::printf(" %12s", "conservation");
  std::printf("\n");
  ensure_dir(out);
  const fs::path file = out / ("poisson_conv_" + c.disc + ".csv");
  std::ofstream csv(file);
  if (!csv) throw ExportError(file, "cannot open for writing");
  csv << "level,h,err_l2,eoc_l2," << second << ",eoc_" << (second + 4) << ",err_linf,conservation\n";
  csv.precision(17);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::printf("%5d %12s %12s %11s %12s %11s %12s", r.level, sci(r.h).c_str(), sci(r.err_l2).c_str(),
                eoc_cell(eoc_l2, i).c_str(), sci(r.err_h1).c_str(), eoc_cell(eoc_h1, i).c_str(),
                sci(r.err_linf).c_str());
    if (d == Discretization::rt0) std::printf(" %12s", sci(r.conservation).c_str());
    std::printf("\n");
    csv << r.level << ',' << r.h << ',' << r.err_l2 << ',';
    if (i > 0) csv << eoc_l2[i - 1];
    csv << ',' << r.err_h1 << ',';
    if (i > 0) csv << eoc_h1[i - 1];
    csv << ',' << r.err_linf << ',' << r.conservation << '\n';
  }
  if (!csv) throw ExportError(file, "write failed");
  std::printf("wrote %s\n", file.string().c_str());
  return 0;
}

int cmd_solve(const Common& c, int level, double gamma, const std::string& mesh_file, const fs::path& out) {
  const ProblemSpec spec = make_spec(c);
  const MeshPtr mesh = mesh_file.empty() ? build_uniform(level) : load_mesh(mesh_file);
  for (const auto& w : mesh->warnings()) std::fprintf(stderr, "mesh warning: %s\n", w.c_str());
  const auto t0 = std::chrono::steady_clock::now();
  const auto system = make_kkt_system(spec, mesh, c.split_depth);
  const NewtonResult r = newton_solve(*system, system->zero_state(gamma), newton_options(c));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("problem     %s  disc %s  triangles %d  h %s  gamma %s\n", c.problem.c_str(), c.disc.c_str(),
              mesh->num_triangles(), sci(mesh->h()).c_str(), sci(gamma).c_str());
  print_newton(r.report);
  std::printf("wall_s      %s\n", sci(wall).c_str());
  if (!r.report.converged()) return 2;

  std::printf("objective   %s\n", sci(system->objective(r.state)).c_str());
  const ActiveSets a = system->active_sets(r.state);
  std::printf("active      lower_clamp %zu  upper_clamp %zu  state %zu  (of %zu samples)\n",
              a.count(ControlRegion::lower_clamp), a.count(ControlRegion::upper_clamp), a.count_state_active(),
              a.control.size());
  if (c.problem == "ex1" && mesh_file.empty()) {
    LevelRecord rec;
    rec.level = mesh->level();
    rec.h = mesh->h();
    rec.gamma = gamma;
    rec.state = r.state;
    rec.report = r.report;
    const ErrorRecord e = errors_vs_exact(rec, spec, example1_solution(), c.split_depth);
    std::printf("err_linf_y  %s\nerr_l2_l    %s\n", sci(e.err_linf_y).c_str(), sci(e.err_l2_l).c_str());
    if (e.err_h1_y) std::printf("err_h1_y    %s\n", sci(*e.err_h1_y).c_str());
  }
  ensure_dir(out);
  const std::string base = "solve_" + stem(c) + "_L" + std::to_string(mesh->level());
  write_vtk(*mesh, state_fields(r.state, spec), out / (base + ".vtk"));
  write_segments(active_set_boundary(r.state, spec), out / (base + "_active.csv"));
  std::printf("wrote %s.vtk and %s_active.csv in %s\n", base.c_str(), base.c_str(), out.string().c_str());
  return 0;
}

struct PathArgs {
  int level0 = 4;
  double gamma0 = 0.0;  // 0: discretization default
  double kappa = 0.0;
  int levels = 4;
  bool retry = false;
  int max_retries = 1;
  double stop_threshold = 0.0;
};

PathConfig path_config(const Common& c, const PathArgs& p) {
  const bool rt0 = parse_discretization(c.disc) == Discretization::rt0;
  PathConfig cfg;
  cfg.start_level = p.level0;
  cfg.gamma0 = p.gamma0 > 0.0 ? p.gamma0 : (rt0 ? 400.0 : 16.0);
  cfg.kappa = p.kappa > 0.0 ? p.kappa : (rt0 ? 2.0 : 4.0);
  cfg.levels = p.levels;
  cfg.newton = newton_options(c);
  cfg.retry_conservative = p.retry;
  cfg.max_retries = p.max_retries;
  cfg.stop_threshold = p.stop_threshold;
  cfg.split_depth = c.split_depth;
  return cfg;
}

void add_path_options(CLI::App* sub, PathArgs& p) {
  sub->add_option("--level0", p.level0, "first mesh level")->check(CLI::Range(1, 14));
  sub->add_option("--gamma0", p.gamma0, "gamma at the first level (default 400 rt0, 16 p1)")->check(CLI::PositiveNumber);
  sub->add_option("--kappa", p.kappa, "gamma grows by 2^kappa per level (default 2 rt0, 4 p1)")->check(CLI::PositiveNumber);
  sub->add_option("--levels", p.levels, "number of levels")->check(CLI::Range(1, 12));
  sub->add_flag("--retry-conservative", p.retry, "retry a failed level with gamma scaled by 2^(kappa/2)");
  sub->add_option("--max-retries", p.max_retries, "retries per level")->check(CLI::NonNegativeNumber);
  sub->add_option("--stop-threshold", p.stop_threshold, "stop when the relative change of J drops below this")
      ->check(CLI::NonNegativeNumber);
}

int cmd_path(const Common& c, const PathArgs& p, const fs::path& out) {
  const ProblemSpec spec = make_spec(c);
  const PathConfig cfg = path_config(c, p);
  std::printf("path %s %s  level0 %d  gamma0 %s  kappa %s  levels %d%s\n", c.problem.c_str(), c.disc.c_str(),
              cfg.start_level, sci(cfg.gamma0).c_str(), sci(cfg.kappa).c_str(), cfg.levels,
              cfg.retry_conservative ? "  retry-conservative" : "");
  const PathResult path = run_path(spec, cfg, print_level);
  if (path.stopped_by_threshold) std::printf("stopped: relative change of J below %s\n", sci(cfg.stop_threshold).c_str());
  std::printf("max converged gamma %s\n", sci(path.max_converged_gamma()).c_str());

  ensure_dir(out);
  if (c.problem == "ex1" && !path.levels.empty()) {
    EocTable t;
    for (const auto& rec : path.levels) t.rows.push_back(errors_vs_exact(rec, spec, example1_solution(), cfg.split_depth));
    if (path.failure) t.failure = path.failure->message;
    t.compute_eoc();
    std::printf("\n");
    print_eoc_table(t);
    write_eoc_table(t, out / ("path_" + stem(c) + ".csv"));
  } else {
    const fs::path file = out / ("path_" + stem(c) + ".csv");
    std::ofstream csv(file);
    if (!csv) throw ExportError(file, "cannot open for writing");
    csv.precision(17);
    csv << "level,h,gamma,newton_iters,residual,objective,retries,wall_s\n";
    for (const auto& r : path.levels) {
      csv << r.level << ',' << r.h << ',' << r.gamma << ',' << r.report.iterations << ','
          << (r.report.residuals.empty() ? 0.0 : r.report.residuals.back()) << ',' << r.objective << ',' << r.retries
          << ',' << r.wall_s << '\n';
    }
  }
  if (!path.levels.empty()) {
    const LevelRecord& last = path.levels.back();
    write_vtk(*last.mesh(), state_fields(last.state, spec), out / ("path_" + stem(c) + "_final.vtk"));
  }
  if (path.failure) {
    print_failure(*path.failure);
    return 2;
  }
  return 0;
}

int cmd_table(const Common& c, PathArgs p, int reference_level, const fs::path& out) {
  const ProblemSpec spec = make_spec(c);
  const PathConfig cfg = path_config(c, p);
  TableOptions opt;
  if (c.problem == "ex1") opt.exact = example1_solution();
  opt.reference_level = reference_level;
  std::printf("table %s %s  level0 %d  gamma0 %s  kappa %s  levels %d", c.problem.c_str(), c.disc.c_str(),
              cfg.start_level, sci(cfg.gamma0).c_str(), sci(cfg.kappa).c_str(), cfg.levels);
  if (!opt.exact) std::printf("  reference level %d", reference_level > 0 ? reference_level : cfg.start_level + cfg.levels + 1);
  std::printf("\n");
  const TableResult r = run_table(spec, cfg, opt, print_level);
  std::printf("\n");
  print_eoc_table(r.table);
  ensure_dir(out);
  const fs::path file = out / ("table_" + stem(c) + ".csv");
  if (!r.table.rows.empty()) {
    write_eoc_table(r.table, file);
    std::printf("wrote %s\n", file.string().c_str());
  }
  if (r.path.failure) {
    print_failure(*r.path.failure);
    return 2;
  }
  if (r.table.failure) {
    std::printf("table incomplete: %s\n", r.table.failure->c_str());
    return 2;
  }
  return 0;
}

void report_sweep(const Common& c, const SweepResult& r, int level, const fs::path& out) {
  std::printf("\nlevel %d\n", level);
  std::printf("%12s %12s %12s %12s %12s %6s %s\n", "gamma", "err_linf_y", "err_l2_l", "reg_linf_y", "reg_l2_l",
              "newton", "status");
  std::vector<double> g, ry, rl;
  double floor_y = 0.0, floor_l = 0.0;
  for (const auto& rec : r.records) {
    const bool ok = rec.status == NewtonStatus::converged;
    std::printf("%12s %12s %12s %12s %12s %6d %s\n", sci(rec.errors.gamma).c_str(),
                ok ? sci(rec.errors.err_linf_y).c_str() : "", ok ? sci(rec.errors.err_l2_l).c_str() : "",
                ok ? sci(rec.reg_linf_y).c_str() : "", ok ? sci(rec.reg_l2_l).c_str() : "", rec.errors.newton_iters,
                std::string(to_string(rec.status)).c_str());
    if (!ok) continue;
    g.push_back(rec.errors.gamma);
    ry.push_back(rec.reg_linf_y);
    rl.push_back(rec.reg_l2_l);
    floor_y = rec.errors.err_linf_y;
    floor_l = rec.errors.err_l2_l;
  }
  const auto sy = presaturation_slope(g, ry, floor_y), sl = presaturation_slope(g, rl, floor_l);
  std::printf("pre-saturation slope  state %s  control %s\n", sy ? sci(*sy).c_str() : "n/a",
              sl ? sci(*sl).c_str() : "n/a");
  for (const auto& f : r.failures) std::printf("failed: %s\n", f.c_str());
  const fs::path file = out / ("sweep_" + stem(c) + "_L" + std::to_string(level) + ".csv");
  write_sweep(r, file);
  std::printf("wrote %s\n", file.string().c_str());
}

int cmd_sweep(const Common& c, const std::string& level_text, const std::string& gammas_text, int reference_level,
              int threads, const fs::path& out) {
  const ProblemSpec spec = make_spec(c);
  const std::vector<double> gammas = parse_gamma_list(gammas_text);
  const auto [lo, hi] = parse_level_range(level_text);
  std::vector<int> levels;
  for (int k = lo; k <= hi; ++k) levels.push_back(k);
  SweepOptions opt;
  if (c.problem == "ex1") opt.exact = example1_solution();
  opt.reference_level = reference_level;
  opt.newton = newton_options(c);
  opt.split_depth = c.split_depth;
  opt.threads = threads;
  std::printf("sweep %s %s  levels %s  %zu gammas  threads %d\n", c.problem.c_str(), c.disc.c_str(),
              level_text.c_str(), gammas.size(), threads);
  const auto results = gamma_sweeps(spec, levels, gammas, opt);
  ensure_dir(out);
  bool failed = false;
  for (std::size_t i = 0; i < results.size(); ++i) {
    report_sweep(c, results[i], levels[i], out);
    failed = failed || !results[i].failures.empty();
  }
  return failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plate thickness optimization: solves, path following, convergence tables and gamma sweeps"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string config;
  std::string out = "out";
  int threads = 1;
  app.add_option("--config", config, "key=value file; its entries override the same flags on the command line");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "levels swept concurrently")->envname("PLATEOPT_THREADS")->check(CLI::Range(1, 256));

  Common common;
  std::string levels = "4..7";
  auto* conv = app.add_subcommand("poisson-conv", "manufactured Poisson convergence table");
  add_common(conv, common, false);
  conv->add_option("--levels", levels, "level range a..b");

  int level = 5;
  double gamma = 1e4;
  std::string mesh_file;
  auto* solve = app.add_subcommand("solve", "one regularized subproblem with field export");
  add_common(solve, common);
  solve->add_option("--level", level, "uniform mesh level")->check(CLI::Range(1, 14));
  solve->add_option("--gamma", gamma, "regularization parameter")->check(CLI::PositiveNumber);
  solve->add_option("--mesh", mesh_file, "read the mesh from a file instead")->check(CLI::ExistingFile);

  PathArgs path_args;
  auto* path = app.add_subcommand("path", "coupled gamma-h path following");
  add_common(path, common);
  add_path_options(path, path_args);

  PathArgs table_args;
  int reference_level = 0;
  auto* table = app.add_subcommand("table", "error and EOC table along the path");
  add_common(table, common);
  add_path_options(table, table_args);
  table->add_option("--reference-level", reference_level, "reference level without exact solution (default finest + 2)");

  std::string sweep_level = "6";
  std::string gammas = "1e2:1e8:decade";
  int sweep_reference = 0;
  auto* sweep = app.add_subcommand("sweep", "fixed-mesh gamma sweep");
  add_common(sweep, common);
  sweep->add_option("--level", sweep_level, "mesh level or range a..b (levels run concurrently)");
  sweep->add_option("--gammas", gammas, "a:b:decade, a:b:half-decade, a:b:factor or a comma list");
  sweep->add_option("--reference-level", sweep_reference, "reference level without exact solution (default level + 2)");

  // The vector overload of parse takes the arguments in reverse order.
  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    const std::string cfg_path = find_config(argc, argv);
    if (!cfg_path.empty()) {
      std::vector<std::string> extra = config_tokens(cfg_path);
      args.insert(args.begin(), extra.rbegin(), extra.rend());
    }
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  // Per-subcommand defaults for the table run lengths.
  if (table->parsed() && table->count("--levels") == 0 && common.problem == "ex2") table_args.levels = 3;

  try {
    if (conv->parsed()) return cmd_poisson_conv(common, levels, out);
    if (solve->parsed()) return cmd_solve(common, level, gamma, mesh_file, out);
    if (path->parsed()) return cmd_path(common, path_args, out);
    if (table->parsed()) return cmd_table(common, table_args, reference_level, out);
    if (sweep->parsed()) return cmd_sweep(common, sweep_level, gammas, sweep_reference, threads, out);
  } catch (const ExportError& e) {
    std::fprintf(stderr, "error: %s (%s)\n", e.what(), e.path().string().c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
