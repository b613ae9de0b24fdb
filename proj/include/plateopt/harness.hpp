#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plateopt/solver.hpp"

namespace plateopt {

/// EOC_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1}).
/// Throws std::invalid_argument for non-positive errors or non-decreasing h.
std::vector<double> compute_eoc(const std::vector<std::pair<double, double>>& h_and_error);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ExactSolution {
  ScalarFunction state;
  VectorFunction state_gradient;
  ScalarFunction control;
};

ExactSolution example1_solution();

struct ErrorRecord {
  int level = 0;
  double h = 0.0;
  double gamma = 0.0;
  Discretization discretization = Discretization::rt0;
  double err_linf_y = 0.0;
  double err_l2_l = 0.0;
  std::optional<double> err_h1_y;  // P1 only
  int newton_iters = 0;
  double wall_s = 0.0;
};

struct EocTable {
  std::vector<ErrorRecord> rows;
  std::vector<double> eoc_y;   // L-infinity state
  std::vector<double> eoc_l;   // L2 control
  std::vector<double> eoc_h1;  // H1 state (P1)
  std::optional<std::string> failure;

  /// Recomputes the EOC columns from the rows.
  void compute_eoc();
};

/// Errors of one converged level against a closed-form solution.
ErrorRecord errors_vs_exact(const LevelRecord& rec, const ProblemSpec& spec, const ExactSolution& exact,
                            int split_depth = 2);

/// Errors of path level `coarse` against path level `fine` of the same run,
/// evaluating the coarse solution on the fine mesh through the chain of
/// prolongations.
ErrorRecord errors_vs_reference(const PathResult& path, std::size_t coarse, std::size_t fine,
                                const ProblemSpec& spec, int split_depth = 2);

struct TableOptions {
  std::optional<ExactSolution> exact;
  /// Level of the reference solution when no exact solution is given;
  /// 0 selects two levels above the finest tabulated one.
  int reference_level = 0;
};

struct TableResult {
  EocTable table;
  PathResult path;
};

/// Runs the coupled path and tabulates errors of every level. Without an
/// exact solution the path is continued to the reference level, which is not
/// tabulated itself.
TableResult run_table(const ProblemSpec& spec, const PathConfig& cfg, const TableOptions& opt,
                      const LevelCallback& on_level = {});

struct SweepRecord {
  ErrorRecord errors;
  /// Same-mesh distance to the solution at the largest gamma of the sweep.
  double reg_linf_y = 0.0;
  double reg_l2_l = 0.0;
  NewtonStatus status = NewtonStatus::converged;
};

struct SweepOptions {
  std::optional<ExactSolution> exact;
  /// Reference for problems without an exact solution: a path started at the
  /// sweep level with the largest gamma, continued to this level (0: level + 2).
  int reference_level = 0;
  double reference_kappa = 2.0;
  NewtonOptions newton;
  int split_depth = 2;
  /// Levels swept concurrently by gamma_sweeps.
  int threads = 1;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<std::string> failures;
};

/// Solves at fixed mesh for increasing gammas, warm starting each solve from
/// the previous one. A failed gamma is recorded and the sweep continues.
SweepResult gamma_sweep(const ProblemSpec& spec, int level, const std::vector<double>& gammas,
                        const SweepOptions& opt = {});

/// One gamma_sweep per level, up to `opt.threads` levels at a time.
std::vector<SweepResult> gamma_sweeps(const ProblemSpec& spec, const std::vector<int>& levels,
                                      const std::vector<double>& gammas, const SweepOptions& opt = {});

/// Slope of a regularization error against gamma over the points where that
/// error is at least `fraction` of `floor` (the discretization error), which
/// excludes the saturated tail. Returns nullopt with fewer than two points.
std::optional<double> presaturation_slope(const std::vector<double>& gammas, const std::vector<double>& reg_errors,
                                          double floor, double fraction = 0.1);

struct PoissonConvRow {
  int level = 0;
  double h = 0.0;
  double err_l2 = 0.0;     // scalar
  double err_h1 = 0.0;     // P1: H1 seminorm; RT0: L2 of the flux
  double err_linf = 0.0;
  /// RT0: max over T of |∫_T div v_h + ∫_T g|; 0 for P1.
  double conservation = 0.0;
};

/// Manufactured sin(pi x1) sin(pi x2) Poisson solves on build_uniform(level).
std::vector<PoissonConvRow> poisson_convergence(Discretization d, int first_level, int last_level);

/// "a:b:decade" style gamma lists; also accepts comma-separated values.
std::vector<double> parse_gamma_list(const std::string& text);

/// Parses "a..b" or a single level.
std::pair<int, int> parse_level_range(const std::string& text);

}  // namespace plateopt
