#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plateopt/kkt.hpp"

namespace plateopt {

struct NewtonOptions {
  double tol = 1e-3;         // on the Euclidean norm of F^gamma
  int max_iterations = 50;
  int max_halvings = 10;
};

enum class NewtonStatus { converged, max_iterations, singular_jacobian, line_search_failed, non_finite };

std::string_view to_string(NewtonStatus s);

struct NewtonReport {
  NewtonStatus status = NewtonStatus::max_iterations;
  int iterations = 0;
  std::vector<double> residuals;  // ||F|| before each step and after the last
  std::vector<int> halvings;      // per accepted step
  std::string message;

  bool converged() const { return status == NewtonStatus::converged; }
};

struct NewtonResult {
  OptState state;
  NewtonReport report;
};

/// Damped semismooth Newton iteration on F^gamma(x) = 0 starting at x0.
/// A step that does not reduce ||F|| is halved up to `max_halvings` times;
/// failures are reported, never thrown.
NewtonResult newton_solve(const KktSystem& system, OptState x0, const NewtonOptions& opt = {});

/// Coarse fields evaluated on the refined mesh: P0 values are copied to the
/// children, P1 values interpolated, RT0 fields included exactly.
P0Field prolong(const P0Field& a, const Prolongation& p);
P1Field prolong(const P1Field& a, const Prolongation& p);
RT0Field prolong(const RT0Field& a, const Prolongation& p);

/// Coarse-to-fine transfer of all state blocks and the cached datum.
/// For RT0 the element values of each mixed pair (y, v) get the
/// mean-preserving correction v(c_T) . (c_child - c_T), since v_h
/// approximates grad y_h; the fluxes are included exactly.
OptState prolong_state(const OptState& x, const Prolongation& prolongation);

struct PathConfig {
  int start_level = 4;
  double gamma0 = 400.0;
  double kappa = 2.0;
  int levels = 4;
  NewtonOptions newton;
  /// On failure, retry the level with gamma scaled by 2^(kappa/2) instead of
  /// 2^kappa (halving the exponent again on each further retry).
  bool retry_conservative = false;
  int max_retries = 1;
  /// Stop when |J_n - J_{n-1}| / |J_{n-1}| falls below this (0 disables).
  double stop_threshold = 0.0;
  int split_depth = 2;
};

struct LevelRecord {
  int level = 0;
  double h = 0.0;
  double gamma = 0.0;
  OptState state;
  NewtonReport report;
  double objective = 0.0;
  double wall_s = 0.0;
  int retries = 0;
  std::shared_ptr<const KktSystem> system;
  /// Transfer from the previous level's mesh (empty at the first level).
  std::optional<Prolongation> from_previous;

  const MeshPtr& mesh() const { return state.mesh; }
};

struct PathFailure {
  int level = 0;
  double gamma = 0.0;
  NewtonReport report;
  std::string message;
};

struct PathResult {
  std::vector<LevelRecord> levels;
  std::optional<PathFailure> failure;
  bool stopped_by_threshold = false;

  bool completed() const { return !failure.has_value(); }
  /// Largest gamma at which a level converged (0 if none).
  double max_converged_gamma() const;
};

using LevelCallback = std::function<void(const LevelRecord&)>;

/// Path following over nested uniform meshes: Newton solve, refine, scale
/// gamma by 2^kappa, warm start from the prolonged iterate.
PathResult run_path(const ProblemSpec& spec, const PathConfig& cfg, const LevelCallback& on_level = {});

}  // namespace plateopt
