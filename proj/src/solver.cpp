#include "plateopt/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/SparseLU>

namespace plateopt {

std::string_view to_string(NewtonStatus s) {
  switch (s) {
    case NewtonStatus::converged: return "converged";
    case NewtonStatus::max_iterations: return "max_iterations";
    case NewtonStatus::singular_jacobian: return "singular_jacobian";
    case NewtonStatus::line_search_failed: return "line_search_failed";
    case NewtonStatus::non_finite: return "non_finite";
  }
  return "unknown";
}

NewtonResult newton_solve(const KktSystem& system, OptState x0, const NewtonOptions& opt) {
  NewtonResult out{system.adopt(std::move(x0)), {}};
  OptState& x = out.state;
  NewtonReport& rep = out.report;

  Eigen::VectorXd r = system.residual(x);
  double norm = r.norm();
  rep.residuals.push_back(norm);

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  for (;;) {
    if (!std::isfinite(norm)) {
      rep.status = NewtonStatus::non_finite;
      rep.message = "residual is not finite";
      break;
    }
    if (norm <= opt.tol) {
      rep.status = NewtonStatus::converged;
      break;
    }
    if (rep.iterations >= opt.max_iterations) {
      rep.status = NewtonStatus::max_iterations;
      rep.message = "no convergence after " + std::to_string(rep.iterations) + " iterations";
      break;
    }
    const SparseMatrix J = system.jacobian(x);
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) {
      rep.status = NewtonStatus::singular_jacobian;
      rep.message = "factorization failed at iteration " + std::to_string(rep.iterations) + ": " + lu.lastErrorMessage();
      break;
    }
    const Eigen::VectorXd d = lu.solve(-r);
    if (lu.info() != Eigen::Success || !d.allFinite()) {
      rep.status = NewtonStatus::singular_jacobian;
      rep.message = "Newton direction is not finite at iteration " + std::to_string(rep.iterations);
      break;
    }

    double step = 1.0;
    int halvings = 0;
    bool accepted = false;
    OptState trial = x;
    for (;;) {
      trial.x = x.x + step * d;
      Eigen::VectorXd rt = system.residual(trial);
      const double nt = rt.norm();
      if (std::isfinite(nt) && nt < norm) {
        x.x = std::move(trial.x);
        r = std::move(rt);
        norm = nt;
        accepted = true;
        break;
      }
      if (halvings == opt.max_halvings) break;
      step *= 0.5;
      ++halvings;
    }
    if (!accepted) {
      rep.status = NewtonStatus::line_search_failed;
      rep.message = "no residual decrease after " + std::to_string(opt.max_halvings) + " halvings at iteration " +
                    std::to_string(rep.iterations);
      break;
    }
    ++rep.iterations;
    rep.halvings.push_back(halvings);
    rep.residuals.push_back(norm);
  }
  return out;
}

namespace {

Eigen::VectorXd prolong_p0(const Eigen::VectorXd& v, const Prolongation& p) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(p.parent.size()));
  for (std::size_t t = 0; t < p.parent.size(); ++t) out[t] = v[p.parent[t]];
  return out;
}

Eigen::VectorXd prolong_p1(const Eigen::VectorXd& v, const Prolongation& p) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(p.embedding.size()));
  for (std::size_t i = 0; i < p.embedding.size(); ++i) {
    const auto& emb = p.embedding[i];
    const auto& tri = p.coarse->triangle(emb.triangle);
    out[i] = emb.bary[0] * v[tri[0]] + emb.bary[1] * v[tri[1]] + emb.bary[2] * v[tri[2]];
  }
  return out;
}

Eigen::VectorXd prolong_rt0(const Eigen::VectorXd& flux, const Prolongation& p) {
  const RT0Field coarse(p.coarse, flux);
  const Mesh& fine = *p.fine;
  Eigen::VectorXd out(fine.num_edges());
  for (int e = 0; e < fine.num_edges(); ++e) {
    // The coarse field is affine on the parent, so the midpoint rule is exact.
    const int parent = p.parent[fine.edge(e).triangles[0]];
    out[e] = fine.edge_length(e) * coarse.eval(parent, fine.edge_midpoint(e)).dot(fine.edge_normal(e));
  }
  return out;
}

Eigen::VectorXd prolong_mixed_scalar(const Eigen::VectorXd& y, const Eigen::VectorXd& flux, const Prolongation& p) {
  const RT0Field v(p.coarse, flux);
  Eigen::VectorXd out = prolong_p0(y, p);
  for (std::size_t t = 0; t < p.parent.size(); ++t) {
    const int parent = p.parent[t];
    const Point c = p.coarse->centroid(parent);
    out[t] += v.eval(parent, c).dot(p.fine->centroid(static_cast<int>(t)) - c);
  }
  return out;
}

void check_transfer(const MeshPtr& m, const Prolongation& p, const char* what) {
  require_same_mesh(m, p.coarse, what);
}

}  // namespace

P0Field prolong(const P0Field& a, const Prolongation& p) {
  check_transfer(a.mesh, p, "prolong(P0Field)");
  return P0Field(p.fine, prolong_p0(a.values, p));
}

P1Field prolong(const P1Field& a, const Prolongation& p) {
  check_transfer(a.mesh, p, "prolong(P1Field)");
  return P1Field(p.fine, prolong_p1(a.values, p));
}

RT0Field prolong(const RT0Field& a, const Prolongation& p) {
  check_transfer(a.mesh, p, "prolong(RT0Field)");
  return RT0Field(p.fine, prolong_rt0(a.flux, p));
}

OptState prolong_state(const OptState& x, const Prolongation& p) {
  check_transfer(x.mesh, p, "prolong_state");
  if (x.x.size() != state_size(x.discretization, *x.mesh)) {
    throw std::invalid_argument("prolong_state: state vector does not match its mesh");
  }
  const Mesh& c = *p.coarse;
  const Mesh& f = *p.fine;
  OptState out{x.discretization, p.fine, x.gamma, Eigen::VectorXd(state_size(x.discretization, f)), {}};
  if (x.discretization == Discretization::rt0) {
    const int E = c.num_edges(), T = c.num_triangles();
    const Eigen::VectorXd v = x.x.segment(0, E);
    const Eigen::VectorXd vq = x.x.segment(E + T, E);
    out.x << prolong_rt0(v, p), prolong_mixed_scalar(x.x.segment(E, T), v, p), prolong_rt0(vq, p),
        prolong_mixed_scalar(x.x.segment(2 * E + T, T), vq, p);
    if (x.datum.size() == T) out.datum = prolong_p0(x.datum, p);
  } else {
    const int Nc = c.num_interior_vertices();
    const int Nf = f.num_interior_vertices();
    const P1Field y = P1Field::from_interior(p.coarse, x.x.head(Nc));
    const P1Field q = P1Field::from_interior(p.coarse, x.x.tail(Nc));
    out.x.head(Nf) = P1Field(p.fine, prolong_p1(y.values, p)).interior_values();
    out.x.tail(Nf) = P1Field(p.fine, prolong_p1(q.values, p)).interior_values();
    if (x.datum.size() == c.num_vertices()) out.datum = prolong_p1(x.datum, p);
  }
  return out;
}

double PathResult::max_converged_gamma() const {
  double g = 0.0;
  for (const auto& l : levels) {
    if (l.report.converged()) g = std::max(g, l.gamma);
  }
  return g;
}

PathResult run_path(const ProblemSpec& spec, const PathConfig& cfg, const LevelCallback& on_level) {
  spec.validate();
  if (cfg.levels < 1) throw std::invalid_argument("run_path: levels must be >= 1");
  if (!(cfg.gamma0 > 0.0)) throw std::invalid_argument("run_path: gamma0 must be > 0");
  if (!(cfg.kappa > 0.0)) throw std::invalid_argument("run_path: kappa must be > 0");

  using clock = std::chrono::steady_clock;
  PathResult result;
  MeshPtr mesh = build_uniform(cfg.start_level);
  std::optional<Prolongation> transfer;
  OptState previous;
  double previous_gamma = 0.0;

  for (int n = 0; n < cfg.levels; ++n) {
    const auto t0 = clock::now();
    if (n > 0) {
      Refinement ref = refine(mesh);
      mesh = ref.mesh;
      transfer = std::move(ref.prolongation);
    }
    std::shared_ptr<const KktSystem> system = make_kkt_system(spec, mesh, cfg.split_depth);
    const OptState start = n == 0 ? system->zero_state(cfg.gamma0) : prolong_state(previous, *transfer);

    double gamma = n == 0 ? cfg.gamma0 : previous_gamma * std::pow(2.0, cfg.kappa);
    int retries = 0;
    NewtonResult solved;
    for (;;) {
      OptState x0 = start;
      x0.gamma = gamma;
      solved = newton_solve(*system, std::move(x0), cfg.newton);
      if (solved.report.converged()) break;
      if (!(cfg.retry_conservative && n > 0 && retries < cfg.max_retries)) break;
      ++retries;
      gamma = previous_gamma * std::pow(2.0, cfg.kappa / std::pow(2.0, retries));
    }

    if (!solved.report.converged()) {
      PathFailure f;
      f.level = mesh->level();
      f.gamma = gamma;
      f.report = solved.report;
      f.message = "Newton failed (" + std::string(to_string(solved.report.status)) + ") at level " +
                  std::to_string(mesh->level()) + ", gamma " + std::to_string(gamma) +
                  (solved.report.message.empty() ? "" : ": " + solved.report.message);
      result.failure = std::move(f);
      break;
    }

    LevelRecord rec;
    rec.level = mesh->level();
    rec.h = mesh->h();
    rec.gamma = gamma;
    rec.objective = system->objective(solved.state);
    rec.state = std::move(solved.state);
    rec.report = std::move(solved.report);
    rec.retries = retries;
    rec.system = system;
    rec.from_previous = transfer;
    rec.wall_s = std::chrono::duration<double>(clock::now() - t0).count();
    if (on_level) on_level(rec);

    previous = rec.state;
    previous_gamma = gamma;
    const double j = rec.objective;
    const bool have_prev = !result.levels.empty();
    const double j_prev = have_prev ? result.levels.back().objective : 0.0;
    result.levels.push_back(std::move(rec));
    if (cfg.stop_threshold > 0.0 && have_prev && std::abs(j - j_prev) <= cfg.stop_threshold * std::abs(j_prev)) {
      result.stopped_by_threshold = true;
      break;
    }
  }
  return result;
}

}  // namespace plateopt
