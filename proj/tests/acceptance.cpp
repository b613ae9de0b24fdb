// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "plateopt/benchmarks.hpp"
#include "plateopt/export.hpp"
#include "plateopt/harness.hpp"
#include "support.hpp"

using namespace plateopt;

namespace {

using clock_type = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& run) {
  const auto t0 = clock_type::now();
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double wall = std::chrono::duration<double>(clock_type::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), wall);
  std::fflush(stdout);
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::string list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + sci(v[i]);
  return s;
}

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// Results shared between criteria so that every path is run once.
PathConfig ex1_rt0_config() {
  PathConfig cfg;
  cfg.start_level = 4;
  cfg.gamma0 = 400.0;
  cfg.kappa = 2.0;
  cfg.levels = 4;
  return cfg;
}

std::optional<TableResult> table_ex1;
double table_ex1_wall = 0.0;
std::optional<TableResult> table_ex2_p1, table_ex2_rt0;
double table_ex2_wall = 0.0;
std::optional<PathResult> aggressive, aggressive_retry;

const TableResult& ex1_table() {
  if (!table_ex1) {
    const auto t0 = clock_type::now();
    TableOptions opt;
    opt.exact = example1_solution();
    table_ex1 = run_table(example1_spec(), ex1_rt0_config(), opt);
    table_ex1_wall = seconds_since(t0);
  }
  return *table_ex1;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = clock_type::now();
  const auto rt0 = poisson_convergence(Discretization::rt0, 4, 7);
  const auto p1 = poisson_convergence(Discretization::p1, 4, 7);
  std::vector<std::pair<double, double>> r_l2, p_l2, p_h1;
  double cons = 0.0;
  for (const auto& r : rt0) {
    r_l2.emplace_back(r.h, r.err_l2);
    cons = std::max(cons, r.conservation);
  }
  for (const auto& r : p1) {
    p_l2.emplace_back(r.h, r.err_l2);
    p_h1.emplace_back(r.h, r.err_h1);
  }
  const auto e_r = compute_eoc(r_l2), e_pl2 = compute_eoc(p_l2), e_ph1 = compute_eoc(p_h1);
  const double wall = seconds_since(t0);
  bool ok = cons <= 1e-10 && wall <= 60.0;
  for (double e : e_r) ok = ok && within(e, 0.85, 1.15);
  for (double e : e_pl2) ok = ok && within(e, 1.8, 2.2);
  for (double e : e_ph1) ok = ok && within(e, 0.85, 1.15);
  std::ostringstream d;
  d << "RT0 L2 EOC [" << list(e_r) << "] in [0.85,1.15]; P1 L2 EOC [" << list(e_pl2) << "] in [1.8,2.2]; P1 H1 EOC ["
    << list(e_ph1) << "] in [0.85,1.15]; max conservation residual " << sci(cons) << " <= 1e-10";
  return {ok, d.str()};
}

Outcome criterion2() {
  const TableResult& t = ex1_table();
  if (t.table.failure) return {false, "path failed: " + *t.table.failure};
  const double ref_y[3] = {3.45e-2, 1.74e-2, 8.80e-3};
  const double ref_l[3] = {5.66e-1, 3.32e-1, 1.82e-1};
  bool ok = table_ex1_wall <= 300.0;
  std::ostringstream d;
  std::vector<double> ey, el, hs;
  for (int i = 0; i < 3; ++i) {
    const ErrorRecord& r = t.table.rows.at(static_cast<std::size_t>(i + 1));
    ok = ok && r.level == 5 + i;
    ok = ok && within(r.err_linf_y, 0.75 * ref_y[i], 1.25 * ref_y[i]) && within(r.err_l2_l, 0.75 * ref_l[i], 1.25 * ref_l[i]);
    ey.push_back(r.err_linf_y);
    el.push_back(r.err_l2_l);
    hs.push_back(r.h);
  }
  std::vector<std::pair<double, double>> py, pl;
  for (int i = 0; i < 3; ++i) {
    py.emplace_back(hs[i], ey[i]);
    pl.emplace_back(hs[i], el[i]);
  }
  const auto eoc_y = compute_eoc(py), eoc_l = compute_eoc(pl);
  for (double e : eoc_y) ok = ok && within(e, 0.9, 1.1);
  for (double e : eoc_l) ok = ok && within(e, 0.65, 1.05);
  d << "levels 5-7 L-inf y [" << list(ey) << "] vs (3.45e-2 1.74e-2 8.80e-3) +-25%; L2 l [" << list(el)
    << "] vs (5.66e-1 3.32e-1 1.82e-1) +-25%; EOC_y [" << list(eoc_y) << "] in [0.9,1.1]; EOC_l [" << list(eoc_l)
    << "] in [0.65,1.05]; path wall " << sci(table_ex1_wall) << " s <= 300";
  return {ok, d.str()};
}

Outcome criterion3() {
  const TableResult& t = ex1_table();
  bool ok = !t.path.failure && t.path.levels.size() == 4;
  std::ostringstream d;
  d << "Newton iterations by level:";
  for (const auto& rec : t.path.levels) {
    d << " h" << rec.level << "=" << rec.report.iterations;
    if (rec.level >= 5) ok = ok && rec.report.iterations <= 5;
  }
  d << " (levels 5-7 must be <= 5)";
  return {ok, d.str()};
}

Outcome criterion4() {
  const auto t0 = clock_type::now();
  SweepOptions opt;
  opt.exact = example1_solution();
  const std::vector<double> gammas = parse_gamma_list("1e2:1e8:decade");
  const SweepResult s = gamma_sweep(example1_spec(), 6, gammas, opt);
  const double wall = seconds_since(t0);
  std::vector<double> g, ry, rl;
  double floor_y = 0.0, floor_l = 0.0;
  for (const auto& r : s.records) {
    if (r.status != NewtonStatus::converged) continue;
    g.push_back(r.errors.gamma);
    ry.push_back(r.reg_linf_y);
    rl.push_back(r.reg_l2_l);
    floor_y = r.errors.err_linf_y;
    floor_l = r.errors.err_l2_l;
  }
  const auto sy = presaturation_slope(g, ry, floor_y), sl = presaturation_slope(g, rl, floor_l);
  const bool ok = s.failures.empty() && sy && sl && within(*sy, -1.3, -0.7) && within(*sl, -0.65, -0.2) && wall <= 600.0;
  std::ostringstream d;
  d << "level 6, gamma 1e2..1e8: state slope " << (sy ? sci(*sy) : "n/a") << " in [-1.3,-0.7], control slope "
    << (sl ? sci(*sl) : "n/a") << " in [-0.65,-0.2]; regularization errors y [" << list(ry) << "], l [" << list(rl)
    << "]; floors " << sci(floor_y) << ", " << sci(floor_l) << "; failed gammas " << s.failures.size();
  return {ok, d.str()};
}

Outcome criterion5() {
  std::ostringstream d;
  bool ok = true;
  for (const auto disc : {Discretization::rt0, Discretization::p1}) {
    const auto sys = make_kkt_system(example1_spec(disc), build_uniform(4));
    std::mt19937 rng(disc == Discretization::rt0 ? 101 : 202);
    std::uniform_real_distribution<double> lg(1.0, 6.0);
    int stable = 0, tried = 0;
    double worst = 0.0;
    while (stable < 20 && tried < 500) {
      ++tried;
      const OptState x = testing::random_state(*sys, rng, std::pow(10.0, lg(rng)));
      const auto r = testing::fd_check(*sys, x, rng, 1e-6);
      if (!r.stable) continue;
      ++stable;
      worst = std::max(worst, r.rel_error);
    }
    ok = ok && stable == 20 && worst <= 1e-5;
    d << to_string(disc) << ": " << stable << " stable states, max relative error " << sci(worst) << "; ";
  }
  d << "eps 1e-6, bound 1e-5";
  return {ok, d.str()};
}

// Pointwise feasibility of one converged state; returns the violation
// ||(y + tau)^-||_inf.
double check_feasible(const OptState& s, const ProblemSpec& spec, bool& ok, std::string& why) {
  const double lmin = spec.control_min(), lmax = spec.control_max();
  auto control_ok = [&](double l) {
    const double u = std::pow(l, -1.0 / 3.0);
    // bounds are exact; u within rounding of the cube root
    if (!(l >= lmin && l <= lmax)) {
      ok = false;
      why = "control " + sci(l) + " outside bounds";
    }
    if (!(u >= spec.thickness_min * (1 - 1e-14) && u <= spec.thickness_max * (1 + 1e-14))) {
      ok = false;
      why = "thickness " + sci(u) + " outside bounds";
    }
  };
  auto multiplier_ok = [&](double y) {
    const double nu = moreau_yosida(y, s.gamma, spec.state_offset);
    if (!(nu <= 0.0 && nu * (y + spec.state_offset) >= 0.0)) {
      ok = false;
      why = "multiplier sign";
    }
  };
  double violation = 0.0;
  const Mesh& m = *s.mesh;
  if (s.discretization == Discretization::rt0) {
    const P0Field l = recover_control(rt0::adjoint(s), rt0::datum(s), spec);
    const P0Field y = rt0::state(s);
    for (int t = 0; t < m.num_triangles(); ++t) {
      control_ok(l(t));
      multiplier_ok(y(t));
      violation = std::max(violation, std::max(0.0, -(y(t) + spec.state_offset)));
    }
  } else {
    const ControlFunction l(p1::adjoint(s), p1::datum(s), spec);
    const P1Field y = p1::state(s);
    const auto rule = subdivided_gauss3(2);
    for (int t = 0; t < m.num_triangles(); ++t) {
      for (const auto& qp : rule) {
        control_ok(l.eval(t, qp.bary));
        multiplier_ok(y.eval(t, qp.bary));
      }
      for (const auto& b : linf_samples()) {
        control_ok(l.eval(t, b));
        multiplier_ok(y.eval(t, b));
      }
    }
    for (int v = 0; v < m.num_vertices(); ++v) violation = std::max(violation, std::max(0.0, -(y.values[v] + spec.state_offset)));
  }
  return violation;
}

const PathResult& ex2_path(Discretization d);

Outcome criterion6() {
  std::ostringstream d;
  bool ok = true;
  std::string why;
  int solves = 0;
  auto path_check = [&](const char* name, const PathResult& path, const ProblemSpec& spec) {
    std::vector<double> v;
    for (const auto& rec : path.levels) {
      v.push_back(check_feasible(rec.state, spec, ok, why));
      ++solves;
    }
    bool mono = true;
    for (std::size_t i = 1; i < v.size(); ++i) mono = mono && v[i] <= 1.05 * v[i - 1];
    ok = ok && mono;
    d << name << " violation [" << list(v) << "]" << (mono ? "" : " NOT nonincreasing") << "; ";
  };
  path_check("ex1/rt0", ex1_table().path, example1_spec());
  path_check("ex2/p1", ex2_path(Discretization::p1), example2_spec(Discretization::p1));
  path_check("ex2/rt0", ex2_path(Discretization::rt0), example2_spec(Discretization::rt0));
  d << solves << " converged solves checked for l in [M^-3, m^-3], u in [m, M], nu <= 0, nu (y + tau) >= 0";
  if (!why.empty()) d << "; first violation: " << why;
  return {ok, d.str()};
}

const PathResult& ex2_path(Discretization disc) {
  auto& slot = disc == Discretization::p1 ? table_ex2_p1 : table_ex2_rt0;
  if (!slot) {
    const auto t0 = clock_type::now();
    PathConfig cfg;
    cfg.start_level = 4;
    cfg.levels = 3;
    cfg.gamma0 = disc == Discretization::p1 ? 16.0 : 400.0;
    cfg.kappa = disc == Discretization::p1 ? 4.0 : 2.0;
    TableOptions opt;
    opt.reference_level = 8;
    slot = run_table(example2_spec(disc), cfg, opt);
    table_ex2_wall += seconds_since(t0);
  }
  return slot->path;
}

Outcome criterion7() {
  ex2_path(Discretization::p1);
  ex2_path(Discretization::rt0);
  const TableResult& p1 = *table_ex2_p1;
  const TableResult& rt0 = *table_ex2_rt0;
  bool ok = p1.path.completed() && rt0.path.completed() && !p1.table.failure && !rt0.table.failure &&
            p1.table.rows.size() == 3 && table_ex2_wall <= 900.0;
  std::vector<double> el;
  for (const auto& r : p1.table.rows) el.push_back(r.err_l2_l);
  for (std::size_t i = 1; i < el.size(); ++i) ok = ok && el[i] < el[i - 1];
  const double last = p1.table.eoc_l.empty() ? 0.0 : p1.table.eoc_l.back();
  ok = ok && last >= 0.6;
  std::vector<double> erl;
  for (const auto& r : rt0.table.rows) erl.push_back(r.err_l2_l);
  std::ostringstream d;
  d << "P1 levels 4-6 vs level 8: L2 l errors [" << list(el) << "], EOC_l [" << list(p1.table.eoc_l) << "], last >= 0.6; "
    << "RT0 path to level 8 " << (rt0.path.completed() ? "completed" : "FAILED") << " (L2 l errors [" << list(erl)
    << "]); P1 path " << (p1.path.completed() ? "completed" : "FAILED") << "; wall " << sci(table_ex2_wall) << " s <= 900";
  return {ok, d.str()};
}

Outcome criterion8() {
  PathConfig cfg;
  cfg.start_level = 4;
  cfg.levels = 4;
  cfg.gamma0 = 16.0;
  cfg.kappa = 8.0;
  aggressive = run_path(example1_spec(Discretization::p1), cfg);
  cfg.retry_conservative = true;
  aggressive_retry = run_path(example1_spec(Discretization::p1), cfg);
  const PathResult& a = *aggressive;
  const PathResult& b = *aggressive_retry;
  std::ostringstream d;
  bool ok = a.failure.has_value() && !a.failure->report.converged() && !a.failure->message.empty();
  if (a.failure) {
    d << "kappa 8, gamma4 16: failed at level " << a.failure->level << ", gamma " << sci(a.failure->gamma) << " ("
      << to_string(a.failure->report.status) << " after " << a.failure->report.iterations << " iterations); ";
  } else {
    d << "kappa 8 path did not fail; ";
  }
  const double ga = a.max_converged_gamma(), gb = b.max_converged_gamma();
  ok = ok && gb > ga;
  d << "max converged gamma " << sci(ga) << " without retry, " << sci(gb) << " with conservative retry";
  if (b.failure) d << " (retry run stopped at level " << b.failure->level << ")";
  return {ok, d.str()};
}

Outcome criterion9() {
  const TableResult& t = ex1_table();
  const LevelRecord* rec = nullptr;
  for (const auto& r : t.path.levels) {
    if (r.level == 5) rec = &r;
  }
  if (!rec) return {false, "level 5 not reached"};
  const Mesh& m = *rec->mesh();
  const OptState& s = rec->state;
  auto key = [](const Point& p) { return std::pair{std::lround(p.x() * 1e9), std::lround(p.y() * 1e9)}; };
  std::map<std::pair<long, long>, int> tri, edge;
  for (int t = 0; t < m.num_triangles(); ++t) tri[key(m.centroid(t))] = t;
  for (int e = 0; e < m.num_edges(); ++e) edge[key(m.edge_midpoint(e))] = e;
  auto swap = [](const Point& p) { return Point(p.y(), p.x()); };
  const int E = m.num_edges(), T = m.num_triangles(), n = E + T;
  const ProblemSpec spec = example1_spec();
  const P0Field l = recover_control(rt0::adjoint(s), rt0::datum(s), spec);
  double dy = 0.0, dq = 0.0, dv = 0.0, dl = 0.0;
  for (int t = 0; t < T; ++t) {
    const int r = tri.at(key(swap(m.centroid(t))));
    dy = std::max(dy, std::abs(s.x[E + t] - s.x[E + r]));
    dq = std::max(dq, std::abs(s.x[n + E + t] - s.x[n + E + r]));
    dl = std::max(dl, std::abs(l(t) - l(r)));
  }
  for (int e = 0; e < E; ++e) {
    const int r = edge.at(key(swap(m.edge_midpoint(e))));
    const double sign = swap(m.edge_normal(r)).dot(m.edge_normal(e));
    dv = std::max(dv, std::abs(s.x[r] - sign * s.x[e]));
    dv = std::max(dv, std::abs(s.x[n + r] - sign * s.x[n + e]));
  }
  const double tol = 10.0 * 1e-3;
  const bool ok = dy <= tol && dq <= tol && dv <= tol && dl <= tol;
  std::ostringstream d;
  d << "level 5, gamma " << sci(rec->gamma) << ": max |y - y o R| " << sci(dy) << ", |q - q o R| " << sci(dq)
    << ", fluxes " << sci(dv) << ", control " << sci(dl) << " (bound 10 x tol = 1e-2)";
  return {ok, d.str()};
}

}  // namespace

int main() {
  report(1, "FEM convergence", criterion1);
  report(2, "Example 1 error table", criterion2);
  report(3, "mesh independence", criterion3);
  report(4, "gamma-sweep slopes", criterion4);
  report(5, "Jacobian correctness", criterion5);
  report(6, "feasibility invariants", criterion6);
  report(7, "Example 2 self-convergence", criterion7);
  report(8, "failure-mode fidelity", criterion8);
  report(9, "symmetry", criterion9);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures;
}
