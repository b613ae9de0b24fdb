#include "plateopt/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

#include "plateopt/benchmarks.hpp"
#include "plateopt/poisson_rt0.hpp"

namespace plateopt {

std::vector<double> compute_eoc(const std::vector<std::pair<double, double>>& he) {
  std::vector<double> out;
  for (std::size_t i = 0; i < he.size(); ++i) {
    if (!(he[i].second > 0.0)) throw std::invalid_argument("compute_eoc: errors must be positive");
    if (!(he[i].first > 0.0)) throw std::invalid_argument("compute_eoc: mesh sizes must be positive");
    if (i == 0) continue;
    if (!(he[i].first < he[i - 1].first)) throw std::invalid_argument("compute_eoc: h must be strictly decreasing");
    out.push_back(std::log(he[i - 1].second / he[i].second) / std::log(he[i - 1].first / he[i].first));
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ExactSolution example1_solution() {
  return {example1::state, example1::state_gradient, example1::control};
}

void EocTable::compute_eoc() {
  eoc_y.clear();
  eoc_l.clear();
  eoc_h1.clear();
  std::vector<std::pair<double, double>> y, l, h1;
  for (const auto& r : rows) {
    y.emplace_back(r.h, r.err_linf_y);
    l.emplace_back(r.h, r.err_l2_l);
    if (r.err_h1_y) h1.emplace_back(r.h, *r.err_h1_y);
  }
  eoc_y = plateopt::compute_eoc(y);
  eoc_l = plateopt::compute_eoc(l);
  if (h1.size() == rows.size()) eoc_h1 = plateopt::compute_eoc(h1);
}

namespace {

ErrorRecord header(const OptState& s) {
  ErrorRecord r;
  r.level = s.mesh->level();
  r.h = s.mesh->h();
  r.gamma = s.gamma;
  r.discretization = s.discretization;
  return r;
}

ErrorRecord exact_errors(const OptState& s, const ProblemSpec& spec, const ExactSolution& exact, int depth) {
  ErrorRecord r = header(s);
  const Mesh& m = *s.mesh;
  double l2 = 0.0;
  if (s.discretization == Discretization::rt0) {
    const P0Field y = rt0::state(s);
    const P0Field l = recover_control(rt0::adjoint(s), rt0::datum(s), spec);
    double linf = 0.0;
    for (int t = 0; t < m.num_triangles(); ++t) {
      for (const auto& b : linf_samples()) linf = std::max(linf, std::abs(exact.state(m.map(t, b)) - y(t)));
      for (const auto& qp : gauss3()) {
        const double d = exact.control(m.map(t, qp.bary)) - l(t);
        l2 += qp.weight * m.area(t) * d * d;
      }
    }
    r.err_linf_y = linf;
  } else {
    const P1Field y = p1::state(s);
    const P1Errors e = p1_norms(y, exact.state, exact.state_gradient);
    r.err_linf_y = e.linf;
    r.err_h1_y = e.h1();
    const ControlFunction l(p1::adjoint(s), p1::datum(s), spec);
    const auto rule = subdivided_gauss3(depth);
    for (int t = 0; t < m.num_triangles(); ++t) {
      for (const auto& qp : rule) {
        const double d = exact.control(m.map(t, qp.bary)) - l.eval(t, qp.bary);
        l2 += qp.weight * m.area(t) * d * d;
      }
    }
  }
  r.err_l2_l = std::sqrt(l2);
  return r;
}

// Errors of `coarse` against `fine`; ancestor[t] is the coarse triangle that
// contains fine triangle t.
ErrorRecord cross_errors(const OptState& coarse, const OptState& fine, const std::vector<int>& ancestor,
                         const ProblemSpec& spec, int depth) {
  ErrorRecord r = header(coarse);
  const Mesh& mc = *coarse.mesh;
  const Mesh& mf = *fine.mesh;
  double l2 = 0.0, linf = 0.0;
  if (coarse.discretization == Discretization::rt0) {
    const P0Field yc = rt0::state(coarse), yf = rt0::state(fine);
    const P0Field lc = recover_control(rt0::adjoint(coarse), rt0::datum(coarse), spec);
    const P0Field lf = recover_control(rt0::adjoint(fine), rt0::datum(fine), spec);
    for (int t = 0; t < mf.num_triangles(); ++t) {
      const int a = ancestor[t];
      linf = std::max(linf, std::abs(yf(t) - yc(a)));
      l2 += mf.area(t) * std::pow(lf(t) - lc(a), 2);
    }
  } else {
    const P1Field yc = p1::state(coarse), yf = p1::state(fine);
    const ControlFunction lc(p1::adjoint(coarse), p1::datum(coarse), spec);
    const ControlFunction lf(p1::adjoint(fine), p1::datum(fine), spec);
    const auto rule = subdivided_gauss3(depth);
    double y2 = 0.0, g2 = 0.0;
    for (int t = 0; t < mf.num_triangles(); ++t) {
      const int a = ancestor[t];
      const double area = mf.area(t);
      for (const auto& b : linf_samples()) {
        const Eigen::Vector3d cb = mc.barycentric(a, mf.map(t, b));
        linf = std::max(linf, std::abs(yf.eval(t, b) - yc.eval(a, cb)));
      }
      for (const auto& qp : gauss3()) {
        const Eigen::Vector3d cb = mc.barycentric(a, mf.map(t, qp.bary));
        y2 += qp.weight * area * std::pow(yf.eval(t, qp.bary) - yc.eval(a, cb), 2);
      }
      g2 += area * (yf.gradient(t) - yc.gradient(a)).squaredNorm();
      for (const auto& qp : rule) {
        const Eigen::Vector3d cb = mc.barycentric(a, mf.map(t, qp.bary));
        l2 += qp.weight * area * std::pow(lf.eval(t, qp.bary) - lc.eval(a, cb), 2);
      }
    }
    r.err_h1_y = std::sqrt(y2 + g2);
  }
  r.err_linf_y = linf;
  r.err_l2_l = std::sqrt(l2);
  return r;
}

std::vector<int> ancestors(const PathResult& path, std::size_t coarse, std::size_t fine) {
  std::vector<int> anc(static_cast<std::size_t>(path.levels[fine].mesh()->num_triangles()));
  for (std::size_t t = 0; t < anc.size(); ++t) anc[t] = static_cast<int>(t);
  for (std::size_t k = fine; k > coarse; --k) {
    const auto& transfer = path.levels[k].from_previous;
    if (!transfer) throw std::logic_error("path level without prolongation");
    for (auto& a : anc) a = transfer->parent[a];
  }
  return anc;
}

// Same-mesh distances used for the regularization error.
std::pair<double, double> same_mesh_distance(const OptState& a, const OptState& b, const ProblemSpec& spec,
                                             int depth) {
  const Mesh& m = *a.mesh;
  double linf = 0.0, l2 = 0.0;
  if (a.discretization == Discretization::rt0) {
    const P0Field la = recover_control(rt0::adjoint(a), rt0::datum(a), spec);
    const P0Field lb = recover_control(rt0::adjoint(b), rt0::datum(b), spec);
    linf = (rt0::state(a).values - rt0::state(b).values).cwiseAbs().maxCoeff();
    for (int t = 0; t < m.num_triangles(); ++t) l2 += m.area(t) * std::pow(la(t) - lb(t), 2);
  } else {
    // Piecewise linear differences attain their maximum at vertices.
    linf = (p1::state(a).values - p1::state(b).values).cwiseAbs().maxCoeff();
    const ControlFunction la(p1::adjoint(a), p1::datum(a), spec);
    const ControlFunction lb(p1::adjoint(b), p1::datum(b), spec);
    const auto rule = subdivided_gauss3(depth);
    for (int t = 0; t < m.num_triangles(); ++t) {
      for (const auto& qp : rule) l2 += qp.weight * m.area(t) * std::pow(la.eval(t, qp.bary) - lb.eval(t, qp.bary), 2);
    }
  }
  return {linf, std::sqrt(l2)};
}

void fill_solver_info(ErrorRecord& e, const LevelRecord& rec) {
  e.newton_iters = rec.report.iterations;
  e.wall_s = rec.wall_s;
}

}  // namespace

ErrorRecord errors_vs_exact(const LevelRecord& rec, const ProblemSpec& spec, const ExactSolution& exact,
                            int split_depth) {
  ErrorRecord e = exact_errors(rec.state, spec, exact, split_depth);
  fill_solver_info(e, rec);
  return e;
}

ErrorRecord errors_vs_reference(const PathResult& path, std::size_t coarse, std::size_t fine,
                                const ProblemSpec& spec, int split_depth) {
  if (coarse >= fine || fine >= path.levels.size()) throw std::out_of_range("errors_vs_reference: bad level indices");
  ErrorRecord e = cross_errors(path.levels[coarse].state, path.levels[fine].state, ancestors(path, coarse, fine), spec,
                               split_depth);
  fill_solver_info(e, path.levels[coarse]);
  return e;
}

TableResult run_table(const ProblemSpec& spec, const PathConfig& cfg, const TableOptions& opt,
                      const LevelCallback& on_level) {
  TableResult out;
  if (opt.exact) {
    out.path = run_path(spec, cfg, on_level);
    for (const auto& rec : out.path.levels) out.table.rows.push_back(errors_vs_exact(rec, spec, *opt.exact, cfg.split_depth));
  } else {
    const int finest = cfg.start_level + cfg.levels - 1;
    const int ref = opt.reference_level > 0 ? opt.reference_level : finest + 2;
    if (ref <= finest) throw std::invalid_argument("run_table: reference level must exceed the tabulated levels");
    PathConfig extended = cfg;
    extended.levels = ref - cfg.start_level + 1;
    extended.stop_threshold = 0.0;
    out.path = run_path(spec, extended, on_level);
    const std::size_t last = out.path.levels.size();
    if (out.path.completed() && last == static_cast<std::size_t>(extended.levels)) {
      for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.levels); ++i) {
        out.table.rows.push_back(errors_vs_reference(out.path, i, last - 1, spec, cfg.split_depth));
      }
    }
  }
  if (out.path.failure) out.table.failure = out.path.failure->message;
  if (!opt.exact && out.table.rows.empty() && !out.table.failure) out.table.failure = "reference level not reached";
  out.table.compute_eoc();
  return out;
}

SweepResult gamma_sweep(const ProblemSpec& spec, int level, const std::vector<double>& gammas,
                        const SweepOptions& opt) {
  if (gammas.empty()) throw std::invalid_argument("gamma_sweep: empty gamma list");
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0.0) || (i > 0 && !(gammas[i] > gammas[i - 1]))) {
      throw std::invalid_argument("gamma_sweep: gammas must be positive and increasing");
    }
  }
  using clock = std::chrono::steady_clock;
  const MeshPtr mesh = build_uniform(level);
  const std::shared_ptr<const KktSystem> system = make_kkt_system(spec, mesh, opt.split_depth);
  const std::size_t n = gammas.size();
  std::vector<std::optional<OptState>> states(n);
  std::vector<NewtonReport> reports(n);
  std::vector<double> walls(n, 0.0);

  OptState x = system->zero_state(gammas.front());
  for (std::size_t i = 0; i < n; ++i) {
    const auto t0 = clock::now();
    x.gamma = gammas[i];
    NewtonResult r = newton_solve(*system, x, opt.newton);
    walls[i] = std::chrono::duration<double>(clock::now() - t0).count();
    reports[i] = r.report;
    if (r.report.converged()) {
      x = r.state;
      states[i] = std::move(r.state);
    }
  }

  std::optional<PathResult> reference;
  std::vector<int> anc;
  if (!opt.exact) {
    PathConfig cfg;
    cfg.start_level = level;
    cfg.gamma0 = gammas.back();
    cfg.kappa = opt.reference_kappa;
    const int ref = opt.reference_level > 0 ? opt.reference_level : level + 2;
    if (ref <= level) throw std::invalid_argument("gamma_sweep: reference level must exceed the sweep level");
    cfg.levels = ref - level + 1;
    cfg.newton = opt.newton;
    cfg.split_depth = opt.split_depth;
    reference = run_path(spec, cfg);
    if (!reference->completed()) throw std::runtime_error("gamma_sweep: reference path failed: " + reference->failure->message);
    if (!reference->levels.front().mesh()->same_topology(*mesh)) throw std::logic_error("gamma_sweep: mesh mismatch");
    anc = ancestors(*reference, 0, reference->levels.size() - 1);
  }

  std::optional<std::size_t> last;
  for (std::size_t i = n; i-- > 0;) {
    if (states[i]) {
      last = i;
      break;
    }
  }

  SweepResult out;
  for (std::size_t i = 0; i < n; ++i) {
    SweepRecord rec;
    rec.status = reports[i].status;
    rec.errors.level = mesh->level();
    rec.errors.h = mesh->h();
    rec.errors.gamma = gammas[i];
    rec.errors.discretization = spec.discretization;
    rec.errors.newton_iters = reports[i].iterations;
    rec.errors.wall_s = walls[i];
    if (!states[i]) {
      out.failures.push_back("gamma " + std::to_string(gammas[i]) + ": " + std::string(to_string(reports[i].status)) +
                             (reports[i].message.empty() ? "" : " (" + reports[i].message + ")"));
      out.records.push_back(std::move(rec));
      continue;
    }
    ErrorRecord e = opt.exact ? exact_errors(*states[i], spec, *opt.exact, opt.split_depth)
                              : cross_errors(OptState(*states[i]), reference->levels.back().state, anc, spec,
                                             opt.split_depth);
    e.newton_iters = rec.errors.newton_iters;
    e.wall_s = rec.errors.wall_s;
    rec.errors = e;
    const auto [dy, dl] = same_mesh_distance(*states[i], *states[*last], spec, opt.split_depth);
    rec.reg_linf_y = dy;
    rec.reg_l2_l = dl;
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::vector<SweepResult> gamma_sweeps(const ProblemSpec& spec, const std::vector<int>& levels,
                                      const std::vector<double>& gammas, const SweepOptions& opt) {
  std::vector<SweepResult> out(levels.size());
  const std::size_t width = static_cast<std::size_t>(std::max(1, opt.threads));
  for (std::size_t begin = 0; begin < levels.size(); begin += width) {
    std::vector<std::future<SweepResult>> jobs;
    const std::size_t end = std::min(levels.size(), begin + width);
    for (std::size_t i = begin; i < end; ++i) {
      jobs.push_back(std::async(std::launch::async, [&, i] { return gamma_sweep(spec, levels[i], gammas, opt); }));
    }
    for (std::size_t i = begin; i < end; ++i) out[i] = jobs[i - begin].get();
  }
  return out;
}

std::optional<double> presaturation_slope(const std::vector<double>& gammas, const std::vector<double>& reg,
                                          double floor, double fraction) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < gammas.size() && i < reg.size(); ++i) {
    if (reg[i] > 0.0 && reg[i] >= fraction * floor) {
      x.push_back(gammas[i]);
      y.push_back(reg[i]);
    }
  }
  if (x.size() < 2) return std::nullopt;
  return loglog_slope(x, y);
}

std::vector<PoissonConvRow> poisson_convergence(Discretization d, int first_level, int last_level) {
  if (first_level < 1 || last_level < first_level) throw std::invalid_argument("poisson_convergence: bad level range");
  const ManufacturedPoisson mp = manufactured_poisson();
  std::vector<PoissonConvRow> rows;
  for (int k = first_level; k <= last_level; ++k) {
    const MeshPtr mesh = build_uniform(k);
    PoissonConvRow r;
    r.level = k;
    r.h = mesh->h();
    if (d == Discretization::rt0) {
      const MixedSolution s = solve_poisson_rt0(mesh, mp.g);
      const Rt0Errors e = rt0_norms(s.y, s.v, mp.y, mp.gradient);
      r.err_l2 = e.l2_scalar;
      r.err_h1 = e.l2_flux;
      r.err_linf = e.linf_scalar;
      const Eigen::VectorXd g = element_integrals(*mesh, mp.g);
      for (int t = 0; t < mesh->num_triangles(); ++t) {
        r.conservation = std::max(r.conservation, std::abs(s.v.divergence(t) * mesh->area(t) + g[t]));
      }
    } else {
      const P1Errors e = p1_norms(solve_poisson_p1(mesh, mp.g), mp.y, mp.gradient);
      r.err_l2 = e.l2;
      r.err_h1 = e.h1_semi;
      r.err_linf = e.linf;
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<double> parse_gamma_list(const std::string& text) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || !(v > 0.0)) throw std::invalid_argument("bad gamma value '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("gamma range must be start:stop:step, got '" + text + "'");
    const double a = number(parts[0]), b = number(parts[1]);
    double factor = 0.0;
    if (parts[2] == "decade") {
      factor = 10.0;
    } else if (parts[2] == "half-decade") {
      factor = std::sqrt(10.0);
    } else {
      factor = number(parts[2]);
    }
    if (!(factor > 1.0) || !(b >= a)) throw std::invalid_argument("gamma range must increase: '" + text + "'");
    const int steps = static_cast<int>(std::floor(std::log(b / a) / std::log(factor) + 1e-9));
    for (int i = 0; i <= steps; ++i) out.push_back(a * std::pow(factor, i));
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  }
  if (out.empty()) throw std::invalid_argument("empty gamma list");
  return out;
}

std::pair<int, int> parse_level_range(const std::string& text) {
  auto integer = [&](const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty()) throw std::invalid_argument("bad level '" + s + "'");
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const int k = integer(text);
    return {k, k};
  }
  const int a = integer(text.substr(0, dots)), b = integer(text.substr(dots + 2));
  if (b < a) throw std::invalid_argument("level range must increase: '" + text + "'");
  return {a, b};
}

}  // namespace plateopt
