#include <doctest.h>

#include <cmath>
#include <limits>

#include "plateopt/benchmarks.hpp"
#include "plateopt/solver.hpp"

using namespace plateopt;

TEST_CASE("linear regime converges in one step") {
  ProblemSpec spec = example2_spec();
  spec.state_offset = 10.0;  // state constraint never active
  for (const auto d : {Discretization::rt0, Discretization::p1}) {
    spec.discretization = d;
    const auto sys = make_kkt_system(spec, build_uniform(4));
    const NewtonResult r = newton_solve(*sys, sys->zero_state(1.0));
    CHECK(r.report.converged());
    CHECK(r.report.iterations == 1);
    CHECK(r.report.residuals.size() == 2);
    CHECK(r.report.residuals.back() < 1e-10);
  }
}

TEST_CASE("small gamma from zero converges") {
  for (const auto d : {Discretization::rt0, Discretization::p1}) {
    const auto sys = make_kkt_system(example1_spec(d), build_uniform(4));
    const NewtonResult r = newton_solve(*sys, sys->zero_state(1.0));
    CHECK(r.report.converged());
    CHECK(r.report.residuals.back() <= 1e-3);
    CHECK(sys->residual(r.state).norm() == doctest::Approx(r.report.residuals.back()));
  }
}

TEST_CASE("failures are reported, not thrown") {
  const auto sys = make_kkt_system(example1_spec(), build_uniform(4));
  NewtonOptions opt;
  opt.max_iterations = 1;
  const NewtonResult r = newton_solve(*sys, sys->zero_state(1e6), opt);
  CHECK(r.report.status == NewtonStatus::max_iterations);
  CHECK(!r.report.converged());
  CHECK(!r.report.message.empty());

  ProblemSpec nan_spec = example2_spec();
  nan_spec.load = [](const Point&) { return std::numeric_limits<double>::quiet_NaN(); };
  const auto bad = make_kkt_system(nan_spec, build_uniform(3));
  const NewtonResult rn = newton_solve(*bad, bad->zero_state(10.0));
  CHECK(rn.report.status == NewtonStatus::non_finite);
  CHECK(to_string(rn.report.status) == "non_finite");
}

TEST_CASE("adopt rejects foreign states") {
  const auto a = make_kkt_system(example1_spec(), build_uniform(3));
  const auto b = make_kkt_system(example1_spec(), build_uniform(4));
  CHECK_THROWS(newton_solve(*a, b->zero_state(1.0)));
  const auto p = make_kkt_system(example1_spec(Discretization::p1), build_uniform(3));
  CHECK_THROWS(newton_solve(*a, p->zero_state(1.0)));
}

TEST_CASE("field prolongation") {
  auto c = build_uniform(3);
  const Refinement r = refine(c);
  const P0Field k(c, Eigen::VectorXd::Constant(c->num_triangles(), 2.5));
  CHECK((prolong(k, r.prolongation).values.array() == 2.5).all());

  const auto lin = [](const Point& x) { return 3.0 * x.x() - x.y() + 0.5; };
  const P1Field pl = prolong(P1Field::interpolate(c, lin), r.prolongation);
  for (int v = 0; v < r.mesh->num_vertices(); ++v) CHECK(pl.values[v] == doctest::Approx(lin(r.mesh->vertex(v))).epsilon(1e-14));

  Eigen::VectorXd flux(c->num_edges());
  for (int e = 0; e < c->num_edges(); ++e) flux[e] = std::sin(1.0 + e);
  const RT0Field vc(c, flux);
  const RT0Field vf = prolong(vc, r.prolongation);
  std::vector<double> sum(c->num_triangles(), 0.0);
  for (int t = 0; t < r.mesh->num_triangles(); ++t) {
    const int a = r.prolongation.parent[t];
    sum[a] += vf.divergence(t) * r.mesh->area(t);
    // the coarse field is contained in the fine space
    const Point x = r.mesh->centroid(t);
    CHECK((vf.eval(t, x) - vc.eval(a, x)).norm() < 1e-12);
  }
  for (int t = 0; t < c->num_triangles(); ++t) CHECK(sum[t] == doctest::Approx(vc.divergence(t) * c->area(t)).epsilon(1e-12));
}

TEST_CASE("prolong_state keeps element means") {
  const ProblemSpec spec = example1_spec();
  auto c = build_uniform(4);
  const auto sys = make_kkt_system(spec, c);
  const NewtonResult r = newton_solve(*sys, sys->zero_state(400.0));
  REQUIRE(r.report.converged());
  const Refinement ref = refine(c);
  const OptState f = prolong_state(r.state, ref.prolongation);
  const P0Field yc = rt0::state(r.state), yf = rt0::state(f);
  std::vector<double> mean(c->num_triangles(), 0.0);
  for (int t = 0; t < ref.mesh->num_triangles(); ++t) mean[ref.prolongation.parent[t]] += yf(t) * ref.mesh->area(t);
  for (int t = 0; t < c->num_triangles(); ++t) CHECK(mean[t] == doctest::Approx(yc(t) * c->area(t)).epsilon(1e-12));
  CHECK(f.datum.size() == ref.mesh->num_triangles());
  CHECK(f.gamma == r.state.gamma);
}

TEST_CASE("gamma schedules") {
  PathConfig cfg;
  cfg.levels = 3;
  const PathResult rt0 = run_path(example1_spec(), cfg);
  REQUIRE(rt0.completed());
  REQUIRE(rt0.levels.size() == 3);
  CHECK(rt0.levels[0].gamma == 400.0);
  CHECK(rt0.levels[1].gamma == 1600.0);
  CHECK(rt0.levels[2].gamma == 6400.0);
  for (int i = 0; i < 3; ++i) CHECK(rt0.levels[i].level == 4 + i);
  CHECK(!rt0.levels[0].from_previous);
  CHECK(rt0.levels[1].from_previous);

  cfg.gamma0 = 16.0;
  cfg.kappa = 4.0;
  const PathResult p1 = run_path(example2_spec(Discretization::p1), cfg);
  REQUIRE(p1.completed());
  CHECK(p1.levels[0].gamma == 16.0);
  CHECK(p1.levels[1].gamma == 256.0);
  CHECK(p1.levels[2].gamma == 4096.0);
  CHECK(p1.max_converged_gamma() == 4096.0);
}

TEST_CASE("single level path equals newton_solve") {
  PathConfig cfg;
  cfg.levels = 1;
  const PathResult path = run_path(example1_spec(), cfg);
  const auto sys = make_kkt_system(example1_spec(), build_uniform(4));
  const NewtonResult r = newton_solve(*sys, sys->zero_state(400.0));
  REQUIRE(path.levels.size() == 1);
  CHECK(path.levels[0].report.residuals == r.report.residuals);
  CHECK((path.levels[0].state.x - r.state.x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("determinism") {
  PathConfig cfg;
  cfg.levels = 2;
  const PathResult a = run_path(example2_spec(), cfg);
  const PathResult b = run_path(example2_spec(), cfg);
  REQUIRE(a.levels.size() == b.levels.size());
  for (std::size_t i = 0; i < a.levels.size(); ++i) {
    CHECK(a.levels[i].report.residuals == b.levels[i].report.residuals);
    CHECK(a.levels[i].objective == b.levels[i].objective);
  }
}

TEST_CASE("warm start beats cold start") {
  PathConfig cfg;
  cfg.levels = 3;
  const PathResult path = run_path(example1_spec(), cfg);
  REQUIRE(path.completed());
  int better = 0;
  for (std::size_t i = 1; i < path.levels.size(); ++i) {
    const auto& rec = path.levels[i];
    const NewtonResult cold = newton_solve(*rec.system, rec.system->zero_state(rec.gamma));
    if (rec.report.iterations <= cold.report.iterations) ++better;
  }
  CHECK(better >= 1);
}

TEST_CASE("superlinear tail along the Example 1 path") {
  PathConfig cfg;
  cfg.levels = 3;
  const PathResult path = run_path(example1_spec(), cfg);
  REQUIRE(path.completed());
  for (const auto& rec : path.levels) {
    const auto& r = rec.report.residuals;
    REQUIRE(r.size() >= 2);
    const double a = r[r.size() - 2], b = r.back();
    MESSAGE("level " << rec.level << ": " << a << " -> " << b);
    CHECK(b <= 10.0 * std::pow(a, 1.5));
  }
}

TEST_CASE("multiplier stays bounded in L1 along the path") {
  PathConfig cfg;
  cfg.levels = 3;
  const PathResult path = run_path(example1_spec(), cfg);
  REQUIRE(path.completed());
  std::vector<double> l1;
  for (const auto& rec : path.levels) {
    const P0Field nu = moreau_yosida_multiplier(rt0::state(rec.state), rec.gamma, 0.1);
    double s = 0.0;
    for (int t = 0; t < rec.mesh()->num_triangles(); ++t) s += std::abs(nu(t)) * rec.mesh()->area(t);
    l1.push_back(s);
  }
  for (std::size_t i = 1; i < l1.size(); ++i) CHECK(l1[i] <= 2.0 * l1[0]);
}

TEST_CASE("retry and stop policies") {
  SUBCASE("no retry at the first level") {
    PathConfig cfg;
    cfg.levels = 2;
    cfg.retry_conservative = true;
    cfg.newton.max_iterations = 2;
    const PathResult r = run_path(example1_spec(), cfg);
    REQUIRE(r.failure);
    CHECK(r.failure->level == 4);
    CHECK(r.failure->gamma == 400.0);
    CHECK(r.levels.empty());
    CHECK(r.max_converged_gamma() == 0.0);
  }
  SUBCASE("retry uses half the exponent") {
    PathConfig cfg;
    cfg.gamma0 = 16.0;
    cfg.kappa = 8.0;
    cfg.levels = 3;
    cfg.newton.max_iterations = 20;
    const PathResult plain = run_path(example1_spec(Discretization::p1), cfg);
    cfg.retry_conservative = true;
    const PathResult retry = run_path(example1_spec(Discretization::p1), cfg);
    REQUIRE(plain.failure);
    CHECK(plain.failure->level == 6);
    REQUIRE(retry.levels.size() >= 3);
    CHECK(retry.levels[2].retries == 1);
    CHECK(retry.levels[2].gamma == retry.levels[1].gamma * 16.0);
    CHECK(retry.max_converged_gamma() > plain.max_converged_gamma());
  }
  SUBCASE("stop threshold") {
    PathConfig cfg;
    cfg.levels = 4;
    cfg.stop_threshold = 0.5;
    const PathResult r = run_path(example1_spec(), cfg);
    CHECK(r.stopped_by_threshold);
    CHECK(r.levels.size() == 2);
    CHECK(r.completed());
  }
  SUBCASE("invalid configurations") {
    PathConfig cfg;
    cfg.levels = 0;
    CHECK_THROWS_AS(run_path(example1_spec(), cfg), std::invalid_argument);
    cfg.levels = 1;
    cfg.kappa = 0.0;
    CHECK_THROWS_AS(run_path(example1_spec(), cfg), std::invalid_argument);
  }
}
