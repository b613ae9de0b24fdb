#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "plateopt/mesh.hpp"

using namespace plateopt;

namespace {

double area_sum(const Mesh& m) {
  double s = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) s += m.area(t);
  return s;
}

std::set<std::pair<double, double>> sorted_vertices(const Mesh& m) {
  std::set<std::pair<double, double>> out;
  for (const auto& p : m.vertices()) out.emplace(p.x(), p.y());
  return out;
}

}  // namespace

TEST_CASE("build_uniform counts") {
  auto m1 = build_uniform(1);
  CHECK(m1->num_vertices() == 4);
  CHECK(m1->num_triangles() == 2);
  CHECK(m1->num_edges() == 5);
  CHECK(m1->h() == doctest::Approx(std::sqrt(2.0)));

  auto m4 = build_uniform(4);
  CHECK(m4->num_vertices() == 81);
  CHECK(m4->num_triangles() == 128);
  CHECK(m4->num_edges() == 208);
  CHECK(m4->h() == doctest::Approx(0.17678).epsilon(1e-4));
  CHECK(build_uniform(6)->h() == doctest::Approx(0.04419).epsilon(1e-3));
  CHECK_THROWS(build_uniform(0));
}

TEST_CASE("mesh invariants") {
  for (int k = 1; k <= 6; ++k) {
    auto m = build_uniform(k);
    CHECK(m->num_vertices() - m->num_edges() + m->num_triangles() == 1);
    CHECK(std::abs(area_sum(*m) - 1.0) < 1e-12);
    for (int t = 0; t < m->num_triangles(); ++t) CHECK(m->area(t) > 0.0);
    // interior vertices of the (n+1)^2 grid
    const int n = 1 << (k - 1);
    CHECK(m->num_interior_vertices() == (n - 1) * (n - 1));
  }
}

TEST_CASE("edge normals and signs") {
  auto m = build_uniform(3);
  for (int t = 0; t < m->num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const int e = m->triangle_edge(t, i);
      const Point out = m->edge_midpoint(e) - m->centroid(t);
      CHECK(m->edge_sign(t, i) * m->edge_normal(e).dot(out) > 0.0);
      CHECK(std::abs(m->edge_normal(e).norm() - 1.0) < 1e-14);
    }
  }
  for (int e = 0; e < m->num_edges(); ++e) {
    const auto& ed = m->edge(e);
    CHECK(ed.vertices[0] < ed.vertices[1]);
  }
}

TEST_CASE("refine") {
  auto r = refine(build_uniform(1));
  CHECK(r.mesh->num_triangles() == 8);
  CHECK(r.mesh->h() == doctest::Approx(std::sqrt(2.0) / 2));
  CHECK(std::abs(area_sum(*r.mesh) - 1.0) < 1e-12);

  auto c4 = build_uniform(4);
  auto f = refine(c4).mesh;
  auto u5 = build_uniform(5);
  CHECK(f->num_vertices() == u5->num_vertices());
  CHECK(f->num_edges() == u5->num_edges());
  CHECK(f->num_triangles() == u5->num_triangles());
  CHECK(sorted_vertices(*f) == sorted_vertices(*u5));

  auto ff = refine(refine(build_uniform(3)).mesh).mesh;
  auto u5b = build_uniform(5);
  CHECK(ff->num_triangles() == u5b->num_triangles());
  CHECK(ff->num_edges() == u5b->num_edges());
}

TEST_CASE("prolongation data") {
  auto c = build_uniform(3);
  auto r = refine(c);
  const auto& p = r.prolongation;
  REQUIRE(p.parent.size() == static_cast<std::size_t>(r.mesh->num_triangles()));
  std::vector<int> children(c->num_triangles(), 0);
  for (int t = 0; t < r.mesh->num_triangles(); ++t) {
    const int a = p.parent[t];
    ++children[a];
    const Eigen::Vector3d b = c->barycentric(a, r.mesh->centroid(t));
    CHECK(b.minCoeff() > 0.0);
    CHECK(std::abs(r.mesh->area(t) - c->area(a) / 4) < 1e-15);
  }
  CHECK(std::all_of(children.begin(), children.end(), [](int n) { return n == 4; }));
  for (int v = 0; v < r.mesh->num_vertices(); ++v) {
    const auto& emb = p.embedding[v];
    CHECK(emb.bary.minCoeff() >= 0.0);
    CHECK(emb.bary.maxCoeff() <= 1.0);
    CHECK(std::abs(emb.bary.sum() - 1.0) < 1e-12);
    CHECK((c->map(emb.triangle, emb.bary) - r.mesh->vertex(v)).norm() < 1e-14);
  }
}

TEST_CASE("build_nested shares numbering across levels") {
  auto a = build_nested(2, 4);
  auto b = build_nested(2, 4);
  CHECK(a->same_topology(*b));
  CHECK(a->level() == 4);
  CHECK(!a->same_topology(*build_nested(2, 3)));
}

TEST_CASE("mesh file round trip") {
  auto m = build_uniform(1);
  const auto path = std::filesystem::temp_directory_path() / "plateopt_mesh_roundtrip.txt";
  save_mesh(*m, path);
  auto back = load_mesh(path);
  CHECK(back->num_vertices() == 4);
  CHECK(back->num_triangles() == 2);
  CHECK(back->num_edges() == 5);
  CHECK(back->vertices() == m->vertices());
  std::filesystem::remove(path);

  auto m3 = build_uniform(3);
  save_mesh(*m3, path);
  CHECK(load_mesh(path)->same_topology(*m3));
  std::filesystem::remove(path);
}

TEST_CASE("mesh file errors") {
  SUBCASE("flipped triangle names the element") {
    const std::string text = "4 5 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 3 2\n";
    try {
      parse_mesh(text);
      FAIL("expected a topology error");
    } catch (const MeshTopologyError& e) {
      CHECK(e.element() == 1);
    }
  }
  SUBCASE("dangling vertex accepted with warning") {
    const std::string text = "5 5 2\n0 0\n1 0\n1 1\n0 1\n0.5 0.25\n0 1 2\n0 2 3\n";
    auto m = parse_mesh(text);
    CHECK(!m->is_used_vertex(4));
    CHECK(m->warnings().size() == 1);
    CHECK(m->num_interior_vertices() == 0);
  }
  SUBCASE("malformed lines carry line numbers") {
    try {
      parse_mesh("4 5 2\n0 0\n1 x\n1 1\n0 1\n0 1 2\n0 2 3\n");
      FAIL("expected a parse error");
    } catch (const MeshParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_mesh(""), MeshParseError);
    CHECK_THROWS_AS(parse_mesh("4 5 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n"), MeshParseError);
    CHECK_THROWS_AS(parse_mesh("4 5 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 7\n"), MeshParseError);
    CHECK_THROWS_AS(parse_mesh("4 6 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n"), MeshParseError);
  }
  SUBCASE("gap in the square") {
    CHECK_THROWS_AS(parse_mesh("3 3 1\n0 0\n1 0\n1 1\n0 1 2\n"), MeshTopologyError);
  }
  CHECK_THROWS(load_mesh("/nonexistent/mesh.txt"));
}

TEST_CASE("barycentric and map are inverse") {
  auto m = build_uniform(3);
  const Eigen::Vector3d b(0.2, 0.3, 0.5);
  for (int t = 0; t < m->num_triangles(); ++t) {
    CHECK((m->barycentric(t, m->map(t, b)) - b).norm() < 1e-13);
  }
}
