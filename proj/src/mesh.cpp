#include "plateopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

namespace plateopt {

MeshParseError::MeshParseError(int line, const std::string& what)
    : std::runtime_error("mesh parse error at line " + std::to_string(line) + ": " + what),
      line_(line) {}

MeshTopologyError::MeshTopologyError(int element, const std::string& what)
    : std::runtime_error(element >= 0
                             ? "mesh topology error at triangle " + std::to_string(element) + ": " + what
                             : "mesh topology error: " + what),
      element_(element) {}

namespace {

constexpr double kGeomTol = 1e-12;

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

bool on_square_boundary(const Point& p) {
  return std::abs(p.x()) < kGeomTol || std::abs(p.x() - 1.0) < kGeomTol ||
         std::abs(p.y()) < kGeomTol || std::abs(p.y() - 1.0) < kGeomTol;
}

bool segment_on_square_boundary(const Point& a, const Point& b) {
  auto same_side = [](double u, double v, double c) {
    return std::abs(u - c) < kGeomTol && std::abs(v - c) < kGeomTol;
  };
  return same_side(a.x(), b.x(), 0.0) || same_side(a.x(), b.x(), 1.0) ||
         same_side(a.y(), b.y(), 0.0) || same_side(a.y(), b.y(), 1.0);
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
           int level, std::optional<double> h)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), level_(level) {
  const int nv = num_vertices();
  const int nt = num_triangles();
  if (nt == 0) throw MeshTopologyError(-1, "mesh has no triangles");

  for (int v = 0; v < nv; ++v) {
    const Point& p = vertices_[v];
    if (!(p.x() >= -kGeomTol && p.x() <= 1.0 + kGeomTol && p.y() >= -kGeomTol &&
          p.y() <= 1.0 + kGeomTol)) {
      throw MeshTopologyError(-1, "vertex " + std::to_string(v) + " lies outside the unit square");
    }
  }

  areas_.resize(nt);
  used_vertex_.assign(nv, false);
  double area_sum = 0.0;
  double diameter = 0.0;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      if (tri[i] < 0 || tri[i] >= nv) throw MeshTopologyError(t, "vertex index out of range");
      used_vertex_[tri[i]] = true;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw MeshTopologyError(t, "repeated vertex");
    }
    const double a = signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    if (!(a > 0.0)) throw MeshTopologyError(t, "non-positive signed area (inverted or degenerate)");
    areas_[t] = a;
    area_sum += a;
    for (int i = 0; i < 3; ++i) {
      diameter = std::max(diameter, (vertices_[tri[i]] - vertices_[tri[(i + 1) % 3]]).norm());
    }
  }
  if (std::abs(area_sum - 1.0) > kGeomTol) {
    throw MeshTopologyError(-1, "triangle areas sum to " + std::to_string(area_sum) + ", not 1");
  }
  h_ = h.value_or(diameter);

  // Edges in order of first appearance.
  std::unordered_map<long long, int> lookup;
  lookup.reserve(static_cast<std::size_t>(3 * nt));
  triangle_edges_.resize(nt);
  edge_signs_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      const int a = tri[(i + 1) % 3];
      const int b = tri[(i + 2) % 3];
      const int lo = std::min(a, b);
      const int hi = std::max(a, b);
      const long long key = static_cast<long long>(lo) * nv + hi;
      auto [it, inserted] = lookup.try_emplace(key, num_edges());
      if (inserted) {
        edges_.push_back(Edge{{lo, hi}, {t, -1}});
      } else {
        Edge& e = edges_[it->second];
        if (e.triangles[1] >= 0) throw MeshTopologyError(t, "edge shared by more than two triangles");
        e.triangles[1] = t;
      }
      triangle_edges_[t][i] = it->second;
    }
  }

  boundary_vertex_.assign(nv, false);
  for (int e = 0; e < num_edges(); ++e) {
    const Edge& edge = edges_[e];
    if (!edge.boundary()) continue;
    const Point& a = vertices_[edge.vertices[0]];
    const Point& b = vertices_[edge.vertices[1]];
    if (!segment_on_square_boundary(a, b)) {
      throw MeshTopologyError(edge.triangles[0],
                              "edge " + std::to_string(edge.vertices[0]) + "-" +
                                  std::to_string(edge.vertices[1]) +
                                  " has one neighbour but is not on the boundary (non-conforming)");
    }
    boundary_vertex_[edge.vertices[0]] = true;
    boundary_vertex_[edge.vertices[1]] = true;
  }

  for (int t = 0; t < nt; ++t) {
    for (int i = 0; i < 3; ++i) {
      const int e = triangle_edges_[t][i];
      const Point opposite = vertices_[triangles_[t][i]];
      edge_signs_[t][i] = (edge_midpoint(e) - opposite).dot(edge_normal(e)) > 0.0 ? 1 : -1;
    }
  }

  int unused = 0;
  interior_index_.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (!used_vertex_[v]) {
      ++unused;
      warnings_.push_back("vertex " + std::to_string(v) + " is not referenced by any triangle");
      continue;
    }
    if (!boundary_vertex_[v]) {
      if (on_square_boundary(vertices_[v])) {
        throw MeshTopologyError(-1, "vertex " + std::to_string(v) +
                                        " lies on the boundary but has no boundary edge");
      }
      interior_index_[v] = static_cast<int>(interior_.size());
      interior_.push_back(v);
    }
  }

  const int euler = (nv - unused) - num_edges() + nt;
  if (euler != 1) {
    throw MeshTopologyError(-1, "Euler characteristic V-E+T = " + std::to_string(euler) +
                                    " (expected 1 for a simply connected triangulation)");
  }
}

Point Mesh::centroid(int t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

std::array<Point, 3> Mesh::corners(int t) const {
  const auto& tri = triangles_[t];
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

Point Mesh::map(int t, const Eigen::Vector3d& bary) const {
  const auto& tri = triangles_[t];
  return bary[0] * vertices_[tri[0]] + bary[1] * vertices_[tri[1]] + bary[2] * vertices_[tri[2]];
}

Eigen::Vector3d Mesh::barycentric(int t, const Point& x) const {
  const auto c = corners(t);
  const double l1 = signed_area(x, c[1], c[2]) / areas_[t];
  const double l2 = signed_area(c[0], x, c[2]) / areas_[t];
  return Eigen::Vector3d(l1, l2, 1.0 - l1 - l2);
}

std::array<Point, 3> Mesh::barycentric_gradients(int t) const {
  const auto c = corners(t);
  const double two_area = 2.0 * areas_[t];
  std::array<Point, 3> grads;
  for (int i = 0; i < 3; ++i) {
    const Point& a = c[(i + 1) % 3];
    const Point& b = c[(i + 2) % 3];
    // inward normal of the opposite edge scaled by its length
    grads[i] = Point(a.y() - b.y(), b.x() - a.x()) / two_area;
  }
  return grads;
}

Point Mesh::edge_normal(int e) const {
  const Point t = vertices_[edges_[e].vertices[1]] - vertices_[edges_[e].vertices[0]];
  return Point(t.y(), -t.x()) / t.norm();
}

double Mesh::edge_length(int e) const {
  return (vertices_[edges_[e].vertices[1]] - vertices_[edges_[e].vertices[0]]).norm();
}

Point Mesh::edge_midpoint(int e) const {
  return 0.5 * (vertices_[edges_[e].vertices[0]] + vertices_[edges_[e].vertices[1]]);
}

bool Mesh::same_topology(const Mesh& other) const {
  return vertices_ == other.vertices_ && triangles_ == other.triangles_;
}

MeshPtr build_uniform(int level) {
  if (level < 1) throw std::invalid_argument("build_uniform: level must be >= 1");
  if (level > 14) throw std::invalid_argument("build_uniform: level too large");
  const int n = 1 << (level - 1);
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    }
  }
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = j * (n + 1) + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + n + 1;
      const int v11 = v01 + 1;
      triangles.push_back({v00, v10, v11});
      triangles.push_back({v00, v11, v01});
    }
  }
  const double h = std::sqrt(2.0) * std::ldexp(1.0, 1 - level);
  return std::make_shared<const Mesh>(std::move(vertices), std::move(triangles), level, h);
}

Refinement refine(const MeshPtr& mesh) {
  const Mesh& coarse = *mesh;
  const int nv = coarse.num_vertices();
  const int nt = coarse.num_triangles();

  std::vector<Point> vertices(coarse.vertices());
  vertices.reserve(static_cast<std::size_t>(nv + coarse.num_edges()));
  std::vector<VertexEmbedding> embedding(static_cast<std::size_t>(nv + coarse.num_edges()),
                                         VertexEmbedding{-1, Eigen::Vector3d::Zero()});
  for (int t = 0; t < nt; ++t) {
    for (int i = 0; i < 3; ++i) {
      const int v = coarse.triangle(t)[i];
      if (embedding[v].triangle < 0) {
        embedding[v].triangle = t;
        embedding[v].bary = Eigen::Vector3d::Unit(i);
      }
    }
  }
  for (int e = 0; e < coarse.num_edges(); ++e) {
    vertices.push_back(coarse.edge_midpoint(e));
    const int t = coarse.edge(e).triangles[0];
    int opposite = 0;
    while (coarse.triangle_edge(t, opposite) != e) ++opposite;
    Eigen::Vector3d bary = Eigen::Vector3d::Constant(0.5);
    bary[opposite] = 0.0;
    embedding[nv + e] = VertexEmbedding{t, bary};
  }
  // Dangling coarse vertices keep a harmless embedding into triangle 0.
  for (auto& emb : embedding) {
    if (emb.triangle < 0) emb = VertexEmbedding{0, Eigen::Vector3d::Unit(0)};
  }

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(static_cast<std::size_t>(4 * nt));
  std::vector<int> parent;
  parent.reserve(static_cast<std::size_t>(4 * nt));
  for (int t = 0; t < nt; ++t) {
    const auto& tri = coarse.triangle(t);
    const int a = tri[0], b = tri[1], c = tri[2];
    const int mbc = nv + coarse.triangle_edge(t, 0);
    const int mca = nv + coarse.triangle_edge(t, 1);
    const int mab = nv + coarse.triangle_edge(t, 2);
    triangles.push_back({a, mab, mca});
    triangles.push_back({mab, b, mbc});
    triangles.push_back({mca, mbc, c});
    triangles.push_back({mab, mbc, mca});
    parent.insert(parent.end(), 4, t);
  }

  const int level = coarse.level() > 0 ? coarse.level() + 1 : 0;
  auto fine = std::make_shared<const Mesh>(std::move(vertices), std::move(triangles), level,
                                           0.5 * coarse.h());
  Refinement out;
  out.mesh = fine;
  out.prolongation = Prolongation{mesh, fine, std::move(parent), std::move(embedding)};
  return out;
}

MeshPtr build_nested(int base_level, int level) {
  if (level < base_level) throw std::invalid_argument("build_nested: level below base level");
  MeshPtr mesh = build_uniform(base_level);
  for (int k = base_level; k < level; ++k) mesh = refine(mesh).mesh;
  return mesh;
}

namespace {

// Returns the next non-empty line split into tokens; tracks line numbers.
bool next_tokens(std::istream& in, int& line_no, std::vector<std::string>& tokens) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    tokens.clear();
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    if (!tokens.empty()) return true;
  }
  return false;
}

template <typename T>
T parse_number(const std::string& tok, int line_no) {
  std::istringstream ss(tok);
  T value{};
  ss >> value;
  if (ss.fail() || !ss.eof()) throw MeshParseError(line_no, "cannot parse '" + tok + "'");
  return value;
}

}  // namespace

MeshPtr parse_mesh(const std::string& text) {
  std::istringstream in(text);
  int line_no = 0;
  std::vector<std::string> tokens;
  if (!next_tokens(in, line_no, tokens)) throw MeshParseError(line_no, "empty file");
  if (tokens.size() != 3) throw MeshParseError(line_no, "header must be 'V E T'");
  const long nv = parse_number<long>(tokens[0], line_no);
  const long ne = parse_number<long>(tokens[1], line_no);
  const long nt = parse_number<long>(tokens[2], line_no);
  if (nv < 3 || nt < 1 || ne < 0) throw MeshParseError(line_no, "invalid counts in header");

  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(nv));
  for (long v = 0; v < nv; ++v) {
    if (!next_tokens(in, line_no, tokens)) throw MeshParseError(line_no + 1, "missing vertex line");
    if (tokens.size() != 2) throw MeshParseError(line_no, "vertex line must have 2 coordinates");
    vertices.emplace_back(parse_number<double>(tokens[0], line_no),
                          parse_number<double>(tokens[1], line_no));
  }
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(static_cast<std::size_t>(nt));
  for (long t = 0; t < nt; ++t) {
    if (!next_tokens(in, line_no, tokens)) throw MeshParseError(line_no + 1, "missing triangle line");
    if (tokens.size() != 3) throw MeshParseError(line_no, "triangle line must have 3 indices");
    std::array<int, 3> tri{};
    for (int i = 0; i < 3; ++i) {
      const long idx = parse_number<long>(tokens[i], line_no);
      if (idx < 0 || idx >= nv) throw MeshParseError(line_no, "vertex index out of range");
      tri[i] = static_cast<int>(idx);
    }
    triangles.push_back(tri);
  }
  if (next_tokens(in, line_no, tokens)) throw MeshParseError(line_no, "trailing data");

  auto mesh = std::make_shared<const Mesh>(std::move(vertices), std::move(triangles), 0);
  if (ne != mesh->num_edges()) {
    throw MeshParseError(1, "header edge count " + std::to_string(ne) + " differs from the " +
                                std::to_string(mesh->num_edges()) + " edges of the triangles");
  }
  return mesh;
}

MeshPtr load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_mesh(buffer.str());
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file " + path.string());
  out << mesh.num_vertices() << ' ' << mesh.num_edges() << ' ' << mesh.num_triangles() << '\n';
  out << std::setprecision(17);
  for (const Point& p : mesh.vertices()) out << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!out) throw std::runtime_error("error writing mesh file " + path.string());
}

}  // namespace plateopt
