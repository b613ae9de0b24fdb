#include "plateopt/export.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace plateopt {

ExportError::ExportError(const std::filesystem::path& path, const std::string& what)
    : std::runtime_error(path.string() + ": " + what), path_(path) {}

namespace {

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw ExportError(path, "cannot create directory: " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw ExportError(path, "cannot open for writing");
  out << text;
  if (!out) throw ExportError(path, "write failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ExportError(path, "cannot open for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

std::string eoc_table_csv(const EocTable& table) {
  const bool h1 = !table.rows.empty() && table.eoc_h1.size() + 1 == table.rows.size() &&
                  std::all_of(table.rows.begin(), table.rows.end(), [](const ErrorRecord& r) { return r.err_h1_y.has_value(); });
  std::ostringstream out;
  out << "level,h,gamma,err_linf_y,eoc_y,err_l2_l,eoc_l,newton_iters,wall_s";
  if (h1) out << ",err_h1_y,eoc_h1_y";
  out << '\n';
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const ErrorRecord& r = table.rows[i];
    auto eoc = [&](const std::vector<double>& v) { return i == 0 || i - 1 >= v.size() ? std::string() : full(v[i - 1]); };
    out << r.level << ',' << full(r.h) << ',' << full(r.gamma) << ',' << full(r.err_linf_y) << ',' << eoc(table.eoc_y)
        << ',' << full(r.err_l2_l) << ',' << eoc(table.eoc_l) << ',' << r.newton_iters << ',' << full(r.wall_s);
    if (h1) out << ',' << full(*r.err_h1_y) << ',' << eoc(table.eoc_h1);
    out << '\n';
  }
  return out.str();
}

void write_eoc_table(const EocTable& table, const std::filesystem::path& path) {
  write_text(path, eoc_table_csv(table));
}

EocTable parse_eoc_table(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("EOC table CSV is empty");
  const auto head = split(line, ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < head.size(); ++i) col[head[i]] = i;
  for (const char* need : {"level", "h", "gamma", "err_linf_y", "eoc_y", "err_l2_l", "eoc_l", "newton_iters", "wall_s"}) {
    if (!col.count(need)) throw std::invalid_argument(std::string("EOC table CSV lacks column ") + need);
  }
  const bool h1 = col.count("err_h1_y") > 0;
  EocTable t;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != head.size()) {
      throw std::invalid_argument("EOC table CSV line " + std::to_string(lineno) + ": wrong number of cells");
    }
    auto num = [&](const char* name) { return std::stod(cells[col.at(name)]); };
    ErrorRecord r;
    r.level = std::stoi(cells[col.at("level")]);
    r.h = num("h");
    r.gamma = num("gamma");
    r.err_linf_y = num("err_linf_y");
    r.err_l2_l = num("err_l2_l");
    r.newton_iters = std::stoi(cells[col.at("newton_iters")]);
    r.wall_s = num("wall_s");
    if (h1) r.err_h1_y = num("err_h1_y");
    if (!t.rows.empty()) {
      t.eoc_y.push_back(num("eoc_y"));
      t.eoc_l.push_back(num("eoc_l"));
      if (h1) t.eoc_h1.push_back(num("eoc_h1_y"));
    }
    t.rows.push_back(r);
  }
  return t;
}

EocTable read_eoc_table(const std::filesystem::path& path) {
  try {
    return parse_eoc_table(read_text(path));
  } catch (const ExportError&) {
    throw;
  } catch (const std::exception& e) {
    throw ExportError(path, e.what());
  }
}

std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "level,h,gamma,err_linf_y,err_l2_l,err_h1_y,reg_linf_y,reg_l2_l,newton_iters,status,wall_s\n";
  for (const auto& r : sweep.records) {
    const bool ok = r.status == NewtonStatus::converged;
    auto cell = [&](double v) { return ok ? full(v) : std::string(); };
    out << r.errors.level << ',' << full(r.errors.h) << ',' << full(r.errors.gamma) << ',' << cell(r.errors.err_linf_y)
        << ',' << cell(r.errors.err_l2_l) << ',' << (ok && r.errors.err_h1_y ? full(*r.errors.err_h1_y) : "") << ','
        << cell(r.reg_linf_y) << ',' << cell(r.reg_l2_l) << ',' << r.errors.newton_iters << ',' << to_string(r.status)
        << ',' << full(r.errors.wall_s) << '\n';
  }
  return out.str();
}

void write_sweep(const SweepResult& sweep, const std::filesystem::path& path) { write_text(path, sweep_csv(sweep)); }

std::string vtk_text(const Mesh& mesh, const VtkData& data) {
  for (const auto& [name, v] : data.cell) {
    if (v.size() != mesh.num_triangles()) throw std::invalid_argument("VTK cell field '" + name + "' has wrong size");
  }
  for (const auto& [name, v] : data.point) {
    if (v.size() != mesh.num_vertices()) throw std::invalid_argument("VTK point field '" + name + "' has wrong size");
  }
  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\nplateopt\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices()) out << full(p[0]) << ' ' << full(p[1]) << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (int t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
  auto block = [&](const std::map<std::string, Eigen::VectorXd>& fields) {
    for (const auto& [name, v] : fields) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index i = 0; i < v.size(); ++i) out << full(v[i]) << '\n';
    }
  };
  if (!data.cell.empty()) {
    out << "CELL_DATA " << mesh.num_triangles() << '\n';
    block(data.cell);
  }
  if (!data.point.empty()) {
    out << "POINT_DATA " << mesh.num_vertices() << '\n';
    block(data.point);
  }
  return out.str();
}

void write_vtk(const Mesh& mesh, const VtkData& data, const std::filesystem::path& path) {
  write_text(path, vtk_text(mesh, data));
}

VtkData state_fields(const OptState& s, const ProblemSpec& spec) {
  VtkData d;
  if (s.discretization == Discretization::rt0) {
    const P0Field y = rt0::state(s);
    const P0Field l = recover_control(rt0::adjoint(s), rt0::datum(s), spec);
    d.cell["y"] = y.values;
    d.cell["q"] = rt0::adjoint(s).values;
    d.cell["z"] = s.datum;
    d.cell["l"] = l.values;
    d.cell["u"] = recover_thickness(l, spec).values;
    d.cell["nu"] = moreau_yosida_multiplier(y, s.gamma, spec.state_offset).values;
  } else {
    const P1Field y = p1::state(s);
    const ControlFunction l(p1::adjoint(s), p1::datum(s), spec);
    d.point["y"] = y.values;
    d.point["q"] = p1::adjoint(s).values;
    d.point["z"] = s.datum;
    d.point["nu"] = moreau_yosida_multiplier(y, s.gamma, spec.state_offset).values;
    const Mesh& m = *s.mesh;
    Eigen::VectorXd lc(m.num_triangles()), uc(m.num_triangles());
    const Eigen::Vector3d centroid = Eigen::Vector3d::Constant(1.0 / 3.0);
    for (int t = 0; t < m.num_triangles(); ++t) {
      lc[t] = l.eval(t, centroid);
      uc[t] = thickness_from_control(lc[t], spec);
    }
    d.cell["l"] = lc;
    d.cell["u"] = uc;
  }
  return d;
}

std::vector<Segment> active_set_boundary(const OptState& s, const ProblemSpec& spec, int refinements) {
  std::vector<Segment> out;
  const Mesh& m = *s.mesh;
  const ControlLaw law(spec);
  const std::pair<const char*, ControlRegion> sets[] = {{"lower_clamp", ControlRegion::lower_clamp},
                                                        {"upper_clamp", ControlRegion::upper_clamp}};
  if (s.discretization == Discretization::rt0) {
    const P0Field q = rt0::adjoint(s);
    for (int e = 0; e < m.num_edges(); ++e) {
      const Edge& edge = m.edge(e);
      if (edge.boundary()) continue;
      const ControlRegion a = law.classify(3.0 * q(edge.triangles[0]) * s.datum[edge.triangles[0]]);
      const ControlRegion b = law.classify(3.0 * q(edge.triangles[1]) * s.datum[edge.triangles[1]]);
      for (const auto& [name, region] : sets) {
        if ((a == region) != (b == region)) out.push_back({name, m.vertex(edge.vertices[0]), m.vertex(edge.vertices[1])});
      }
    }
    return out;
  }
  if (refinements < 0 || refinements > 8) throw std::invalid_argument("active_set_boundary: refinements out of range");
  const ControlFunction l(p1::adjoint(s), p1::datum(s), spec);
  const int n = 1 << refinements;
  auto bary = [&](int i, int j) { return Eigen::Vector3d(1.0 - double(i + j) / n, double(i) / n, double(j) / n); };
  for (int t = 0; t < m.num_triangles(); ++t) {
    for (const auto& [name, region] : sets) {
      const double level = region == ControlRegion::lower_clamp ? law.projection_max() : law.projection_min();
      auto trace = [&](const std::array<Eigen::Vector3d, 3>& b) {
        std::array<double, 3> f;
        for (int k = 0; k < 3; ++k) f[k] = l.argument(t, b[k]) - level;
        std::vector<Point> hits;
        for (int k = 0; k < 3; ++k) {
          const int k2 = (k + 1) % 3;
          if ((f[k] < 0.0) != (f[k2] < 0.0)) {
            const double w = f[k] / (f[k] - f[k2]);
            hits.push_back(m.map(t, (1.0 - w) * b[k] + w * b[k2]));
          }
        }
        if (hits.size() == 2) out.push_back({name, hits[0], hits[1]});
      };
      for (int i = 0; i < n; ++i) {
        for (int j = 0; i + j < n; ++j) {
          trace({bary(i, j), bary(i + 1, j), bary(i, j + 1)});
          if (i + j + 1 < n) trace({bary(i + 1, j), bary(i + 1, j + 1), bary(i, j + 1)});
        }
      }
    }
  }
  return out;
}

std::string segments_csv(const std::vector<Segment>& segments) {
  std::ostringstream out;
  out << "set,x0,y0,x1,y1\n";
  for (const auto& s : segments) {
    out << s.set << ',' << full(s.a[0]) << ',' << full(s.a[1]) << ',' << full(s.b[0]) << ',' << full(s.b[1]) << '\n';
  }
  return out.str();
}

void write_segments(const std::vector<Segment>& segments, const std::filesystem::path& path) {
  write_text(path, segments_csv(segments));
}

}  // namespace plateopt
