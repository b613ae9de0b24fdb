#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "plateopt/harness.hpp"

namespace plateopt {

/// I/O failure carrying the offending path.
class ExportError : public std::runtime_error {
 public:
  ExportError(const std::filesystem::path& path, const std::string& what);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Header: level,h,gamma,err_linf_y,eoc_y,err_l2_l,eoc_l,newton_iters,wall_s
/// followed by err_h1_y,eoc_h1_y when the table has H1 errors. EOC cells of
/// the first row are empty. Values are written with 17 significant digits.
std::string eoc_table_csv(const EocTable& table);
void write_eoc_table(const EocTable& table, const std::filesystem::path& path);
EocTable parse_eoc_table(const std::string& csv);
EocTable read_eoc_table(const std::filesystem::path& path);

std::string sweep_csv(const SweepResult& sweep);
void write_sweep(const SweepResult& sweep, const std::filesystem::path& path);

/// Legacy ASCII VTK unstructured grid (triangles, cell type 5).
struct VtkData {
  std::map<std::string, Eigen::VectorXd> cell;
  std::map<std::string, Eigen::VectorXd> point;
};
std::string vtk_text(const Mesh& mesh, const VtkData& data);
void write_vtk(const Mesh& mesh, const VtkData& data, const std::filesystem::path& path);

/// Fields of a solved state ready for export: y, q, z, l, u, nu (cell data
/// for RT0; point data for y, q, z and cell samples of l, u for P1).
VtkData state_fields(const OptState& s, const ProblemSpec& spec);

struct Segment {
  std::string set;  // "lower_clamp" or "upper_clamp"
  Point a, b;
};

/// Boundaries of the clamped control regions. RT0: mesh edges between
/// clamped and unclamped elements. P1: the level sets 3 q_h z_h = M^4 and
/// = m^4, traced on a `refinements`-fold subdivision of every triangle.
std::vector<Segment> active_set_boundary(const OptState& s, const ProblemSpec& spec, int refinements = 3);
std::string segments_csv(const std::vector<Segment>& segments);
void write_segments(const std::vector<Segment>& segments, const std::filesystem::path& path);

/// Six significant digits in scientific notation.
std::string sci(double v);

}  // namespace plateopt
