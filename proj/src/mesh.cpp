#include "acoubem/mesh.hpp"

#include "acoubem/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

namespace acoubem {

void SurfaceMesh::update_normals() {
  normals.resize(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    const Vec3 n = (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
    const double len = n.norm();
    normals[t] = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
  }
}

double triangle_area(const SurfaceMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  return 0.5 * (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]).cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]]).norm();
}

double total_area(const SurfaceMesh& mesh) {
  double area = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) area += triangle_area(mesh, t);
  return area;
}

double triangle_max_edge(const SurfaceMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  double h = 0.0;
  for (int e = 0; e < 3; ++e) h = std::max(h, (mesh.vertices[tri[e]] - mesh.vertices[tri[(e + 1) % 3]]).norm());
  return h;
}

double max_edge_length(const SurfaceMesh& mesh) {
  double h = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) h = std::max(h, triangle_max_edge(mesh, t));
  return h;
}

double signed_volume(const SurfaceMesh& mesh) {
  double vol = 0.0;
  for (const auto& tri : mesh.triangles) {
    vol += mesh.vertices[tri[0]].dot(mesh.vertices[tri[1]].cross(mesh.vertices[tri[2]]));
  }
  return vol / 6.0;
}

Vec3 centroid(const SurfaceMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  return (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
}

std::vector<Vec3> vertex_normals(const SurfaceMesh& mesh) {
  std::vector<Vec3> acc(mesh.vertices.size(), Vec3::Zero());
  for (const auto& tri : mesh.triangles) {
    // cross product length is twice the area: area weighting for free
    const Vec3 n = (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]).cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
    for (int v : tri) acc[v] += n;
  }
  for (auto& n : acc) {
    const double len = n.norm();
    if (len > 0.0) n /= len;
  }
  return acc;
}

bool BoundingBox::overlaps(const BoundingBox& other) const {
  for (int d = 0; d < 3; ++d) {
    if (hi[d] <= other.lo[d] || other.hi[d] <= lo[d]) return false;
  }
  return true;
}

BoundingBox bounding_box(const SurfaceMesh& mesh) {
  BoundingBox box{Vec3::Constant(std::numeric_limits<double>::infinity()),
                  Vec3::Constant(-std::numeric_limits<double>::infinity())};
  for (const auto& v : mesh.vertices) {
    box.lo = box.lo.cwiseMin(v);
    box.hi = box.hi.cwiseMax(v);
  }
  return box;
}

Vec3 vertex_mean(const SurfaceMesh& mesh) {
  Vec3 c = Vec3::Zero();
  for (const auto& v : mesh.vertices) c += v;
  return mesh.vertices.empty() ? c : Vec3(c / static_cast<double>(mesh.vertices.size()));
}

double bounding_radius(const SurfaceMesh& mesh) {
  const Vec3 c = vertex_mean(mesh);
  double r = 0.0;
  for (const auto& v : mesh.vertices) r = std::max(r, (v - c).norm());
  return r;
}

SurfaceMesh translated(SurfaceMesh mesh, const Vec3& shift) {
  for (auto& v : mesh.vertices) v += shift;
  return mesh;
}

SurfaceMesh mirrored(SurfaceMesh mesh, int axis) {
  if (axis < 0 || axis > 2) throw Error(ErrorCode::InvalidArgument, "mirror axis must be 0, 1 or 2");
  for (auto& v : mesh.vertices) v[axis] = -v[axis];
  for (auto& tri : mesh.triangles) std::swap(tri[1], tri[2]);
  mesh.update_normals();
  return mesh;
}

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<int, int>& p) const noexcept {
    return std::hash<long long>()((static_cast<long long>(p.first) << 32) ^ static_cast<long long>(p.second));
  }
};

// One level of midpoint refinement on the unit sphere.
void subdivide_unit(std::vector<Vec3>& verts, std::vector<Triangle>& tris) {
  std::unordered_map<std::pair<int, int>, int, PairHash> midpoint;
  midpoint.reserve(tris.size() * 2);
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int idx = static_cast<int>(verts.size());
    verts.push_back((verts[a] + verts[b]).normalized());
    midpoint.emplace(key, idx);
    return idx;
  };
  std::vector<Triangle> out;
  out.reserve(tris.size() * 4);
  for (const auto& t : tris) {
    const int ab = mid(t[0], t[1]);
    const int bc = mid(t[1], t[2]);
    const int ca = mid(t[2], t[0]);
    out.push_back({t[0], ab, ca});
    out.push_back({t[1], bc, ab});
    out.push_back({t[2], ca, bc});
    out.push_back({ab, bc, ca});
  }
  tris = std::move(out);
}

void icosahedron(std::vector<Vec3>& verts, std::vector<Triangle>& tris) {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  verts = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
           {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  for (auto& v : verts) v.normalize();
  tris = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
          {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
          {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
}

}  // namespace

SurfaceMesh generate_icosphere(double radius, int subdivisions, const Vec3& center) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "icosphere radius must be positive");
  if (subdivisions < 0) throw Error(ErrorCode::InvalidArgument, "subdivisions must be nonnegative");
  SurfaceMesh mesh;
  icosahedron(mesh.vertices, mesh.triangles);
  for (int s = 0; s < subdivisions; ++s) subdivide_unit(mesh.vertices, mesh.triangles);
  for (auto& v : mesh.vertices) v = center + radius * v;
  mesh.update_normals();
  return mesh;
}

double icosphere_max_edge(double radius, int subdivisions) {
  // Every face of the icosahedron refines to a congruent patch, so one face suffices.
  std::vector<Vec3> verts;
  std::vector<Triangle> tris;
  icosahedron(verts, tris);
  tris.resize(1);
  for (int s = 0; s < subdivisions; ++s) subdivide_unit(verts, tris);
  double h = 0.0;
  for (const auto& t : tris) {
    for (int e = 0; e < 3; ++e) h = std::max(h, (verts[t[e]] - verts[t[(e + 1) % 3]]).norm());
  }
  return radius * h;
}

int subdivisions_for_density(double radius, double h_target, int cap) {
  if (!(h_target > 0.0)) throw Error(ErrorCode::InvalidArgument, "target mesh width must be positive");
  for (int s = 0; s <= cap; ++s) {
    if (icosphere_max_edge(radius, s) <= h_target) return s;
  }
  std::ostringstream msg;
  msg << "mesh width " << h_target << " m needs more than " << cap << " subdivisions for radius " << radius << " m";
  throw Error(ErrorCode::ResolutionOverflow, msg.str());
}

// ---------------------------------------------------------------------------
// MSH 2.2

namespace {

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    line = line.substr(first);
    return true;
  }
  return false;
}

void skip_section(std::istream& in, const std::string& name) {
  const std::string end = "$End" + name.substr(1);
  std::string line;
  while (next_content_line(in, line)) {
    if (line.rfind(end, 0) == 0) return;
  }
  throw Error(ErrorCode::MalformedHeader, "unterminated section " + name);
}

}  // namespace

SurfaceMesh parse_msh(std::istream& in) {
  std::string line;
  if (!next_content_line(in, line) || line.rfind("$MeshFormat", 0) != 0) {
    throw Error(ErrorCode::MalformedHeader, "file does not start with $MeshFormat");
  }
  if (!next_content_line(in, line)) throw Error(ErrorCode::MalformedHeader, "missing format line");
  {
    std::istringstream fmt(line);
    std::string version;
    int file_type = -1;
    fmt >> version >> file_type;
    if (version != "2.2") throw Error(ErrorCode::MalformedHeader, "unsupported MSH version '" + version + "', expected 2.2");
    if (file_type != 0) throw Error(ErrorCode::MalformedHeader, "only ASCII MSH files are supported");
  }
  skip_section(in, "$MeshFormat");

  std::vector<std::pair<long, Vec3>> nodes;
  std::vector<std::array<long, 3>> tri_nodes;
  bool have_nodes = false;
  bool have_elements = false;

  while (next_content_line(in, line)) {
    if (line.rfind("$Nodes", 0) == 0) {
      have_nodes = true;
      if (!next_content_line(in, line)) throw Error(ErrorCode::MalformedHeader, "missing node count");
      const long count = std::stol(line);
      nodes.reserve(static_cast<std::size_t>(std::max(0L, count)));
      for (long i = 0; i < count; ++i) {
        if (!next_content_line(in, line)) throw Error(ErrorCode::MalformedHeader, "truncated $Nodes section");
        std::istringstream row(line);
        long id;
        Vec3 x;
        if (!(row >> id >> x[0] >> x[1] >> x[2])) throw Error(ErrorCode::MalformedHeader, "bad node line: " + line);
        nodes.emplace_back(id, x);
      }
      skip_section(in, "$Nodes");
    } else if (line.rfind("$Elements", 0) == 0) {
      have_elements = true;
      if (!next_content_line(in, line)) throw Error(ErrorCode::MalformedHeader, "missing element count");
      const long count = std::stol(line);
      for (long i = 0; i < count; ++i) {
        if (!next_content_line(in, line)) throw Error(ErrorCode::MalformedHeader, "truncated $Elements section");
        std::istringstream row(line);
        long id, type, ntags;
        if (!(row >> id >> type >> ntags)) throw Error(ErrorCode::MalformedHeader, "bad element line: " + line);
        for (long t = 0; t < ntags; ++t) {
          long tag;
          row >> tag;
        }
        if (type != 2) continue;
        std::array<long, 3> tri{};
        if (!(row >> tri[0] >> tri[1] >> tri[2])) throw Error(ErrorCode::MalformedHeader, "bad triangle line: " + line);
        tri_nodes.push_back(tri);
      }
      skip_section(in, "$Elements");
    } else if (line[0] == '$' && line.rfind("$End", 0) != 0) {
      skip_section(in, line.substr(0, line.find_first_of(" \t")));
    }
  }
  if (!have_nodes || !have_elements) throw Error(ErrorCode::MalformedHeader, "missing $Nodes or $Elements section");
  if (tri_nodes.empty()) throw Error(ErrorCode::EmptyMesh, "no 3-node triangle elements");

  std::unordered_map<long, std::size_t> position;
  for (std::size_t i = 0; i < nodes.size(); ++i) position.emplace(nodes[i].first, i);
  std::vector<char> used(nodes.size(), 0);
  for (const auto& tri : tri_nodes) {
    for (long id : tri) {
      auto it = position.find(id);
      if (it == position.end()) throw Error(ErrorCode::DanglingNodeReference, "triangle references unknown node " + std::to_string(id));
      used[it->second] = 1;
    }
  }
  // dense renumbering in $Nodes order, dropping nodes no triangle uses
  std::vector<int> dense(nodes.size(), -1);
  SurfaceMesh mesh;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!used[i]) continue;
    dense[i] = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(nodes[i].second);
  }
  mesh.triangles.reserve(tri_nodes.size());
  for (const auto& tri : tri_nodes) {
    mesh.triangles.push_back({dense[position[tri[0]]], dense[position[tri[1]]], dense[position[tri[2]]]});
  }
  mesh.update_normals();
  return mesh;
}

SurfaceMesh parse_msh(const std::string& text) {
  std::istringstream in(text);
  return parse_msh(in);
}

SurfaceMesh read_msh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open mesh file " + path);
  return parse_msh(in);
}

void write_msh(std::ostream& out, const SurfaceMesh& mesh) {
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n" << mesh.vertices.size() << "\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& v = mesh.vertices[i];
    out << i + 1 << ' ' << v[0] << ' ' << v[1] << ' ' << v[2] << "\n";
  }
  out << "$EndNodes\n$Elements\n" << mesh.triangles.size() << "\n";
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    out << t + 1 << " 2 2 0 " << mesh.interface_id << ' ' << tri[0] + 1 << ' ' << tri[1] + 1 << ' ' << tri[2] + 1 << "\n";
  }
  out << "$EndElements\n";
}

void write_off(std::ostream& out, const SurfaceMesh& mesh) {
  out << mesh.vertices.size() << ' ' << mesh.triangles.size() << "\n" << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << v[0] << ' ' << v[1] << ' ' << v[2] << "\n";
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
}

SurfaceMesh read_off(std::istream& in) {
  std::size_t nv = 0, nt = 0;
  if (!(in >> nv >> nt)) throw Error(ErrorCode::MalformedHeader, "missing vertex/triangle counts");
  SurfaceMesh mesh;
  mesh.vertices.resize(nv);
  mesh.triangles.resize(nt);
  for (auto& v : mesh.vertices) {
    if (!(in >> v[0] >> v[1] >> v[2])) throw Error(ErrorCode::MalformedHeader, "truncated vertex rows");
  }
  for (auto& t : mesh.triangles) {
    if (!(in >> t[0] >> t[1] >> t[2])) throw Error(ErrorCode::MalformedHeader, "truncated triangle rows");
  }
  mesh.update_normals();
  return mesh;
}

// ---------------------------------------------------------------------------
// validation

std::string to_string(Diagnostic::Kind kind) {
  switch (kind) {
    case Diagnostic::Kind::NonManifoldEdge: return "non-manifold-edge";
    case Diagnostic::Kind::OpenBoundary: return "open-boundary";
    case Diagnostic::Kind::DegenerateTriangle: return "degenerate-triangle";
    case Diagnostic::Kind::IndexOutOfRange: return "index-out-of-range";
    case Diagnostic::Kind::InconsistentOrientation: return "inconsistent-orientation";
    case Diagnostic::Kind::OrientationFlipped: return "orientation flipped";
  }
  return "unknown";
}

bool ValidationResult::valid() const {
  return std::none_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) { return d.is_error(); });
}

bool ValidationResult::has(Diagnostic::Kind kind) const {
  return std::any_of(diagnostics.begin(), diagnostics.end(), [&](const Diagnostic& d) { return d.kind == kind; });
}

ValidationResult validate(const SurfaceMesh& input) {
  using Kind = Diagnostic::Kind;
  ValidationResult result{input, {}};
  SurfaceMesh& mesh = result.mesh;
  auto& diag = result.diagnostics;
  const int nv = static_cast<int>(mesh.vertices.size());

  if (mesh.triangles.empty()) diag.push_back({Kind::OpenBoundary, "mesh has no triangles"});

  bool indices_ok = true;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int v : mesh.triangles[t]) {
      if (v < 0 || v >= nv) {
        diag.push_back({Kind::IndexOutOfRange, "triangle " + std::to_string(t) + " references vertex " + std::to_string(v)});
        indices_ok = false;
      }
    }
  }
  if (!indices_ok) return result;

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (triangle_area(mesh, t) <= kDegenerateArea) {
      diag.push_back({Kind::DegenerateTriangle, "triangle " + std::to_string(t) + " has area <= 1e-16"});
    }
  }

  // undirected edge -> (incidence count, orientation balance)
  std::map<std::pair<int, int>, std::pair<int, int>> edges;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e], b = tri[(e + 1) % 3];
      auto& entry = edges[std::minmax(a, b)];
      entry.first += 1;
      entry.second += a < b ? 1 : -1;
    }
  }
  int open = 0, nonmanifold = 0, misoriented = 0;
  for (const auto& [edge, info] : edges) {
    if (info.first == 1) ++open;
    else if (info.first > 2) ++nonmanifold;
    else if (info.second != 0) ++misoriented;
  }
  if (open > 0) diag.push_back({Kind::OpenBoundary, std::to_string(open) + " edge(s) with a single incident triangle"});
  if (nonmanifold > 0) diag.push_back({Kind::NonManifoldEdge, std::to_string(nonmanifold) + " edge(s) with more than two incident triangles"});
  if (misoriented > 0) diag.push_back({Kind::InconsistentOrientation, std::to_string(misoriented) + " edge(s) traversed twice in the same direction"});

  if (result.valid() && signed_volume(mesh) < 0.0) {
    for (auto& tri : mesh.triangles) std::swap(tri[1], tri[2]);
    diag.push_back({Kind::OrientationFlipped, "orientation flipped"});
  }
  mesh.update_normals();
  return result;
}

SurfaceMesh validated(const SurfaceMesh& mesh) {
  auto result = validate(mesh);
  if (!result.valid()) {
    std::string msg;
    for (const auto& d : result.diagnostics) {
      if (d.is_error()) msg += (msg.empty() ? "" : "; ") + to_string(d.kind) + " (" + d.message + ")";
    }
    throw Error(ErrorCode::InvalidMesh, msg);
  }
  return std::move(result.mesh);
}

}  // namespace acoubem
