#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace acoubem {

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<int, 3>;

/// Closed triangulated interface with per-triangle outward unit normals.
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec3> normals;
  int interface_id = 0;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }

  /// Recomputes `normals` from the triangle winding.
  void update_normals();
};

double triangle_area(const SurfaceMesh& mesh, std::size_t t);
double total_area(const SurfaceMesh& mesh);
double max_edge_length(const SurfaceMesh& mesh);
double triangle_max_edge(const SurfaceMesh& mesh, std::size_t t);
double signed_volume(const SurfaceMesh& mesh);
Vec3 centroid(const SurfaceMesh& mesh, std::size_t t);

/// Area-weighted average of the incident face normals, normalised.
std::vector<Vec3> vertex_normals(const SurfaceMesh& mesh);

struct BoundingBox {
  Vec3 lo;
  Vec3 hi;
  bool overlaps(const BoundingBox& other) const;
};
BoundingBox bounding_box(const SurfaceMesh& mesh);

/// Radius of the sphere about the vertex mean that encloses every vertex.
double bounding_radius(const SurfaceMesh& mesh);
Vec3 vertex_mean(const SurfaceMesh& mesh);

SurfaceMesh translated(SurfaceMesh mesh, const Vec3& shift);

/// Reflects the mesh across the coordinate plane orthogonal to `axis`.
/// Vertex numbering is preserved and the winding reversed, so vertex i of
/// the result is the mirror image of vertex i of the input.
SurfaceMesh mirrored(SurfaceMesh mesh, int axis);

SurfaceMesh generate_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());

/// Maximum edge length of the level-`subdivisions` icosphere of the given radius.
double icosphere_max_edge(double radius, int subdivisions);

/// Smallest level whose maximum edge length does not exceed `h_target`.
int subdivisions_for_density(double radius, double h_target, int cap = 9);

/// ASCII Gmsh MSH 2.2 reader; keeps 3-node triangles only.
SurfaceMesh parse_msh(std::istream& in);
SurfaceMesh parse_msh(const std::string& text);
SurfaceMesh read_msh_file(const std::string& path);
void write_msh(std::ostream& out, const SurfaceMesh& mesh);

/// Plain "vertex count, triangle count, rows" dump used for fixtures.
void write_off(std::ostream& out, const SurfaceMesh& mesh);
SurfaceMesh read_off(std::istream& in);

struct Diagnostic {
  enum class Kind { NonManifoldEdge, OpenBoundary, DegenerateTriangle, IndexOutOfRange, InconsistentOrientation, OrientationFlipped };
  Kind kind;
  std::string message;

  bool is_error() const { return kind != Kind::OrientationFlipped; }
  bool operator==(const Diagnostic&) const = default;
};

std::string to_string(Diagnostic::Kind kind);

struct ValidationResult {
  SurfaceMesh mesh;
  std::vector<Diagnostic> diagnostics;

  bool valid() const;
  bool has(Diagnostic::Kind kind) const;
};

/// Checks the closed-manifold invariants, orients the mesh outward (global
/// flip when the enclosed signed volume is negative) and recomputes normals.
ValidationResult validate(const SurfaceMesh& mesh);

/// Throws InvalidMesh when validate() reports an error; returns the oriented mesh.
SurfaceMesh validated(const SurfaceMesh& mesh);

constexpr double kDegenerateArea = 1e-16;

}  // namespace acoubem
