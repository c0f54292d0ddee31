#pragma once

#include "acoubem/formulations.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace acoubem {

/// interface < 0: exterior; excluded: within h_local/2 of a surface.
struct Region {
  int interface = -1;
  bool excluded = false;

  bool exterior() const { return interface < 0 && !excluded; }
  bool operator==(const Region&) const = default;
};

std::string to_string(const Region& r);

/// Ray-casting parity per interface. h_local is the longest edge of the
/// closest triangle.
Region classify_point(const std::vector<std::shared_ptr<const SurfaceMesh>>& meshes, const Vec3& x);
std::vector<Region> classify_points(const std::vector<std::shared_ptr<const SurfaceMesh>>& meshes,
                                    const std::vector<Vec3>& points);

/// Unsigned distance from x to a triangle.
double point_triangle_distance(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c);

struct FieldGrid {
  std::vector<Vec3> points;
  std::vector<Region> regions;
  std::vector<cplx> values;  // zero at excluded points
};

/// 101 x 101 points on a 3 x 3 cm square in the x-y plane centred at `center`.
std::vector<Vec3> square_grid_points(const Vec3& center = Vec3::Zero(), int n = 101, double side = 0.03);

/// Single-layer and double-layer potentials of P1 densities at x:
/// V[psi](x) = int G psi, K[phi](x) = int dG/dn_y phi. Triangles close to x
/// are subdivided adaptively.
struct PotentialPair {
  cplx single_layer;
  cplx double_layer;
};
PotentialPair layer_potentials(const SurfaceMesh& mesh, cplx k, const CVector& psi, const CVector& phi, const Vec3& x);

/// Total field at the points: u_inc + sum (K_0 phi - V_0 psi) outside,
/// V_m[(rho_m/rho_0) psi_m] - K_m phi_m inside interface m.
FieldGrid evaluate_potentials(const BlockSystem& system, const SurfaceSolution& solution, const PlaneWave& wave,
                              const std::vector<Vec3>& points, int threads = 0);

/// || |computed| - |reference| ||_2 / || |reference| ||_2 over non-excluded points.
double relative_error_grid(const FieldGrid& computed, const FieldGrid& reference);
/// Complex-valued variant || computed - reference || / || reference ||.
double relative_complex_error_grid(const FieldGrid& computed, const FieldGrid& reference);

/// CSV columns x,y,z,re,im,region.
void write_grid_csv(std::ostream& out, const FieldGrid& grid);

}  // namespace acoubem
