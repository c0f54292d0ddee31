#include "acoubem/fields.hpp"

#include "acoubem/error.hpp"
#include "acoubem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

namespace acoubem {

std::string to_string(const Region& r) {
  if (r.excluded) return "excluded";
  if (r.interface < 0) return "exterior";
  return "interior" + std::to_string(r.interface);
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // closest-point regions of the triangle (vertex, edge, face)
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return ap.norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return bp.norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + d1 / (d1 - d3) * ab)).norm();
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return cp.norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + d2 / (d2 - d6) * ac)).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (p - (a + ab * v + ac * w)).norm();
}

namespace {

// Moller-Trumbore; counts hits with t > 0.
bool ray_hits(const Vec3& o, const Vec3& dir, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 pv = dir.cross(e2);
  const double det = e1.dot(pv);
  if (std::abs(det) < 1e-300) return false;
  const double inv = 1.0 / det;
  const Vec3 tv = o - a;
  const double u = tv.dot(pv) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qv = tv.cross(e1);
  const double v = dir.dot(qv) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  return e2.dot(qv) * inv > 0.0;
}

}  // namespace

Region classify_point(const std::vector<std::shared_ptr<const SurfaceMesh>>& meshes, const Vec3& x) {
  // an irrational-looking direction avoids hitting edges of structured meshes
  const Vec3 dir = Vec3(0.5773, 0.5171, 0.6318).normalized();
  Region region;
  for (std::size_t m = 0; m < meshes.size(); ++m) {
    const auto& mesh = *meshes[m];
    const auto box = bounding_box(mesh);
    const double pad = max_edge_length(mesh);
    const bool near_box = (x.array() >= box.lo.array() - pad).all() && (x.array() <= box.hi.array() + pad).all();
    if (near_box) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_t = 0;
      for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double d = point_triangle_distance(x, mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
        if (d < best) {
          best = d;
          best_t = t;
        }
      }
      if (best < 0.5 * triangle_max_edge(mesh, best_t)) {
        region.excluded = true;
        region.interface = -1;
        return region;
      }
    }
    const bool in_box = (x.array() >= box.lo.array()).all() && (x.array() <= box.hi.array()).all();
    if (!in_box) continue;
    int hits = 0;
    for (const auto& tri : mesh.triangles) hits += ray_hits(x, dir, mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    if (hits % 2 == 1) region.interface = static_cast<int>(m);
  }
  return region;
}

std::vector<Region> classify_points(const std::vector<std::shared_ptr<const SurfaceMesh>>& meshes,
                                    const std::vector<Vec3>& points) {
  std::vector<Region> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = classify_point(meshes, points[i]);
  return out;
}

std::vector<Vec3> square_grid_points(const Vec3& center, int n, double side) {
  if (n < 2 || !(side > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid needs n >= 2 and side > 0");
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      pts.push_back(center + Vec3(-0.5 * side + side * i / (n - 1), -0.5 * side + side * j / (n - 1), 0.0));
    }
  }
  return pts;
}

namespace {

constexpr double kInvFourPi = 1.0 / (4.0 * std::numbers::pi);
constexpr int kMaxDepth = 8;
constexpr double kRefineRatio = 3.0;  // subdivide while distance < ratio * diameter

struct PotentialIntegrator {
  const SurfaceMesh& mesh;
  cplx ik;
  const CVector& psi;
  const CVector& phi;
  const Vec3& x;
  const TriangleRule& rule;

  void triangle(const Triangle& dofs, const Vec3& normal, const std::array<Vec3, 3>& p,
                const std::array<Vec3, 3>& bary, int depth, PotentialPair& acc) const {
    const Vec3 center = (p[0] + p[1] + p[2]) / 3.0;
    const double diam = std::max({(p[1] - p[0]).norm(), (p[2] - p[1]).norm(), (p[0] - p[2]).norm()});
    if (depth < kMaxDepth && (center - x).norm() < kRefineRatio * diam) {
      const std::array<Vec3, 3> mp{0.5 * (p[0] + p[1]), 0.5 * (p[1] + p[2]), 0.5 * (p[2] + p[0])};
      const std::array<Vec3, 3> mb{0.5 * (bary[0] + bary[1]), 0.5 * (bary[1] + bary[2]), 0.5 * (bary[2] + bary[0])};
      triangle(dofs, normal, {p[0], mp[0], mp[2]}, {bary[0], mb[0], mb[2]}, depth + 1, acc);
      triangle(dofs, normal, {p[1], mp[1], mp[0]}, {bary[1], mb[1], mb[0]}, depth + 1, acc);
      triangle(dofs, normal, {p[2], mp[2], mp[1]}, {bary[2], mb[2], mb[1]}, depth + 1, acc);
      triangle(dofs, normal, {mp[0], mp[1], mp[2]}, {mb[0], mb[1], mb[2]}, depth + 1, acc);
      return;
    }
    const double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& b = rule.barycentric[q];
      const Vec3 y = b[0] * p[0] + b[1] * p[1] + b[2] * p[2];
      const Vec3 lam = b[0] * bary[0] + b[1] * bary[1] + b[2] * bary[2];
      const Vec3 d = y - x;
      const double r = d.norm();
      const cplx g = std::exp(ik * r) * kInvFourPi / r;
      const cplx dg = g * (ik - 1.0 / r) * d.dot(normal) / r;
      const double w = rule.weights[q] * area;
      const cplx s = lam[0] * psi[dofs[0]] + lam[1] * psi[dofs[1]] + lam[2] * psi[dofs[2]];
      const cplx f = lam[0] * phi[dofs[0]] + lam[1] * phi[dofs[1]] + lam[2] * phi[dofs[2]];
      acc.single_layer += w * g * s;
      acc.double_layer += w * dg * f;
    }
  }
};

}  // namespace

PotentialPair layer_potentials(const SurfaceMesh& mesh, cplx k, const CVector& psi, const CVector& phi, const Vec3& x) {
  const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
  if (psi.size() != n || phi.size() != n) throw Error(ErrorCode::DimensionMismatch, "density length mismatch");
  static const TriangleRule rule = triangle_rule(6);
  PotentialIntegrator integ{mesh, cplx(0.0, 1.0) * k, psi, phi, x, rule};
  PotentialPair acc{0.0, 0.0};
  const std::array<Vec3, 3> unit{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    integ.triangle(tri, mesh.normals[t], {mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]}, unit, 0, acc);
  }
  return acc;
}

FieldGrid evaluate_potentials(const BlockSystem& system, const SurfaceSolution& solution, const PlaneWave& wave,
                              const std::vector<Vec3>& points, int threads) {
  const std::size_t l = system.interface_count();
  if (solution.phi.size() != l || solution.psi.size() != l) throw Error(ErrorCode::DimensionMismatch, "solution interface count mismatch");
  std::vector<std::shared_ptr<const SurfaceMesh>> meshes;
  for (std::size_t m = 0; m < l; ++m) meshes.push_back(system.interface(m).space->mesh_ptr());
  PlaneWave inc = wave;
  inc.k0 = system.k_exterior();

  FieldGrid grid;
  grid.points = points;
  grid.regions.resize(points.size());
  grid.values.assign(points.size(), cplx(0.0, 0.0));
  std::vector<CVector> psi_interior(l);
  for (std::size_t m = 0; m < l; ++m) psi_interior[m] = solution.psi[m] / system.interface(m).density_ratio;

  auto work = [&](std::size_t i) {
    const Vec3& x = points[i];
    const Region reg = classify_point(meshes, x);
    grid.regions[i] = reg;
    if (reg.excluded) return;
    if (reg.interface < 0) {
      cplx u = inc.value(x);
      for (std::size_t m = 0; m < l; ++m) {
        const auto pot = layer_potentials(*meshes[m], system.k_exterior(), solution.psi[m], solution.phi[m], x);
        u += pot.double_layer - pot.single_layer;
      }
      grid.values[i] = u;
    } else {
      const auto m = static_cast<std::size_t>(reg.interface);
      const auto pot = layer_potentials(*meshes[m], system.interface(m).k_interior, psi_interior[m], solution.phi[m], x);
      grid.values[i] = pot.single_layer - pot.double_layer;
    }
  };

  const unsigned nthreads = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  if (nthreads == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nthreads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < points.size(); i += nthreads) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  return grid;
}

namespace {

void check_masks(const FieldGrid& a, const FieldGrid& b) {
  if (a.values.size() != b.values.size() || a.regions.size() != b.regions.size()) {
    throw Error(ErrorCode::MaskMismatch, "grids have different sizes");
  }
  for (std::size_t i = 0; i < a.regions.size(); ++i) {
    if (a.regions[i].excluded != b.regions[i].excluded) throw Error(ErrorCode::MaskMismatch, "exclusion masks differ");
  }
}

}  // namespace

double relative_error_grid(const FieldGrid& computed, const FieldGrid& reference) {
  check_masks(computed, reference);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < computed.values.size(); ++i) {
    if (reference.regions[i].excluded) continue;
    const double diff = std::abs(computed.values[i]) - std::abs(reference.values[i]);
    num += diff * diff;
    den += std::norm(reference.values[i]);
  }
  return std::sqrt(num / den);
}

double relative_complex_error_grid(const FieldGrid& computed, const FieldGrid& reference) {
  check_masks(computed, reference);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < computed.values.size(); ++i) {
    if (reference.regions[i].excluded) continue;
    num += std::norm(computed.values[i] - reference.values[i]);
    den += std::norm(reference.values[i]);
  }
  return std::sqrt(num / den);
}

void write_grid_csv(std::ostream& out, const FieldGrid& grid) {
  out << "x,y,z,re,im,region\n";
  out.precision(17);
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const auto& p = grid.points[i];
    out << p[0] << ',' << p[1] << ',' << p[2] << ',' << grid.values[i].real() << ',' << grid.values[i].imag() << ','
        << to_string(grid.regions[i]) << '\n';
  }
}

}  // namespace acoubem
