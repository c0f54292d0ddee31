#include "acoubem/medium.hpp"

#include "acoubem/error.hpp"
#include "acoubem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace acoubem {

void check_material(const Material& m) {
  if (!(m.rho > 0.0) || !(m.c > 0.0) || !(m.alpha >= 0.0) || !(m.b >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "material '" + m.name + "' needs rho > 0, c > 0, alpha >= 0, b >= 0");
  }
}

Material water() { return {"water", 1000.0, 1500.0, 0.015, 2.0}; }
Material fat() { return {"fat", 917.0, 1412.0, 9.334, 1.0}; }
Material bone() { return {"bone", 1912.0, 4080.0, 47.20, 1.0}; }

std::optional<Material> material_preset(const std::string& name) {
  if (name == "water") return water();
  if (name == "fat") return fat();
  if (name == "bone") return bone();
  return std::nullopt;
}

cplx wavenumber(const Material& mat, double frequency) {
  if (!(frequency > 0.0)) throw Error(ErrorCode::InvalidArgument, "frequency must be positive");
  check_material(mat);
  const double re = 2.0 * std::numbers::pi * frequency / mat.c;
  const double im = mat.alpha * std::pow(frequency * 1e-6, mat.b);
  return {re, im};
}

double wavelength(cplx k) { return 2.0 * std::numbers::pi / k.real(); }

double element_size(const std::vector<Material>& materials, double frequency, double n_h) {
  if (materials.empty()) throw Error(ErrorCode::InvalidArgument, "element size needs at least one material");
  if (!(n_h >= 2.0)) throw Error(ErrorCode::InvalidArgument, "n_h must be >= 2");
  double lambda = std::numeric_limits<double>::infinity();
  for (const auto& m : materials) lambda = std::min(lambda, wavelength(wavenumber(m, frequency)));
  return lambda / n_h;
}

cplx damped_wavenumber(cplx k, double r_eff) {
  const double kr = k.real() * r_eff;
  if (!(kr > 0.0)) throw Error(ErrorCode::NonpositiveKr, "Re(k) * r_eff must be positive");
  return k * cplx(1.0, 0.4 * std::pow(kr, -2.0 / 3.0));
}

OsrcParams make_osrc_params(cplx k, double r_eff, int n_pade, double theta) {
  OsrcParams p;
  p.n_pade = n_pade;
  p.theta = theta;
  p.r_eff = r_eff;
  p.k_eps = damped_wavenumber(k, r_eff);
  return p;
}

PlaneWave::PlaneWave(const Vec3& dir, cplx k, cplx amp) : direction(dir), amplitude(amp), k0(k) {
  const double len = direction.norm();
  if (!(len > 0.0)) throw Error(ErrorCode::InvalidArgument, "plane wave direction must be nonzero");
  direction /= len;
}

cplx PlaneWave::value(const Vec3& x) const {
  return amplitude * std::exp(cplx(0.0, 1.0) * k0 * direction.dot(x));
}

cplx PlaneWave::normal_derivative(const Vec3& x, const Vec3& n) const {
  return cplx(0.0, 1.0) * k0 * direction.dot(n) * value(x);
}

TraceCoefficients incident_traces(const PlaneWave& wave, const SurfaceMesh& mesh) {
  const auto normals = vertex_normals(mesh);
  const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
  TraceCoefficients out{CVector(n), CVector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.dirichlet[i] = wave.value(mesh.vertices[i]);
    out.neumann[i] = wave.normal_derivative(mesh.vertices[i], normals[i]);
  }
  return out;
}

TraceCoefficients incident_moments(const PlaneWave& wave, const SurfaceMesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
  TraceCoefficients out{CVector::Zero(n), CVector::Zero(n)};
  const TriangleRule rule = triangle_rule(12);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const double area = 0.5 * (b - a).cross(c - a).norm();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& l = rule.barycentric[q];
      const Vec3 x = l[0] * a + l[1] * b + l[2] * c;
      const cplx g = area * rule.weights[q] * wave.value(x);
      const cplx dn = area * rule.weights[q] * wave.normal_derivative(x, mesh.normals[t]);
      for (int i = 0; i < 3; ++i) {
        out.dirichlet[tri[i]] += l[i] * g;
        out.neumann[tri[i]] += l[i] * dn;
      }
    }
  }
  return out;
}

}  // namespace acoubem
