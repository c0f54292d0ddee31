#pragma once

#include "acoubem/mesh.hpp"

#include <Eigen/Core>

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace acoubem {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;

/// Homogeneous acoustic medium with a frequency power-law attenuation.
/// `alpha` is in Np/m at 1 MHz, `b` the frequency exponent.
struct Material {
  std::string name;
  double rho = 1000.0;
  double c = 1500.0;
  double alpha = 0.0;
  double b = 0.0;

  bool operator==(const Material&) const = default;
};

/// Throws InvalidArgument unless rho > 0, c > 0, alpha >= 0, b >= 0.
void check_material(const Material& m);

Material water();
Material fat();
Material bone();

/// Looks up "water", "fat" or "bone"; std::nullopt for anything else.
std::optional<Material> material_preset(const std::string& name);

/// k = 2 pi f / c + i alpha (f 1e-6)^b.
cplx wavenumber(const Material& mat, double frequency);

/// Wavelength 2 pi / Re(k).
double wavelength(cplx k);

/// Target element size min_m(lambda_m) / n_h over the given materials.
double element_size(const std::vector<Material>& materials, double frequency, double n_h);

/// k (1 + 0.4 i (Re(k) r_eff)^(-2/3)).
cplx damped_wavenumber(cplx k, double r_eff);

/// Localised square-root parameters for one interface.
struct OsrcParams {
  int n_pade = 4;
  double theta = 3.14159265358979323846 / 3.0;
  double r_eff = 0.0;
  cplx k_eps{0.0, 0.0};
};

OsrcParams make_osrc_params(cplx k, double r_eff, int n_pade = 4, double theta = 3.14159265358979323846 / 3.0);

struct PlaneWave {
  Vec3 direction = Vec3(1.0, 0.0, 0.0);
  cplx amplitude{1.0, 0.0};
  cplx k0{1.0, 0.0};

  PlaneWave() = default;
  PlaneWave(const Vec3& dir, cplx k, cplx amp = {1.0, 0.0});

  cplx value(const Vec3& x) const;
  /// Normal derivative n . grad u_inc at x.
  cplx normal_derivative(const Vec3& x, const Vec3& n) const;
};

struct TraceCoefficients {
  CVector dirichlet;
  CVector neumann;
};

/// Vertex samples of the incident field and of its normal derivative, with
/// area-weighted vertex normals.
TraceCoefficients incident_traces(const PlaneWave& wave, const SurfaceMesh& mesh);

/// Galerkin moments int u_inc phi_i and int (n . grad u_inc) phi_i over the
/// flat triangles, with face normals and a 12-point rule per triangle.
TraceCoefficients incident_moments(const PlaneWave& wave, const SurfaceMesh& mesh);

}  // namespace acoubem
