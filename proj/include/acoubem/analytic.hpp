#pragma once

#include "acoubem/medium.hpp"

#include <vector>

namespace acoubem {

enum class BesselKind { J, Y, H1 };

/// Spherical Bessel j_n, y_n or Hankel h1_n = j_n + i y_n for n = 0..n_max.
/// j_n uses Miller's downward recurrence where n > |z| and the upward one
/// elsewhere; y_n is always computed upward. y_n and h1_n throw PoleAtZero at z = 0.
std::vector<cplx> spherical_bessel_array(BesselKind kind, int n_max, cplx z);
cplx spherical_bessel(BesselKind kind, int n, cplx z);

/// f_n'(z) = f_{n-1}(z) - (n + 1) f_n(z) / z, with f_0' = -f_1.
std::vector<cplx> spherical_bessel_derivative(const std::vector<cplx>& values, cplx z);

/// Mode coefficients of plane-wave scattering by a penetrable sphere. The
/// scattered field is sum (2n+1) i^n c_n h1_n(k0 r) P_n and the transmitted
/// one sum (2n+1) i^n d_n j_n(k1 r) P_n.
struct SphereSeries {
  double a = 0.0;
  cplx k0, k1;
  double rho0 = 1.0, rho1 = 1.0;
  std::vector<cplx> c, d;

  int n_max() const { return static_cast<int>(c.size()) - 1; }
};

/// N_max = ceil(|k0| a) + 20 unless n_max >= 0 is given.
SphereSeries sphere_coefficients(double a, cplx k0, cplx k1, double rho0, double rho1, int n_max = -1);

/// Total field at points relative to the sphere centre for incidence along
/// `direction`. Throws PointOnSurface within 1e-12 a of the sphere.
std::vector<cplx> series_field(const SphereSeries& series, const std::vector<Vec3>& points,
                               const Vec3& direction = Vec3(0.0, 0.0, 1.0));

}  // namespace acoubem
