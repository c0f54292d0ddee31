#include "acoubem/analytic.hpp"

#include "acoubem/error.hpp"

#include <cmath>

namespace acoubem {

namespace {

std::vector<cplx> bessel_j(int n_max, cplx z) {
  std::vector<cplx> j(n_max + 1, cplx(0.0, 0.0));
  const double az = std::abs(z);
  if (az == 0.0) {
    j[0] = 1.0;
    return j;
  }
  if (az < 1e-3) {
    // two-term power series, exact to double precision here
    cplx term = 1.0;
    for (int n = 0; n <= n_max; ++n) {
      if (n > 0) term *= z / (2.0 * n + 1.0);
      j[n] = term * (1.0 - z * z / (2.0 * (2.0 * n + 3.0)));
      if (std::abs(term) < 1e-300) break;
    }
    return j;
  }
  const cplx j0 = std::sin(z) / z;
  const cplx j1 = std::sin(z) / (z * z) - std::cos(z) / z;

  // Miller: recur downward from far above the largest order, then normalise.
  const int start = n_max + static_cast<int>(std::sqrt(40.0 * (n_max + az))) + 20 + static_cast<int>(az);
  std::vector<cplx> down(start + 2, cplx(0.0, 0.0));
  down[start + 1] = 0.0;
  down[start] = 1e-300;
  for (int n = start; n >= 1; --n) {
    down[n - 1] = (2.0 * n + 1.0) / z * down[n] - down[n + 1];
    if (std::abs(down[n - 1]) > 1e250) {
      for (int m = n - 1; m <= start; ++m) down[m] *= 1e-250;
    }
  }
  const cplx scale = std::abs(j0) >= std::abs(j1) ? j0 / down[0] : j1 / down[1];
  for (int n = 0; n <= n_max; ++n) j[n] = down[n] * scale;

  // the upward recurrence is stable while n < |z|
  j[0] = j0;
  if (n_max >= 1) j[1] = j1;
  for (int n = 1; n + 1 <= n_max && n + 1 <= az; ++n) j[n + 1] = (2.0 * n + 1.0) / z * j[n] - j[n - 1];
  return j;
}

std::vector<cplx> bessel_y(int n_max, cplx z) {
  if (z == cplx(0.0, 0.0)) throw Error(ErrorCode::PoleAtZero, "y_n and h1_n are singular at z = 0");
  std::vector<cplx> y(n_max + 1);
  y[0] = -std::cos(z) / z;
  if (n_max >= 1) y[1] = -std::cos(z) / (z * z) - std::sin(z) / z;
  for (int n = 1; n + 1 <= n_max; ++n) y[n + 1] = (2.0 * n + 1.0) / z * y[n] - y[n - 1];
  return y;
}

}  // namespace

std::vector<cplx> spherical_bessel_array(BesselKind kind, int n_max, cplx z) {
  if (n_max < 0) throw Error(ErrorCode::InvalidArgument, "Bessel order must be >= 0");
  switch (kind) {
    case BesselKind::J: return bessel_j(n_max, z);
    case BesselKind::Y: return bessel_y(n_max, z);
    case BesselKind::H1: {
      const auto y = bessel_y(n_max, z);
      auto j = bessel_j(n_max, z);
      for (int n = 0; n <= n_max; ++n) j[n] += cplx(0.0, 1.0) * y[n];
      return j;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown Bessel kind");
}

cplx spherical_bessel(BesselKind kind, int n, cplx z) { return spherical_bessel_array(kind, n, z)[n]; }

std::vector<cplx> spherical_bessel_derivative(const std::vector<cplx>& f, cplx z) {
  if (f.size() < 2) throw Error(ErrorCode::InvalidArgument, "derivative needs orders 0 and 1");
  std::vector<cplx> d(f.size());
  d[0] = -f[1];
  if (z == cplx(0.0, 0.0)) {
    // only j_1'(0) = 1/3 is nonzero among finite values
    for (std::size_t n = 1; n < f.size(); ++n) d[n] = n == 1 ? 1.0 / 3.0 : 0.0;
    return d;
  }
  for (std::size_t n = 1; n < f.size(); ++n) d[n] = f[n - 1] - (static_cast<double>(n) + 1.0) / z * f[n];
  return d;
}

SphereSeries sphere_coefficients(double a, cplx k0, cplx k1, double rho0, double rho1, int n_max) {
  if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "sphere radius must be positive");
  if (!(k0.real() > 0.0) || !(k1.real() > 0.0)) throw Error(ErrorCode::InvalidArgument, "wavenumbers need positive real parts");
  if (!(rho0 > 0.0) || !(rho1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "densities must be positive");
  SphereSeries s;
  s.a = a;
  s.k0 = k0;
  s.k1 = k1;
  s.rho0 = rho0;
  s.rho1 = rho1;
  const int nm = n_max >= 0 ? n_max : static_cast<int>(std::ceil(std::abs(k0) * a)) + 20;
  // one extra order for the derivatives
  const cplx z0 = k0 * a, z1 = k1 * a;
  const auto j0 = spherical_bessel_array(BesselKind::J, nm + 1, z0);
  const auto h0 = spherical_bessel_array(BesselKind::H1, nm + 1, z0);
  const auto j1 = spherical_bessel_array(BesselKind::J, nm + 1, z1);
  const auto dj0 = spherical_bessel_derivative(j0, z0);
  const auto dh0 = spherical_bessel_derivative(h0, z0);
  const auto dj1 = spherical_bessel_derivative(j1, z1);
  const cplx s0 = k0 / rho0, s1 = k1 / rho1;
  s.c.resize(nm + 1);
  s.d.resize(nm + 1);
  for (int n = 0; n <= nm; ++n) {
    // [h  -j1; s0 h'  -s1 j1'] [c; d] = [-j; -s0 j']
    const cplx a11 = h0[n], a12 = -j1[n], a21 = s0 * dh0[n], a22 = -s1 * dj1[n];
    const cplx det = a11 * a22 - a12 * a21;
    const double scale = std::abs(a11 * a22) + std::abs(a12 * a21);
    if (!(std::abs(det) > 1e-14 * scale)) throw Error(ErrorCode::ModeSystemSingular, "mode " + std::to_string(n));
    const cplx b1 = -j0[n], b2 = -s0 * dj0[n];
    s.c[n] = (b1 * a22 - a12 * b2) / det;
    s.d[n] = (a11 * b2 - a21 * b1) / det;
  }
  return s;
}

std::vector<cplx> series_field(const SphereSeries& s, const std::vector<Vec3>& points, const Vec3& direction) {
  const double dn = direction.norm();
  if (!(dn > 0.0)) throw Error(ErrorCode::InvalidArgument, "incidence direction must be nonzero");
  const Vec3 dir = direction / dn;
  const int nm = s.n_max();
  std::vector<cplx> in(nm + 1);
  in[0] = 1.0;
  for (int n = 1; n <= nm; ++n) in[n] = in[n - 1] * cplx(0.0, 1.0);

  std::vector<cplx> out(points.size());
  std::vector<double> p(nm + 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3& x = points[i];
    const double r = x.norm();
    if (std::abs(r - s.a) < 1e-12 * s.a) throw Error(ErrorCode::PointOnSurface, "evaluation point on the sphere");
    const double ct = r > 0.0 ? dir.dot(x) / r : 1.0;
    p[0] = 1.0;
    if (nm >= 1) p[1] = ct;
    for (int n = 1; n + 1 <= nm; ++n) p[n + 1] = ((2.0 * n + 1.0) * ct * p[n] - n * p[n - 1]) / (n + 1.0);
    cplx u = 0.0;
    if (r > s.a) {
      const auto h = spherical_bessel_array(BesselKind::H1, nm, s.k0 * r);
      for (int n = 0; n <= nm; ++n) u += (2.0 * n + 1.0) * in[n] * s.c[n] * h[n] * p[n];
      u += std::exp(cplx(0.0, 1.0) * s.k0 * dir.dot(x));
    } else {
      const auto j = spherical_bessel_array(BesselKind::J, nm, s.k1 * r);
      for (int n = 0; n <= nm; ++n) u += (2.0 * n + 1.0) * in[n] * s.d[n] * j[n] * p[n];
    }
    out[i] = u;
  }
  return out;
}

}  // namespace acoubem
