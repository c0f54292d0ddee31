#include <doctest.h>

#include "acoubem/error.hpp"
#include "acoubem/medium.hpp"

#include <cmath>
#include <numbers>

using namespace acoubem;

TEST_CASE("power-law wavenumbers of the presets") {
  const cplx kw = wavenumber(water(), 1e6);
  CHECK(kw.real() == doctest::Approx(4188.7902).epsilon(1e-8));
  CHECK(kw.imag() == doctest::Approx(0.015).epsilon(1e-14));
  const cplx kb = wavenumber(bone(), 1e6);
  CHECK(kb.real() == doctest::Approx(1539.996).epsilon(1e-6));
  CHECK(kb.imag() == doctest::Approx(47.20).epsilon(1e-14));
  const cplx kf = wavenumber(fat(), 5e5);
  CHECK(kf.real() == doctest::Approx(2.0 * std::numbers::pi * 5e5 / 1412.0).epsilon(1e-14));
  CHECK(kf.imag() == doctest::Approx(9.334 * 0.5).epsilon(1e-14));

  Material lossless{"x", 1200.0, 1700.0, 0.0, 1.3};
  const cplx k1 = wavenumber(lossless, 3e5);
  CHECK(k1.imag() == 0.0);
  CHECK(wavenumber(lossless, 6e5) == 2.0 * k1);
  CHECK(wavelength(k1) == doctest::Approx(1700.0 / 3e5).epsilon(1e-14));
}

TEST_CASE("material validation and presets") {
  CHECK(material_preset("water") == water());
  CHECK(material_preset("bone")->rho == 1912.0);
  CHECK_FALSE(material_preset("steel").has_value());
  CHECK_THROWS_AS(check_material({"bad", 0.0, 1500.0, 0.0, 0.0}), Error);
  CHECK_THROWS_AS(check_material({"bad", 1000.0, 1500.0, -1.0, 0.0}), Error);
  CHECK_THROWS_AS(wavenumber(water(), 0.0), Error);
}

TEST_CASE("damped wavenumber") {
  const cplx k(2094.395, 0.0);
  CHECK(std::abs(damped_wavenumber(k, 0.005) / k - cplx(1.0, 0.08357)) < 2e-5);
  CHECK(std::abs(damped_wavenumber(k, 0.0005) / k - cplx(1.0, 0.38789)) < 2e-5);
  CHECK(std::abs(damped_wavenumber(k, 1e12) / k - 1.0) < 1e-7);
  // attenuation does not enter the damping factor
  CHECK(damped_wavenumber(cplx(2094.395, 3.0), 0.005) / cplx(2094.395, 3.0) == damped_wavenumber(k, 0.005) / k);
  double prev = 1e300;
  for (double r : {1e-4, 1e-3, 1e-2, 1e-1}) {
    const double im = damped_wavenumber(k, r).imag();
    CHECK(im > 0.0);
    CHECK(im < prev);
    prev = im;
  }
  try {
    damped_wavenumber(k, 0.0);
    FAIL("expected nonpositive-kr");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonpositiveKr);
  }
  const auto p = make_osrc_params(k, 0.0005);
  CHECK(p.n_pade == 4);
  CHECK(p.theta == doctest::Approx(std::numbers::pi / 3.0));
  CHECK(p.k_eps == damped_wavenumber(k, 0.0005));
}

TEST_CASE("plane wave traces") {
  const cplx k0(1000.0, 0.0);
  const PlaneWave wave(Vec3(0.0, 0.0, 2.0), k0);
  CHECK(wave.direction.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(wave.value(Vec3::Zero()) == cplx(1.0, 0.0));
  CHECK(std::abs(wave.value(Vec3(0.0, 0.0, std::numbers::pi / 1000.0)) - cplx(-1.0, 0.0)) < 1e-14);
  const PlaneWave lossy(Vec3(1.0, 1.0, 0.0), cplx(1000.0, 5.0));
  CHECK(std::abs(lossy.value(Vec3(0.3, 0.1, 0.0))) <= 1.0);

  SurfaceMesh patch;
  patch.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, -1, 0)};
  patch.triangles = {{0, 1, 2}, {0, 2, 3}};
  patch.update_normals();
  const auto traces = incident_traces(wave, patch);
  CHECK(traces.dirichlet[0] == cplx(1.0, 0.0));
  CHECK(std::abs(traces.neumann[0] - cplx(0.0, 1000.0)) < 1e-12);
  CHECK_THROWS_AS(PlaneWave(Vec3::Zero(), k0), Error);
}

TEST_CASE("Galerkin moments of the incident traces") {
  // normal incidence on a planar patch: u = 1 and du/dn = ik on the whole patch
  SurfaceMesh patch;
  patch.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, -1, 0)};
  patch.triangles = {{0, 1, 2}, {0, 2, 3}};
  patch.update_normals();
  const cplx k0(7.0, 0.0);
  const auto m = incident_moments(PlaneWave(Vec3(0.0, 0.0, 1.0), k0), patch);
  const double a1 = 0.5, a2 = 0.5;  // both triangles have area 1/2
  CHECK(std::abs(m.dirichlet[0] - cplx((a1 + a2) / 3.0, 0.0)) < 1e-14);
  CHECK(std::abs(m.dirichlet[1] - cplx(a1 / 3.0, 0.0)) < 1e-14);
  CHECK(std::abs(m.neumann[3] - cplx(0.0, 7.0 * a2 / 3.0)) < 1e-14);

  // closed surface: the moments sum to the area and to ik int d.n = 0, up to O(k^2)
  const auto sphere = generate_icosphere(1.0, 2);
  const auto s = incident_moments(PlaneWave(Vec3(0.3, -0.2, 1.0), cplx(1e-9, 0.0)), sphere);
  double area = 0.0;
  for (const auto& t : sphere.triangles) {
    area += 0.5 * (sphere.vertices[t[1]] - sphere.vertices[t[0]]).cross(sphere.vertices[t[2]] - sphere.vertices[t[0]]).norm();
  }
  CHECK(std::abs(s.dirichlet.sum() - area) < 1e-12 * area);
  CHECK(std::abs(s.neumann.sum()) < 1e-16);
}
