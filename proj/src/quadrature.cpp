#include "acoubem/quadrature.hpp"

#include "acoubem/error.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace acoubem {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Gauss rule needs at least one point");
  // Legendre P_n and its derivative by the three-term recurrence
  auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  GaussRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    rule.points[i] = 0.5 * (1.0 - x);
    rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

namespace {

void add_orbit3(TriangleRule& r, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  r.barycentric.push_back({a, a, b});
  r.barycentric.push_back({a, b, a});
  r.barycentric.push_back({b, a, a});
  for (int i = 0; i < 3; ++i) r.weights.push_back(w);
}

void add_orbit6(TriangleRule& r, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const std::array<std::array<double, 3>, 6> perms{{{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}}};
  for (const auto& p : perms) {
    r.barycentric.push_back(p);
    r.weights.push_back(w);
  }
}

TriangleRule collapsed_gauss(int n) {
  const auto g = gauss_legendre(n);
  TriangleRule r;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = g.points[i];
      const double v = g.points[j] * (1.0 - u);
      r.barycentric.push_back({1.0 - u - v, u, v});
      r.weights.push_back(2.0 * g.weights[i] * g.weights[j] * (1.0 - u));
    }
  }
  return r;
}

}  // namespace

int supported_triangle_points(int points) {
  if (points <= 1) return 1;
  if (points <= 3) return 3;
  if (points <= 6) return 6;
  if (points <= 12) return 12;
  int n = 4;
  while (n * n < points) ++n;
  return n * n;
}

TriangleRule triangle_rule(int points) {
  TriangleRule r;
  switch (supported_triangle_points(points)) {
    case 1:
      r.barycentric.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      r.weights.push_back(1.0);
      return r;
    case 3:
      add_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
      return r;
    case 6:
      // Dunavant, degree 4
      add_orbit3(r, 0.445948490915965, 0.223381589678011);
      add_orbit3(r, 0.091576213509771, 0.109951743655322);
      return r;
    case 12:
      // Dunavant, degree 6
      add_orbit3(r, 0.249286745170910, 0.116786275726379);
      add_orbit3(r, 0.063089014491502, 0.050844906370207);
      add_orbit6(r, 0.053145049844817, 0.310352451033784, 0.082851075618374);
      return r;
    default:
      return collapsed_gauss(static_cast<int>(std::lround(std::sqrt(supported_triangle_points(points)))));
  }
}

SingularRule singular_rule(Adjacency adjacency, int order) {
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "singular quadrature order must be >= 1");
  const auto g = gauss_legendre(order);
  SingularRule rule;
  auto push = [&](double x1, double x2, double y1, double y2, double w) {
    rule.test_points.push_back({x1, x2});
    rule.trial_points.push_back({y1, y2});
    rule.weights.push_back(w);
  };
  for (int a = 0; a < order; ++a) {
    for (int b = 0; b < order; ++b) {
      for (int c = 0; c < order; ++c) {
        for (int d = 0; d < order; ++d) {
          const double xi = g.points[a], e1 = g.points[b], e2 = g.points[c], e3 = g.points[d];
          const double w = g.weights[a] * g.weights[b] * g.weights[c] * g.weights[d];
          const double xi3 = xi * xi * xi;
          switch (adjacency) {
            case Adjacency::Coincident: {
              const double jw = w * xi3 * e1 * e1 * e2;
              push(xi, xi * (1 - e1 + e1 * e2), xi * (1 - e1 * e2 * e3), xi * (1 - e1), jw);
              push(xi * (1 - e1 * e2 * e3), xi * (1 - e1), xi, xi * (1 - e1 + e1 * e2), jw);
              push(xi, xi * e1 * (1 - e2 + e2 * e3), xi * (1 - e1 * e2), xi * e1 * (1 - e2), jw);
              push(xi * (1 - e1 * e2), xi * e1 * (1 - e2), xi, xi * e1 * (1 - e2 + e2 * e3), jw);
              push(xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * (1 - e2), jw);
              push(xi, xi * e1 * (1 - e2), xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), jw);
              break;
            }
            case Adjacency::Edge: {
              const double j1 = w * xi3 * e1 * e1;
              const double j2 = j1 * e2;
              push(xi, xi * e1 * e3, xi * (1 - e1 * e2), xi * e1 * (1 - e2), j1);
              push(xi, xi * e1, xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), j2);
              push(xi * (1 - e1 * e2), xi * e1 * (1 - e2), xi, xi * e1 * e2 * e3, j2);
              push(xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), xi, xi * e1, j2);
              push(xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * e2, j2);
              break;
            }
            case Adjacency::Vertex: {
              const double jw = w * xi3 * e2;
              push(xi, xi * e1, xi * e2, xi * e2 * e3, jw);
              push(xi * e2, xi * e2 * e3, xi, xi * e1, jw);
              break;
            }
          }
        }
      }
    }
  }
  return rule;
}

}  // namespace acoubem
