#pragma once

#include <array>
#include <vector>

namespace acoubem {

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

/// Rule on a triangle in barycentric coordinates; weights sum to one so that
/// the integral is area * sum(w f).
struct TriangleRule {
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};

/// Symmetric rules for 1, 3, 6 and 12 points; perfect squares n*n fall back to
/// a collapsed Gauss product rule. Other counts are rounded up.
TriangleRule triangle_rule(int points);

/// Smallest supported point count that is at least `points`.
int supported_triangle_points(int points);

enum class Adjacency { Coincident, Edge, Vertex };

/// Tensor Gauss rule for a pair of triangles sharing a face, an edge or a
/// vertex, mapped from [0,1]^4 by the Sauter-Schwab coordinate transforms.
/// Points are in the reference triangle {0 <= x2 <= x1 <= 1} with the shared
/// vertices first; weights include the transform Jacobian, so the physical
/// integral is (2|tau|)(2|sigma|) sum(w f).
struct SingularRule {
  std::vector<std::array<double, 2>> test_points;
  std::vector<std::array<double, 2>> trial_points;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};
SingularRule singular_rule(Adjacency adjacency, int order);

/// Barycentric coordinates of a reference point (x1, x2) in the
/// {0 <= x2 <= x1 <= 1} parametrisation x = P0 + x1 (P1 - P0) + x2 (P2 - P1).
inline std::array<double, 3> reference_barycentric(const std::array<double, 2>& p) {
  return {1.0 - p[0], p[0] - p[1], p[1]};
}

}  // namespace acoubem
