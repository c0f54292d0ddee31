#include "acoubem/assembly.hpp"

#include "acoubem/error.hpp"
#include "acoubem/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace acoubem {

P1Space::P1Space(std::shared_ptr<const SurfaceMesh> mesh) : mesh_(std::move(mesh)) {
  if (!mesh_) throw Error(ErrorCode::InvalidArgument, "P1 space needs a mesh");
}

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::V: return "V";
    case OperatorKind::K: return "K";
    case OperatorKind::T: return "T";
    case OperatorKind::D: return "D";
    case OperatorKind::Identity: return "I";
  }
  return "?";
}

SparseOperator mass_matrix(const P1Space& space) {
  const auto& mesh = space.mesh();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double a = triangle_area(mesh, t) / 12.0;
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], i == j ? 2.0 * a : a);
    }
  }
  SparseOperator out;
  out.matrix.resize(space.dof_count(), space.dof_count());
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SparseOperator laplace_beltrami(const P1Space& space) {
  const auto& mesh = space.mesh();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = triangle_area(mesh, t);
    // grad(phi_a) . grad(phi_b) = e_a . e_b / (4 A^2) with e_a the edge opposite a
    std::array<Vec3, 3> e;
    for (int a = 0; a < 3; ++a) e[a] = mesh.vertices[tri[(a + 2) % 3]] - mesh.vertices[tri[(a + 1) % 3]];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) trip.emplace_back(tri[a], tri[b], e[a].dot(e[b]) / (4.0 * area));
    }
  }
  SparseOperator out;
  out.matrix.resize(space.dof_count(), space.dof_count());
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  return out;
}

namespace {

std::atomic<std::size_t> g_dense_assemblies{0};

constexpr double kInvFourPi = 1.0 / (4.0 * std::numbers::pi);

struct Element {
  std::array<Vec3, 3> p;
  Triangle dofs;
  Vec3 normal;
  Vec3 center;
  double area;
  double diam;
  std::array<Vec3, 3> curl;  // surface curl of the three hat functions
};

std::vector<Element> make_elements(const SurfaceMesh& mesh) {
  std::vector<Element> out(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    Element& e = out[t];
    e.dofs = mesh.triangles[t];
    for (int a = 0; a < 3; ++a) e.p[a] = mesh.vertices[e.dofs[a]];
    const Vec3 cr = (e.p[1] - e.p[0]).cross(e.p[2] - e.p[0]);
    e.area = 0.5 * cr.norm();
    e.normal = cr / cr.norm();
    e.center = (e.p[0] + e.p[1] + e.p[2]) / 3.0;
    e.diam = triangle_max_edge(mesh, t);
    // n x grad(phi_a) = (P_{a+1} - P_{a+2}) / (2A)
    for (int a = 0; a < 3; ++a) e.curl[a] = (e.p[(a + 1) % 3] - e.p[(a + 2) % 3]) / (2.0 * e.area);
  }
  return out;
}

struct RuleOnElements {
  TriangleRule rule;
  std::vector<Vec3> points;  // element-major
  std::vector<double> weights;

  RuleOnElements(const std::vector<Element>& elems, int npoints) : rule(triangle_rule(npoints)) {
    const std::size_t q = rule.size();
    points.resize(elems.size() * q);
    weights.resize(elems.size() * q);
    for (std::size_t t = 0; t < elems.size(); ++t) {
      for (std::size_t i = 0; i < q; ++i) {
        const auto& b = rule.barycentric[i];
        points[t * q + i] = b[0] * elems[t].p[0] + b[1] * elems[t].p[1] + b[2] * elems[t].p[2];
        weights[t * q + i] = rule.weights[i] * elems[t].area;
      }
    }
  }
  std::size_t size() const { return rule.size(); }
};

using Local = std::array<std::array<cplx, 3>, 3>;

struct LocalSet {
  Local v{}, k{}, t{};
  cplx sum_g{0.0, 0.0};
};

struct KernelEval {
  cplx k;
  cplx ik;
  double k_re, k_im;

  explicit KernelEval(cplx kk) : k(kk), ik(cplx(0.0, 1.0) * kk), k_re(kk.real()), k_im(kk.imag()) {}

  // returns G and (ik - 1/r)/r * G
  inline void operator()(double r, cplx& g, cplx& h) const {
    const double inv_r = 1.0 / r;
    const double amp = (k_im == 0.0 ? 1.0 : std::exp(-k_im * r)) * kInvFourPi * inv_r;
    const double ph = k_re * r;
    g = cplx(amp * std::cos(ph), amp * std::sin(ph));
    h = g * cplx(-inv_r, 0.0) * inv_r + g * ik * inv_r;
  }
};

// Tensor-product rule on two separated triangles.
void regular_pair(const KernelEval& ker, const RuleOnElements& rx, std::size_t tx, const Element& ex,
                  const RuleOnElements& ry, std::size_t ty, const Element& ey, LocalSet& out) {
  const std::size_t nx = rx.size(), ny = ry.size();
  const Vec3* xs = &rx.points[tx * nx];
  const Vec3* ys = &ry.points[ty * ny];
  const double* wx = &rx.weights[tx * nx];
  const double* wy = &ry.weights[ty * ny];
  for (std::size_t p = 0; p < nx; ++p) {
    std::array<cplx, 3> vq{}, kq{}, tq{};
    for (std::size_t q = 0; q < ny; ++q) {
      const Vec3 d = ys[q] - xs[p];
      const double r = d.norm();
      cplx g, h;
      ker(r, g, h);
      const double w = wx[p] * wy[q];
      const cplx wg = w * g;
      const cplx wh = w * h;
      const cplx hk = wh * d.dot(ey.normal);
      const cplx ht = -wh * d.dot(ex.normal);
      const auto& by = ry.rule.barycentric[q];
      for (int b = 0; b < 3; ++b) {
        vq[b] += wg * by[b];
        kq[b] += hk * by[b];
        tq[b] += ht * by[b];
      }
      out.sum_g += wg;
    }
    const auto& bx = rx.rule.barycentric[p];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        out.v[a][b] += bx[a] * vq[b];
        out.k[a][b] += bx[a] * kq[b];
        out.t[a][b] += bx[a] * tq[b];
      }
    }
  }
}

// Local vertex orders for a touching pair: shared vertices first (sorted by
// global index), then the remaining ones sorted by global index.
struct PairOrder {
  Adjacency adjacency;
  std::array<int, 3> test;   // reference vertex -> local vertex of the test element
  std::array<int, 3> trial;
};

int shared_vertex_count(const Triangle& a, const Triangle& b) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) n += a[i] == b[j];
  }
  return n;
}

std::array<int, 3> order_with_shared_first(const Triangle& tri, const Triangle& other) {
  std::array<int, 3> shared{}, rest{};
  int ns = 0, nr = 0;
  std::array<int, 3> idx{0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return tri[i] < tri[j]; });
  for (int i : idx) {
    const bool is_shared = tri[i] == other[0] || tri[i] == other[1] || tri[i] == other[2];
    if (is_shared) shared[ns++] = i;
    else rest[nr++] = i;
  }
  std::array<int, 3> out{};
  for (int i = 0; i < ns; ++i) out[i] = shared[i];
  for (int i = 0; i < nr; ++i) out[ns + i] = rest[i];
  return out;
}

struct SingularRules {
  SingularRule coincident, edge, vertex;
  explicit SingularRules(int order)
      : coincident(singular_rule(Adjacency::Coincident, order)),
        edge(singular_rule(Adjacency::Edge, order)),
        vertex(singular_rule(Adjacency::Vertex, order)) {}
  const SingularRule& get(Adjacency a) const {
    return a == Adjacency::Coincident ? coincident : (a == Adjacency::Edge ? edge : vertex);
  }
};

void singular_pair(const KernelEval& ker, const SingularRule& rule, const Element& ex, const std::array<int, 3>& ox,
                   const Element& ey, const std::array<int, 3>& oy, LocalSet& out) {
  const Vec3& x0 = ex.p[ox[0]];
  const Vec3 dx1 = ex.p[ox[1]] - ex.p[ox[0]];
  const Vec3 dx2 = ex.p[ox[2]] - ex.p[ox[1]];
  const Vec3& y0 = ey.p[oy[0]];
  const Vec3 dy1 = ey.p[oy[1]] - ey.p[oy[0]];
  const Vec3 dy2 = ey.p[oy[2]] - ey.p[oy[1]];
  const double jac = 4.0 * ex.area * ey.area;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto& xr = rule.test_points[i];
    const auto& yr = rule.trial_points[i];
    const Vec3 x = x0 + xr[0] * dx1 + xr[1] * dx2;
    const Vec3 y = y0 + yr[0] * dy1 + yr[1] * dy2;
    const Vec3 d = y - x;
    const double r = d.norm();
    cplx g, h;
    ker(r, g, h);
    const double w = rule.weights[i] * jac;
    const cplx wg = w * g;
    const cplx wh = w * h;
    const cplx hk = wh * d.dot(ey.normal);
    const cplx ht = -wh * d.dot(ex.normal);
    const auto bx = reference_barycentric(xr);
    const auto by = reference_barycentric(yr);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double bb = bx[a] * by[b];
        out.v[ox[a]][oy[b]] += wg * bb;
        out.k[ox[a]][oy[b]] += hk * bb;
        out.t[ox[a]][oy[b]] += ht * bb;
      }
    }
    out.sum_g += wg;
  }
}

// Greedy colouring so that elements of one colour share no vertex.
std::vector<std::vector<std::size_t>> colour_elements(const SurfaceMesh& mesh) {
  std::vector<std::vector<int>> vertex_colours(mesh.vertices.size());
  std::vector<std::vector<std::size_t>> colours;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    int c = 0;
    auto taken = [&](int col) {
      for (int v : mesh.triangles[t]) {
        const auto& vc = vertex_colours[v];
        if (std::find(vc.begin(), vc.end(), col) != vc.end()) return true;
      }
      return false;
    };
    while (taken(c)) ++c;
    if (c >= static_cast<int>(colours.size())) colours.resize(c + 1);
    colours[c].push_back(t);
    for (int v : mesh.triangles[t]) vertex_colours[v].push_back(c);
  }
  return colours;
}

}  // namespace

OperatorSet assemble_operators(const P1Space& test, const P1Space& trial, cplx k, const QuadratureConfig& quad) {
  if (quad.regular_order < 1 || quad.singular_order < 1) throw Error(ErrorCode::InvalidArgument, "quadrature orders must be >= 1");
  const bool same = test.same_surface(trial);
  if (!same && bounding_box(test.mesh()).overlaps(bounding_box(trial.mesh()))) {
    throw Error(ErrorCode::CoincidentSurfaces, "distinct interfaces have overlapping bounding boxes");
  }
  ++g_dense_assemblies;

  const auto ex = make_elements(test.mesh());
  const auto ey = make_elements(trial.mesh());
  const int near_points = supported_triangle_points(2 * supported_triangle_points(quad.regular_order));
  const RuleOnElements rx(ex, quad.regular_order), ry(ey, quad.regular_order);
  const RuleOnElements nx(ex, near_points), ny(ey, near_points);
  const SingularRules srules(quad.singular_order);
  const KernelEval ker(k);
  const cplx k2 = k * k;

  OperatorSet out;
  const Eigen::Index m = test.dof_count(), n = trial.dof_count();
  out.V = {OperatorKind::V, k, CMatrix::Zero(m, n)};
  out.K = {OperatorKind::K, k, CMatrix::Zero(m, n)};
  out.T = {OperatorKind::T, k, CMatrix::Zero(m, n)};
  out.D = {OperatorKind::D, k, CMatrix::Zero(m, n)};

  auto process_trial = [&](std::size_t ty) {
    const Element& yel = ey[ty];
    for (std::size_t tx = 0; tx < ex.size(); ++tx) {
      const Element& xel = ex[tx];
      LocalSet loc;
      int shared = same ? shared_vertex_count(xel.dofs, yel.dofs) : 0;
      if (shared > 0) {
        const Adjacency adj = shared == 3 ? Adjacency::Coincident : (shared == 2 ? Adjacency::Edge : Adjacency::Vertex);
        singular_pair(ker, srules.get(adj), xel, order_with_shared_first(xel.dofs, yel.dofs), yel,
                      order_with_shared_first(yel.dofs, xel.dofs), loc);
      } else {
        const double dist = (xel.center - yel.center).norm();
        if (dist < quad.near_threshold * std::max(xel.diam, yel.diam)) regular_pair(ker, nx, tx, xel, ny, ty, yel, loc);
        else regular_pair(ker, rx, tx, xel, ry, ty, yel, loc);
      }
      const double nn = xel.normal.dot(yel.normal);
      for (int b = 0; b < 3; ++b) {
        const int j = yel.dofs[b];
        for (int a = 0; a < 3; ++a) {
          const int i = xel.dofs[a];
          out.V.matrix(i, j) += loc.v[a][b];
          out.K.matrix(i, j) += loc.k[a][b];
          out.T.matrix(i, j) += loc.t[a][b];
          out.D.matrix(i, j) += xel.curl[a].dot(yel.curl[b]) * loc.sum_g - k2 * nn * loc.v[a][b];
        }
      }
    }
  };

  unsigned nthreads = quad.threads > 0 ? static_cast<unsigned>(quad.threads) : std::max(1u, std::thread::hardware_concurrency());
  const auto colours = colour_elements(trial.mesh());
  for (const auto& colour : colours) {
    if (nthreads == 1 || colour.size() < 2 * nthreads) {
      for (std::size_t ty : colour) process_trial(ty);
      continue;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nthreads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < colour.size(); i += nthreads) process_trial(colour[i]);
      });
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

DenseOperatorBlock boundary_operator(OperatorKind kind, const P1Space& test, const P1Space& trial, cplx k,
                                     const QuadratureConfig& quad) {
  if (kind == OperatorKind::Identity) {
    if (!test.same_surface(trial)) throw Error(ErrorCode::DimensionMismatch, "identity needs equal spaces");
    auto block = dense_from_sparse(mass_matrix(test));
    block.k = k;
    return block;
  }
  auto set = assemble_operators(test, trial, k, quad);
  switch (kind) {
    case OperatorKind::V: return std::move(set.V);
    case OperatorKind::K: return std::move(set.K);
    case OperatorKind::T: return std::move(set.T);
    default: return std::move(set.D);
  }
}

std::size_t dense_assembly_count() { return g_dense_assemblies.load(); }

MassSolver::MassSolver(const SparseOperator& mass) : size_(mass.matrix.rows()) {
  ldlt_.compute(mass.matrix);
  if (ldlt_.info() != Eigen::Success) throw Error(ErrorCode::SingularFactorisation, "mass matrix factorisation failed");
}

CVector MassSolver::solve(const CVector& rhs) const {
  if (rhs.size() != size_) throw Error(ErrorCode::DimensionMismatch, "mass solve: vector length mismatch");
  const Eigen::VectorXd re = ldlt_.solve(rhs.real());
  const Eigen::VectorXd im = ldlt_.solve(rhs.imag());
  CVector out(size_);
  out.real() = re;
  out.imag() = im;
  return out;
}

StrongForm::StrongForm(std::shared_ptr<const DenseOperatorBlock> block, std::shared_ptr<const MassSolver> mass)
    : block_(std::move(block)), mass_(std::move(mass)) {
  if (!block_ || !mass_) throw Error(ErrorCode::InvalidArgument, "strong form needs a block and a mass solver");
  if (block_->rows() != mass_->size()) throw Error(ErrorCode::DimensionMismatch, "mass matrix does not match the block's test space");
}

CVector StrongForm::apply(const CVector& x) const {
  if (x.size() != block_->cols()) throw Error(ErrorCode::DimensionMismatch, "strong form: vector length mismatch");
  return mass_->solve(block_->matrix * x);
}

StrongForm strong_form(std::shared_ptr<const DenseOperatorBlock> block, std::shared_ptr<const MassSolver> mass) {
  return StrongForm(std::move(block), std::move(mass));
}

DenseOperatorBlock dense_from_sparse(const SparseOperator& op) {
  DenseOperatorBlock out;
  out.kind = OperatorKind::Identity;
  out.matrix = CMatrix(Eigen::MatrixXd(op.matrix).cast<cplx>());
  return out;
}

}  // namespace acoubem
