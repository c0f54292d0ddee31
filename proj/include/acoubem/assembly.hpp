#pragma once

#include "acoubem/medium.hpp"
#include "acoubem/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cstddef>
#include <memory>

namespace acoubem {

using CMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Continuous piecewise-linear functions on a mesh, one dof per vertex.
class P1Space {
 public:
  explicit P1Space(std::shared_ptr<const SurfaceMesh> mesh);

  const SurfaceMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const SurfaceMesh>& mesh_ptr() const { return mesh_; }
  Eigen::Index dof_count() const { return static_cast<Eigen::Index>(mesh_->vertices.size()); }
  const Triangle& element_dofs(std::size_t t) const { return mesh_->triangles[t]; }
  bool same_surface(const P1Space& other) const { return mesh_ == other.mesh_; }

 private:
  std::shared_ptr<const SurfaceMesh> mesh_;
};

enum class OperatorKind { V, K, T, D, Identity };
const char* to_string(OperatorKind kind);

struct DenseOperatorBlock {
  OperatorKind kind = OperatorKind::V;
  cplx k{0.0, 0.0};
  CMatrix matrix;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

struct SparseOperator {
  SparseMatrix matrix;
  bool symmetric = true;
};

struct QuadratureConfig {
  int regular_order = 6;      // points per triangle, well-separated pairs
  int singular_order = 4;     // 1D Gauss order of the Sauter-Schwab rules
  double near_threshold = 2.0;  // in multiples of the larger triangle diameter
  int threads = 0;            // 0: hardware concurrency
};

SparseOperator mass_matrix(const P1Space& space);

/// Cotangent stiffness S_ij = int grad phi_i . grad phi_j; weak Laplace-Beltrami is -S.
SparseOperator laplace_beltrami(const P1Space& space);

/// The four Helmholtz boundary operators for one (test, trial, k) triple,
/// assembled together since they share every kernel evaluation.
struct OperatorSet {
  DenseOperatorBlock V, K, T, D;
};

/// Galerkin matrices <Op phi_j, phi_i>. The hypersingular operator uses the
/// curl-curl form. Throws CoincidentSurfaces when distinct meshes overlap.
OperatorSet assemble_operators(const P1Space& test, const P1Space& trial, cplx k, const QuadratureConfig& quad = {});

DenseOperatorBlock boundary_operator(OperatorKind kind, const P1Space& test, const P1Space& trial, cplx k,
                                     const QuadratureConfig& quad = {});

/// Number of dense (test, trial, k) assemblies performed by this process.
std::size_t dense_assembly_count();

/// Sparse Cholesky factorisation of a mass matrix, applied to complex vectors.
class MassSolver {
 public:
  explicit MassSolver(const SparseOperator& mass);
  CVector solve(const CVector& rhs) const;
  Eigen::Index size() const { return size_; }

 private:
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  Eigen::Index size_;
};

/// M^{-1} B applied lazily; M^{-1} is never formed.
class StrongForm {
 public:
  StrongForm(std::shared_ptr<const DenseOperatorBlock> block, std::shared_ptr<const MassSolver> mass);
  CVector apply(const CVector& x) const;

 private:
  std::shared_ptr<const DenseOperatorBlock> block_;
  std::shared_ptr<const MassSolver> mass_;
};

StrongForm strong_form(std::shared_ptr<const DenseOperatorBlock> block, std::shared_ptr<const MassSolver> mass);

/// Sparse matrix as a dense block of kind Identity (for tests and the weak identity).
DenseOperatorBlock dense_from_sparse(const SparseOperator& op);

}  // namespace acoubem
