#pragma once

#include "acoubem/assembly.hpp"
#include "acoubem/medium.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace acoubem {

/// One closed interface Gamma_m enclosing a homogeneous interior material.
struct Interface {
  std::shared_ptr<const SurfaceMesh> mesh;
  Material material;
  std::optional<double> r_eff;  // OSRC effective radius override
};

struct Scene {
  Material exterior;
  std::vector<Interface> interfaces;
};

/// Throws InvalidScene for an empty scene or a missing mesh, InvalidArgument
/// for bad materials and CoincidentSurfaces for overlapping interfaces.
void validate_scene(const Scene& scene);

enum class Formulation { Pmchwt, Muller, PmchwtPermuted };
const char* to_string(Formulation f);
Formulation formulation_from_string(const std::string& name);

/// Operator sets keyed by (test mesh, trial mesh, k). Two interfaces or media
/// with identical keys share the same blocks.
class OperatorCache {
 public:
  explicit OperatorCache(QuadratureConfig quad = {}) : quad_(quad) {}
  std::shared_ptr<const OperatorSet> get(const P1Space& test, const P1Space& trial, cplx k);
  std::size_t size() const { return sets_.size(); }

 private:
  using Key = std::tuple<const SurfaceMesh*, const SurfaceMesh*, double, double>;
  QuadratureConfig quad_;
  std::map<Key, std::shared_ptr<const OperatorSet>> sets_;
};

struct WeightedDense {
  std::shared_ptr<const DenseOperatorBlock> block;
  cplx weight;
};

struct WeightedSparse {
  std::shared_ptr<const SparseOperator> op;
  cplx weight;
};

/// A sum of weighted dense and sparse operators between two dof blocks.
/// Terms referencing the same operator are merged, and zero weights dropped.
struct BlockEntry {
  std::vector<WeightedDense> dense;
  std::vector<WeightedSparse> sparse;

  void add(std::shared_ptr<const DenseOperatorBlock> block, cplx weight);
  void add(std::shared_ptr<const SparseOperator> op, cplx weight);
  bool empty() const { return dense.empty() && sparse.empty(); }
  void apply_add(const Eigen::Ref<const CVector>& x, Eigen::Ref<CVector> y) const;
};

/// Per-interface data shared by the system and its preconditioners.
struct InterfaceData {
  std::shared_ptr<const P1Space> space;
  std::shared_ptr<const SparseOperator> mass;
  std::shared_ptr<const MassSolver> mass_solver;
  cplx k_interior;
  double density_ratio;  // rho_0 / rho_m
  double r_eff;          // OSRC effective radius, bounding radius / 10 unless overridden
  Eigen::Index offset;   // first row of the interface's two trace rows
};

/// Weak-form Galerkin block system. Block row 2m + r and column 2m + c
/// belong to interface m. Row 0 of an interface carries the Dirichlet trace
/// equation and row 1 the Neumann one; unknowns are (phi, psi) except for the
/// permuted formulation, which orders them (psi, phi).
class BlockSystem {
 public:
  Formulation formulation() const { return formulation_; }
  std::size_t interface_count() const { return interfaces_.size(); }
  const InterfaceData& interface(std::size_t m) const { return interfaces_[m]; }
  Eigen::Index dimension() const { return dimension_; }
  Eigen::Index block_size(std::size_t block) const;
  Eigen::Index block_offset(std::size_t block) const;
  cplx k_exterior() const { return k0_; }

  const BlockEntry& block(std::size_t row, std::size_t col) const { return blocks_[row * 2 * interfaces_.size() + col]; }

  /// Weak-form right-hand side: Galerkin moments of the incident traces.
  const CVector& rhs() const { return rhs_; }
  /// L2-projected incident trace coefficients in unknown order.
  const CVector& incident() const { return incident_; }

  CVector apply(const CVector& x) const;
  /// Only the 2x2 diagonal superblocks.
  CVector apply_diagonal(const CVector& x) const;
  CMatrix dense() const;

  /// Position of the Dirichlet (phi) unknown block of interface m.
  std::size_t phi_block(std::size_t m) const { return 2 * m + (formulation_ == Formulation::PmchwtPermuted ? 1 : 0); }
  std::size_t psi_block(std::size_t m) const { return 2 * m + (formulation_ == Formulation::PmchwtPermuted ? 0 : 1); }

 private:
  friend BlockSystem build_system(Formulation, const Scene&, double, const PlaneWave&, OperatorCache&);
  Formulation formulation_ = Formulation::Pmchwt;
  cplx k0_;
  std::vector<InterfaceData> interfaces_;
  std::vector<BlockEntry> blocks_;
  Eigen::Index dimension_ = 0;
  CVector rhs_, incident_;
};

BlockSystem build_system(Formulation formulation, const Scene& scene, double frequency, const PlaneWave& wave,
                         OperatorCache& cache);
BlockSystem build_pmchwt(const Scene& scene, double frequency, const PlaneWave& wave, OperatorCache& cache);
BlockSystem build_muller(const Scene& scene, double frequency, const PlaneWave& wave, OperatorCache& cache);
BlockSystem build_pmchwt_permuted(const Scene& scene, double frequency, const PlaneWave& wave, OperatorCache& cache);

/// Exterior traces phi_m and exterior-scaled Neumann traces psi_m.
struct SurfaceSolution {
  std::vector<CVector> phi;
  std::vector<CVector> psi;
};

SurfaceSolution split_solution(const BlockSystem& system, const CVector& x);
CVector stack_solution(const BlockSystem& system, const SurfaceSolution& s);

}  // namespace acoubem
