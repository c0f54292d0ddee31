#include "acoubem/formulations.hpp"

#include "acoubem/error.hpp"

#include <algorithm>

namespace acoubem {

void validate_scene(const Scene& scene) {
  if (scene.interfaces.empty()) throw Error(ErrorCode::InvalidScene, "scene has no interfaces");
  check_material(scene.exterior);
  for (std::size_t m = 0; m < scene.interfaces.size(); ++m) {
    const auto& itf = scene.interfaces[m];
    if (!itf.mesh || itf.mesh->triangles.empty()) {
      throw Error(ErrorCode::InvalidScene, "interface " + std::to_string(m) + " has no mesh");
    }
    check_material(itf.material);
    if (itf.r_eff && !(*itf.r_eff > 0.0)) throw Error(ErrorCode::NonpositiveKr, "r_eff must be positive");
    for (std::size_t n = 0; n < m; ++n) {
      if (bounding_box(*itf.mesh).overlaps(bounding_box(*scene.interfaces[n].mesh))) {
        throw Error(ErrorCode::CoincidentSurfaces,
                    "interfaces " + std::to_string(n) + " and " + std::to_string(m) + " overlap");
      }
    }
  }
}

const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::Pmchwt: return "pmchwt";
    case Formulation::Muller: return "muller";
    case Formulation::PmchwtPermuted: return "pmchwt-permuted";
  }
  return "?";
}

Formulation formulation_from_string(const std::string& name) {
  if (name == "pmchwt") return Formulation::Pmchwt;
  if (name == "muller") return Formulation::Muller;
  if (name == "pmchwt-permuted") return Formulation::PmchwtPermuted;
  throw Error(ErrorCode::ConfigError, "unknown formulation '" + name + "'");
}

std::shared_ptr<const OperatorSet> OperatorCache::get(const P1Space& test, const P1Space& trial, cplx k) {
  const Key key{test.mesh_ptr().get(), trial.mesh_ptr().get(), k.real(), k.imag()};
  auto it = sets_.find(key);
  if (it != sets_.end()) return it->second;
  auto set = std::make_shared<const OperatorSet>(assemble_operators(test, trial, k, quad_));
  sets_.emplace(key, set);
  return set;
}

void BlockEntry::add(std::shared_ptr<const DenseOperatorBlock> block, cplx weight) {
  for (auto& term : dense) {
    if (term.block == block) {
      term.weight += weight;
      return;
    }
  }
  dense.push_back({std::move(block), weight});
}

void BlockEntry::add(std::shared_ptr<const SparseOperator> op, cplx weight) {
  for (auto& term : sparse) {
    if (term.op == op) {
      term.weight += weight;
      return;
    }
  }
  sparse.push_back({std::move(op), weight});
}

void BlockEntry::apply_add(const Eigen::Ref<const CVector>& x, Eigen::Ref<CVector> y) const {
  for (const auto& term : dense) {
    const CVector bx = term.block->matrix * x;
    y += term.weight * bx;
  }
  for (const auto& term : sparse) {
    const CVector bx = term.op->matrix.cast<cplx>() * x;
    y += term.weight * bx;
  }
}

Eigen::Index BlockSystem::block_size(std::size_t block) const { return interfaces_[block / 2].space->dof_count(); }

Eigen::Index BlockSystem::block_offset(std::size_t block) const {
  return interfaces_[block / 2].offset + static_cast<Eigen::Index>(block % 2) * block_size(block);
}

CVector BlockSystem::apply(const CVector& x) const {
  if (x.size() != dimension_) throw Error(ErrorCode::DimensionMismatch, "block system: vector length mismatch");
  CVector y = CVector::Zero(dimension_);
  const std::size_t nb = 2 * interfaces_.size();
  for (std::size_t r = 0; r < nb; ++r) {
    auto yr = y.segment(block_offset(r), block_size(r));
    for (std::size_t c = 0; c < nb; ++c) block(r, c).apply_add(x.segment(block_offset(c), block_size(c)), yr);
  }
  return y;
}

CVector BlockSystem::apply_diagonal(const CVector& x) const {
  if (x.size() != dimension_) throw Error(ErrorCode::DimensionMismatch, "block system: vector length mismatch");
  CVector y = CVector::Zero(dimension_);
  for (std::size_t m = 0; m < interfaces_.size(); ++m) {
    for (std::size_t r = 2 * m; r < 2 * m + 2; ++r) {
      auto yr = y.segment(block_offset(r), block_size(r));
      for (std::size_t c = 2 * m; c < 2 * m + 2; ++c) block(r, c).apply_add(x.segment(block_offset(c), block_size(c)), yr);
    }
  }
  return y;
}

CMatrix BlockSystem::dense() const {
  CMatrix out = CMatrix::Zero(dimension_, dimension_);
  const std::size_t nb = 2 * interfaces_.size();
  for (std::size_t r = 0; r < nb; ++r) {
    for (std::size_t c = 0; c < nb; ++c) {
      auto sub = out.block(block_offset(r), block_offset(c), block_size(r), block_size(c));
      for (const auto& t : block(r, c).dense) sub += t.weight * t.block->matrix;
      for (const auto& t : block(r, c).sparse) sub += t.weight * Eigen::MatrixXd(t.op->matrix).cast<cplx>();
    }
  }
  return out;
}

namespace {

std::shared_ptr<const DenseOperatorBlock> share(const std::shared_ptr<const OperatorSet>& set, const DenseOperatorBlock& b) {
  // aliasing constructor: the block lives as long as its operator set
  return std::shared_ptr<const DenseOperatorBlock>(set, &b);
}

}  // namespace

BlockSystem build_system(Formulation formulation, const Scene& scene, double frequency, const PlaneWave& wave,
                         OperatorCache& cache) {
  validate_scene(scene);
  BlockSystem sys;
  sys.formulation_ = formulation;
  sys.k0_ = wavenumber(scene.exterior, frequency);
  const std::size_t l = scene.interfaces.size();

  Eigen::Index offset = 0;
  for (const auto& itf : scene.interfaces) {
    InterfaceData d;
    d.space = std::make_shared<const P1Space>(itf.mesh);
    d.mass = std::make_shared<const SparseOperator>(mass_matrix(*d.space));
    d.mass_solver = std::make_shared<const MassSolver>(*d.mass);
    d.k_interior = wavenumber(itf.material, frequency);
    d.density_ratio = scene.exterior.rho / itf.material.rho;
    d.r_eff = itf.r_eff.value_or(bounding_radius(*itf.mesh) / 10.0);
    d.offset = offset;
    offset += 2 * d.space->dof_count();
    sys.interfaces_.push_back(std::move(d));
  }
  sys.dimension_ = offset;
  sys.blocks_.assign(4 * l * l, BlockEntry{});

  const bool permuted = formulation == Formulation::PmchwtPermuted;
  // (row, unknown) -> block column, with unknown 0 = phi and 1 = psi
  auto col = [&](std::size_t m, int unknown) { return 2 * m + static_cast<std::size_t>(permuted ? 1 - unknown : unknown); };
  auto entry = [&](std::size_t row, std::size_t c) -> BlockEntry& { return sys.blocks_[row * 2 * l + c]; };

  // Calderon operator [-K V; D T] with the row and unknown scaling s_v, s_d
  auto add_calderon = [&](std::size_t m, std::size_t n, const std::shared_ptr<const OperatorSet>& ops, cplx w,
                          double v_scale, double d_scale) {
    entry(2 * m, col(n, 0)).add(share(ops, ops->K), -w);
    entry(2 * m, col(n, 1)).add(share(ops, ops->V), w * v_scale);
    entry(2 * m + 1, col(n, 0)).add(share(ops, ops->D), w * d_scale);
    entry(2 * m + 1, col(n, 1)).add(share(ops, ops->T), w);
  };

  const cplx k0 = sys.k0_;
  for (std::size_t m = 0; m < l; ++m) {
    const auto& dm = sys.interfaces_[m];
    for (std::size_t n = 0; n < l; ++n) {
      const auto ext = cache.get(*dm.space, *sys.interfaces_[n].space, k0);
      add_calderon(m, n, ext, 1.0, 1.0, 1.0);
    }
    // interior operator with the density scalings of the exterior-scaled unknowns
    const auto in = cache.get(*dm.space, *dm.space, dm.k_interior);
    const double rr = dm.density_ratio;
    const cplx sign = formulation == Formulation::Muller ? -1.0 : 1.0;
    add_calderon(m, m, in, sign, 1.0 / rr, rr);
    if (formulation == Formulation::Muller) {
      entry(2 * m, col(m, 0)).add(dm.mass, 1.0);
      entry(2 * m + 1, col(m, 1)).add(dm.mass, 1.0);
    }
  }
  for (auto& e : sys.blocks_) {
    std::erase_if(e.dense, [](const WeightedDense& t) { return t.weight == cplx(0.0, 0.0); });
    std::erase_if(e.sparse, [](const WeightedSparse& t) { return t.weight == cplx(0.0, 0.0); });
  }

  PlaneWave w = wave;
  w.k0 = k0;
  sys.rhs_.resize(sys.dimension_);
  sys.incident_.resize(sys.dimension_);
  for (std::size_t m = 0; m < l; ++m) {
    const auto& dm = sys.interfaces_[m];
    const auto moments = incident_moments(w, dm.space->mesh());
    const Eigen::Index n = dm.space->dof_count();
    // Dirichlet trace drives row 0, Neumann trace row 1
    sys.rhs_.segment(dm.offset, n) = moments.dirichlet;
    sys.rhs_.segment(dm.offset + n, n) = moments.neumann;
    sys.incident_.segment(sys.block_offset(sys.phi_block(m)), n) = dm.mass_solver->solve(moments.dirichlet);
    sys.incident_.segment(sys.block_offset(sys.psi_block(m)), n) = dm.mass_solver->solve(moments.neumann);
  }
  return sys;
}

BlockSystem build_pmchwt(const Scene& scene, double frequency, const PlaneWave& wave, OperatorCache& cache) {
  return build_system(Formulation::Pmchwt, scene, frequency, wave, cache);
}

BlockSystem build_muller(const Scene& scene, double frequency, const PlaneWave& wave, OperatorCache& cache) {
  return build_system(Formulation::Muller, scene, frequency, wave, cache);
}

BlockSystem build_pmchwt_permuted(const Scene& scene, double frequency, const PlaneWave& wave, OperatorCache& cache) {
  return build_system(Formulation::PmchwtPermuted, scene, frequency, wave, cache);
}

SurfaceSolution split_solution(const BlockSystem& system, const CVector& x) {
  if (x.size() != system.dimension()) throw Error(ErrorCode::DimensionMismatch, "solution length mismatch");
  SurfaceSolution s;
  for (std::size_t m = 0; m < system.interface_count(); ++m) {
    const Eigen::Index n = system.interface(m).space->dof_count();
    s.phi.push_back(x.segment(system.block_offset(system.phi_block(m)), n));
    s.psi.push_back(x.segment(system.block_offset(system.psi_block(m)), n));
  }
  return s;
}

CVector stack_solution(const BlockSystem& system, const SurfaceSolution& s) {
  if (s.phi.size() != system.interface_count() || s.psi.size() != system.interface_count()) {
    throw Error(ErrorCode::DimensionMismatch, "solution interface count mismatch");
  }
  CVector x(system.dimension());
  for (std::size_t m = 0; m < system.interface_count(); ++m) {
    const Eigen::Index n = system.interface(m).space->dof_count();
    if (s.phi[m].size() != n || s.psi[m].size() != n) throw Error(ErrorCode::DimensionMismatch, "trace length mismatch");
    x.segment(system.block_offset(system.phi_block(m)), n) = s.phi[m];
    x.segment(system.block_offset(system.psi_block(m)), n) = s.psi[m];
  }
  return x;
}

}  // namespace acoubem
