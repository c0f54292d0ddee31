#pragma once

#include "acoubem/assembly.hpp"
#include "acoubem/formulations.hpp"

#include <Eigen/SparseLU>

#include <memory>
#include <string>
#include <vector>

namespace acoubem {

/// Rotated-branch Pade approximation of sqrt(z):
/// f(z) = c0 + sum_j a_j (z - 1) / (1 + b_j (z - 1)).
struct PadeCoefficients {
  int n_pade = 0;
  double theta = 0.0;
  cplx c0;
  std::vector<cplx> a;
  std::vector<cplx> b;

  cplx operator()(cplx z) const;
};

/// Throws InvalidArgument for n_pade < 1 and InvalidTheta unless 0 <= theta < pi.
PadeCoefficients pade_coefficients(int n_pade, double theta);

enum class OsrcRole { DtN, NtD };

/// Localised Dirichlet-to-Neumann or Neumann-to-Dirichlet map acting on P1
/// coefficient vectors, with X = Laplace-Beltrami / k_eps^2 realised as
/// -M^{-1} S / k_eps^2.
class OsrcOperator {
 public:
  OsrcOperator(OsrcRole role, std::shared_ptr<const SparseOperator> mass, std::shared_ptr<const SparseOperator> stiffness,
               cplx k_osrc, cplx k_eps, int n_pade, double theta);

  CVector apply(const CVector& v) const;

  OsrcRole role() const { return role_; }
  cplx k_osrc() const { return k_; }
  cplx k_eps() const { return k_eps_; }
  const PadeCoefficients& coefficients() const { return pade_; }

 private:
  using ComplexSparse = Eigen::SparseMatrix<cplx>;
  using Lu = Eigen::SparseLU<ComplexSparse, Eigen::COLAMDOrdering<int>>;

  CVector sqrt_part(const CVector& v) const;

  OsrcRole role_;
  cplx k_, k_eps_;
  PadeCoefficients pade_;
  ComplexSparse mass_, scaled_stiffness_;  // S / k_eps^2
  std::vector<std::unique_ptr<Lu>> terms_;
  std::unique_ptr<Lu> inverse_;  // (M - S / k_eps^2), NtD only
};

enum class PreconditionerKind { Identity, Mass, Calderon, OsrcInterior, OsrcExterior };
const char* to_string(PreconditionerKind kind);
PreconditionerKind preconditioner_from_string(const std::string& name);

struct OsrcSettings {
  int n_pade = 4;
  double theta = 3.14159265358979323846 / 3.0;
};

/// Left preconditioner acting on weak-form residuals of a BlockSystem.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual PreconditionerKind kind() const = 0;
  virtual CVector apply(const CVector& x) const = 0;
};

/// identity: P = I; mass: P = M^{-1}; calderon: P = M^{-1} C M^{-1} with C the
/// diagonal superblocks of the system; osrc-*: P = diag(L_DtN, L_NtD) M^{-1},
/// which requires the permuted formulation.
std::unique_ptr<Preconditioner> make_preconditioner(PreconditionerKind kind, const BlockSystem& system,
                                                    const OsrcSettings& osrc = {});

/// Per-row mass solves, shared by the mass and OSRC preconditioners.
CVector apply_inverse_mass(const BlockSystem& system, const CVector& x);

}  // namespace acoubem
