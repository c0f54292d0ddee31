#include "acoubem/precond.hpp"

#include "acoubem/error.hpp"

#include <cmath>
#include <numbers>

namespace acoubem {

cplx PadeCoefficients::operator()(cplx z) const {
  cplx f = c0;
  for (int j = 0; j < n_pade; ++j) f += a[j] * (z - 1.0) / (1.0 + b[j] * (z - 1.0));
  return f;
}

PadeCoefficients pade_coefficients(int n_pade, double theta) {
  if (n_pade < 1) throw Error(ErrorCode::InvalidArgument, "n_pade must be >= 1");
  if (!(theta >= 0.0 && theta < std::numbers::pi)) throw Error(ErrorCode::InvalidTheta, "theta must lie in [0, pi)");
  PadeCoefficients p;
  p.n_pade = n_pade;
  p.theta = theta;
  const cplx rot = std::exp(cplx(0.0, -theta));
  cplx sum = 0.0;
  const double m = 2.0 * n_pade + 1.0;
  for (int j = 1; j <= n_pade; ++j) {
    const double s = std::sin(j * std::numbers::pi / m), c = std::cos(j * std::numbers::pi / m);
    const double aj = 2.0 / m * s * s;
    const double bj = c * c;
    const cplx rho = 1.0 + bj * (rot - 1.0);
    sum += aj * (rot - 1.0) / rho;
    p.a.push_back(std::exp(cplx(0.0, -theta / 2.0)) * aj / (rho * rho));
    p.b.push_back(rot * bj / rho);
  }
  p.c0 = std::exp(cplx(0.0, theta / 2.0)) * (1.0 + sum);
  return p;
}

OsrcOperator::OsrcOperator(OsrcRole role, std::shared_ptr<const SparseOperator> mass,
                           std::shared_ptr<const SparseOperator> stiffness, cplx k_osrc, cplx k_eps, int n_pade,
                           double theta)
    : role_(role), k_(k_osrc), k_eps_(k_eps), pade_(pade_coefficients(n_pade, theta)) {
  if (!mass || !stiffness) throw Error(ErrorCode::InvalidArgument, "OSRC operator needs mass and stiffness");
  if (mass->matrix.rows() != stiffness->matrix.rows()) throw Error(ErrorCode::DimensionMismatch, "mass/stiffness size mismatch");
  if (k_osrc == cplx(0.0, 0.0) || k_eps == cplx(0.0, 0.0)) throw Error(ErrorCode::InvalidArgument, "OSRC wavenumbers must be nonzero");
  mass_ = mass->matrix.cast<cplx>();
  scaled_stiffness_ = stiffness->matrix.cast<cplx>() / (k_eps * k_eps);

  auto factorise = [&](const ComplexSparse& a, const std::string& what) {
    auto lu = std::make_unique<Lu>();
    lu->compute(a);
    if (lu->info() != Eigen::Success) throw Error(ErrorCode::SingularFactorisation, what + " is singular");
    return lu;
  };
  for (int j = 0; j < n_pade; ++j) {
    const ComplexSparse a = mass_ - pade_.b[j] * scaled_stiffness_;
    terms_.push_back(factorise(a, "Pade term " + std::to_string(j + 1)));
  }
  if (role == OsrcRole::NtD) inverse_ = factorise(mass_ - scaled_stiffness_, "NtD operator (M - S/k_eps^2)");
}

CVector OsrcOperator::sqrt_part(const CVector& v) const {
  if (v.size() != mass_.rows()) throw Error(ErrorCode::DimensionMismatch, "OSRC: vector length mismatch");
  const CVector rhs = -(scaled_stiffness_ * v);
  CVector out = pade_.c0 * v;
  for (int j = 0; j < pade_.n_pade; ++j) {
    const CVector y = terms_[j]->solve(rhs);
    out += pade_.a[j] * y;
  }
  return out;
}

CVector OsrcOperator::apply(const CVector& v) const {
  const cplx ik = cplx(0.0, 1.0) * k_;
  const CVector s = sqrt_part(v);
  if (role_ == OsrcRole::DtN) return ik * s;
  const CVector ms = mass_ * s;
  const CVector w = inverse_->solve(ms);
  return w / ik;
}

const char* to_string(PreconditionerKind kind) {
  switch (kind) {
    case PreconditionerKind::Identity: return "none";
    case PreconditionerKind::Mass: return "mass";
    case PreconditionerKind::Calderon: return "calderon";
    case PreconditionerKind::OsrcInterior: return "osrc-interior";
    case PreconditionerKind::OsrcExterior: return "osrc-exterior";
  }
  return "?";
}

PreconditionerKind preconditioner_from_string(const std::string& name) {
  if (name == "none") return PreconditionerKind::Identity;
  if (name == "mass") return PreconditionerKind::Mass;
  if (name == "calderon") return PreconditionerKind::Calderon;
  if (name == "osrc-interior") return PreconditionerKind::OsrcInterior;
  if (name == "osrc-exterior") return PreconditionerKind::OsrcExterior;
  throw Error(ErrorCode::ConfigError, "unknown preconditioner '" + name + "'");
}

CVector apply_inverse_mass(const BlockSystem& system, const CVector& x) {
  if (x.size() != system.dimension()) throw Error(ErrorCode::DimensionMismatch, "preconditioner: vector length mismatch");
  CVector y(x.size());
  for (std::size_t r = 0; r < 2 * system.interface_count(); ++r) {
    const auto off = system.block_offset(r);
    const auto n = system.block_size(r);
    y.segment(off, n) = system.interface(r / 2).mass_solver->solve(x.segment(off, n));
  }
  return y;
}

namespace {

class IdentityPreconditioner final : public Preconditioner {
 public:
  PreconditionerKind kind() const override { return PreconditionerKind::Identity; }
  CVector apply(const CVector& x) const override { return x; }
};

class MassPreconditioner final : public Preconditioner {
 public:
  explicit MassPreconditioner(const BlockSystem& s) : system_(s) {}
  PreconditionerKind kind() const override { return PreconditionerKind::Mass; }
  CVector apply(const CVector& x) const override { return apply_inverse_mass(system_, x); }

 private:
  const BlockSystem& system_;
};

class CalderonPreconditioner final : public Preconditioner {
 public:
  explicit CalderonPreconditioner(const BlockSystem& s) : system_(s) {}
  PreconditionerKind kind() const override { return PreconditionerKind::Calderon; }
  CVector apply(const CVector& x) const override {
    return apply_inverse_mass(system_, system_.apply_diagonal(apply_inverse_mass(system_, x)));
  }

 private:
  const BlockSystem& system_;
};

class OsrcPreconditioner final : public Preconditioner {
 public:
  OsrcPreconditioner(PreconditionerKind kind, const BlockSystem& s, const OsrcSettings& settings) : kind_(kind), system_(s) {
    for (std::size_t m = 0; m < s.interface_count(); ++m) {
      const auto& itf = s.interface(m);
      const cplx k = kind == PreconditionerKind::OsrcInterior ? itf.k_interior : s.k_exterior();
      const cplx k_eps = damped_wavenumber(k, itf.r_eff);
      auto stiffness = std::make_shared<const SparseOperator>(laplace_beltrami(*itf.space));
      dtn_.push_back(std::make_unique<OsrcOperator>(OsrcRole::DtN, itf.mass, stiffness, k, k_eps, settings.n_pade, settings.theta));
      ntd_.push_back(std::make_unique<OsrcOperator>(OsrcRole::NtD, itf.mass, stiffness, k, k_eps, settings.n_pade, settings.theta));
    }
  }
  PreconditionerKind kind() const override { return kind_; }
  CVector apply(const CVector& x) const override {
    CVector y = apply_inverse_mass(system_, x);
    for (std::size_t m = 0; m < system_.interface_count(); ++m) {
      // the V-type row receives the DtN map, the D-type row the NtD map
      const auto o0 = system_.block_offset(2 * m), o1 = system_.block_offset(2 * m + 1);
      const auto n = system_.block_size(2 * m);
      y.segment(o0, n) = dtn_[m]->apply(y.segment(o0, n));
      y.segment(o1, n) = ntd_[m]->apply(y.segment(o1, n));
    }
    return y;
  }

 private:
  PreconditionerKind kind_;
  const BlockSystem& system_;
  std::vector<std::unique_ptr<OsrcOperator>> dtn_, ntd_;
};

}  // namespace

std::unique_ptr<Preconditioner> make_preconditioner(PreconditionerKind kind, const BlockSystem& system,
                                                    const OsrcSettings& osrc) {
  switch (kind) {
    case PreconditionerKind::Identity: return std::make_unique<IdentityPreconditioner>();
    case PreconditionerKind::Mass: return std::make_unique<MassPreconditioner>(system);
    case PreconditionerKind::Calderon: return std::make_unique<CalderonPreconditioner>(system);
    case PreconditionerKind::OsrcInterior:
    case PreconditionerKind::OsrcExterior:
      if (system.formulation() != Formulation::PmchwtPermuted) {
        throw Error(ErrorCode::FormulationMismatch, "OSRC preconditioning needs the pmchwt-permuted formulation");
      }
      return std::make_unique<OsrcPreconditioner>(kind, system, osrc);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown preconditioner kind");
}

}  // namespace acoubem
