#include "acoubem/solver.hpp"

#include "acoubem/error.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>

namespace acoubem {

namespace {

// Givens rotation zeroing b in (a, b).
void make_rotation(cplx a, cplx b, double& c, cplx& s, cplx& r) {
  const double na = std::abs(a), nb = std::abs(b);
  if (nb == 0.0) {
    c = 1.0;
    s = 0.0;
    r = a;
    return;
  }
  if (na == 0.0) {
    c = 0.0;
    s = std::conj(b) / nb;
    r = nb;
    return;
  }
  const double norm = std::hypot(na, nb);
  const cplx phase = a / na;
  c = na / norm;
  s = phase * std::conj(b) / norm;
  r = phase * norm;
}

}  // namespace

GmresResult gmres(const LinearMap& apply_a, const LinearMap& apply_p, const CVector& b, const GmresOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "GMRES tolerance must be positive");
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = b.size();
  GmresResult out{CVector::Zero(n), {}};
  auto& rep = out.report;
  auto finish = [&] {
    rep.wall_time_total_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.wall_time_per_iteration_s = rep.iterations > 0 ? rep.wall_time_total_s / rep.iterations : 0.0;
  };

  const CVector pb = apply_p(b);
  if (pb.size() != n) throw Error(ErrorCode::DimensionMismatch, "preconditioner changed the vector length");
  const double beta = pb.norm();
  if (beta == 0.0) {
    rep.converged = true;
    rep.residual_history.push_back(0.0);
    finish();
    return out;
  }
  const int max_iter = options.max_iter > 0 ? options.max_iter : static_cast<int>(std::min<Eigen::Index>(n, 2000));

  std::vector<CVector> basis;
  basis.reserve(static_cast<std::size_t>(max_iter) + 1);
  basis.push_back(pb / beta);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(max_iter + 1, max_iter);
  std::vector<double> cs(max_iter);
  std::vector<cplx> sn(max_iter);
  CVector g = CVector::Zero(max_iter + 1);
  g[0] = beta;
  rep.residual_history.push_back(1.0);

  int j = 0;
  for (; j < max_iter; ++j) {
    const CVector av = apply_a(basis[j]);
    ++rep.matvec_count;
    if (av.size() != n) throw Error(ErrorCode::DimensionMismatch, "operator changed the vector length");
    CVector w = apply_p(av);
    const double w_norm0 = w.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const cplx hij = basis[i].dot(w);
        h(i, j) += hij;
        w -= hij * basis[i];
      }
    }
    const double hn = w.norm();
    h(j + 1, j) = hn;

    for (int i = 0; i < j; ++i) {
      const cplx t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
      h(i + 1, j) = -std::conj(sn[i]) * h(i, j) + cs[i] * h(i + 1, j);
      h(i, j) = t;
    }
    cplx r;
    make_rotation(h(j, j), h(j + 1, j), cs[j], sn[j], r);
    h(j, j) = r;
    h(j + 1, j) = 0.0;
    g[j + 1] = -std::conj(sn[j]) * g[j];
    g[j] = cs[j] * g[j];

    const double res = std::abs(g[j + 1]) / beta;
    rep.residual_history.push_back(res);
    rep.iterations = j + 1;
    if (res <= options.tol) {
      rep.converged = true;
      ++j;
      break;
    }
    // an invariant Krylov space with residual above tolerance cannot improve
    if (hn <= 1e-14 * w_norm0 || hn == 0.0) {
      finish();
      throw Error(ErrorCode::Breakdown, "Arnoldi breakdown at iteration " + std::to_string(j + 1));
    }
    basis.push_back(w / hn);
  }

  const int k = j;
  if (k > 0) {
    const CVector y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i) out.x += y[i] * basis[i];
  }
  finish();
  return out;
}

std::string to_json(const SolveReport& report) {
  nlohmann::json j;
  j["iterations"] = report.iterations;
  j["residual_history"] = report.residual_history;
  j["converged"] = report.converged;
  j["wall_time_total_s"] = report.wall_time_total_s;
  j["wall_time_per_iteration_s"] = report.wall_time_per_iteration_s;
  j["matvec_count"] = report.matvec_count;
  return j.dump(2);
}

}  // namespace acoubem
