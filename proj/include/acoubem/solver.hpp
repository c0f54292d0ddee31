#pragma once

#include "acoubem/medium.hpp"

#include <functional>
#include <string>
#include <vector>

namespace acoubem {

using LinearMap = std::function<CVector(const CVector&)>;

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;  // preconditioned relative residuals, entry 0 is 1
  bool converged = false;
  double wall_time_total_s = 0.0;
  double wall_time_per_iteration_s = 0.0;
  int matvec_count = 0;
};

struct GmresOptions {
  double tol = 1e-7;
  int max_iter = 0;  // 0: min(dimension, 2000)
};

struct GmresResult {
  CVector x;
  SolveReport report;
};

/// Left-preconditioned GMRES without restart, started from x = 0. Convergence
/// is measured on ||P(b - A x)|| / ||P b||. Arnoldi uses modified Gram-Schmidt
/// with one reorthogonalisation pass.
GmresResult gmres(const LinearMap& apply_a, const LinearMap& apply_p, const CVector& b, const GmresOptions& options = {});

std::string to_json(const SolveReport& report);

}  // namespace acoubem
