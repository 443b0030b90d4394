#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "srcid/csr_matrix.hpp"

namespace srcid {

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Raised when an iterative solver stops without meeting its tolerance.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(report) {}
  [[nodiscard]] const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

struct CgOptions {
  double tol = 1e-10;
  int max_iter = 20000;
  /// Treat A as singular with the constant vector as kernel. The right-hand
  /// side must sum to zero (up to `compat_tol` times its l1 norm) and the
  /// returned x has zero weighted mean sum_i w_i x_i.
  bool deflate_mean = false;
  /// Weights for the mean; uniform when empty.
  std::span<const double> weights = {};
  double compat_tol = 1e-8;
};

struct CgResult {
  std::vector<double> x;
  SolveReport report;
};

/// Jacobi-preconditioned conjugate gradients for symmetric positive
/// (semi-)definite A. Throws SolveError on non-convergence and
/// std::invalid_argument on an incompatible singular right-hand side.
CgResult cg_solve(const CsrMatrix& a, std::span<const double> b, const CgOptions& options = {},
                  std::span<const double> initial_guess = {});

/// Largest eigenvalue of K v = lambda W v for symmetric K and positive diagonal W,
/// by Lanczos iteration with full reorthogonalization.
double max_generalized_eigenvalue(const CsrMatrix& k, std::span<const double> w, double rel_tol = 1e-6);

}  // namespace srcid
