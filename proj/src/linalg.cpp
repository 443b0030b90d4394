#include "srcid/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "srcid/kernels.hpp"

namespace srcid {

namespace {

double norm2(std::span<const double> v) { return std::sqrt(kernels::dot(v, v)); }

void recenter(std::vector<double>& x, std::span<const double> w, double w_sum) {
  double mean = 0.0;
  if (w.empty()) {
    mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) mean += w[i] * x[i];
    mean /= w_sum;
  }
  for (double& v : x) v -= mean;
}

// Removes the component of r along the constant vector (range of a singular A).
void project_range(std::vector<double>& r) {
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
  for (double& v : r) v -= mean;
}

}  // namespace

CgResult cg_solve(const CsrMatrix& a, std::span<const double> b_in, const CgOptions& opt,
                  std::span<const double> initial_guess) {
  const auto n = static_cast<std::size_t>(a.rows());
  if (b_in.size() != n) throw std::invalid_argument("cg_solve: right-hand side size mismatch");
  if (!opt.weights.empty() && opt.weights.size() != n)
    throw std::invalid_argument("cg_solve: weight vector size mismatch");

  std::vector<double> b(b_in.begin(), b_in.end());
  const double w_sum = opt.weights.empty() ? static_cast<double>(n)
                                           : std::accumulate(opt.weights.begin(), opt.weights.end(), 0.0);
  if (opt.deflate_mean) {
    const double sum = std::accumulate(b.begin(), b.end(), 0.0);
    double l1 = 0.0;
    for (double v : b) l1 += std::abs(v);
    if (std::abs(sum) > opt.compat_tol * l1)
      throw std::invalid_argument("cg_solve: right-hand side is not orthogonal to the constant kernel");
    if (opt.weights.empty()) {
      project_range(b);
    } else {
      for (std::size_t i = 0; i < n; ++i) b[i] -= sum * opt.weights[i] / w_sum;
    }
  }

  CgResult result;
  auto& x = result.x;
  x.assign(n, 0.0);
  if (!initial_guess.empty()) {
    if (initial_guess.size() != n) throw std::invalid_argument("cg_solve: initial guess size mismatch");
    x.assign(initial_guess.begin(), initial_guess.end());
  }
  const double b_norm = norm2(b);
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.report = {0, 0.0, true};
    return result;
  }

  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

  std::vector<double> r(n), z(n), p(n), ap(n);
  auto true_residual = [&]() {
    kernels::spmv(a, x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    if (opt.deflate_mean) project_range(r);
  };

  if (opt.deflate_mean) recenter(x, opt.weights, w_sum);
  true_residual();
  int it = 0;
  double rel = norm2(r) / b_norm;
  while (rel > opt.tol && it < opt.max_iter) {
    // (re)start
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = kernels::dot(r, z);
    while (it < opt.max_iter) {
      kernels::spmv(a, p, ap);
      const double pap = kernels::dot(p, ap);
      if (!(pap > 0.0)) break;
      const double step = rz / pap;
      kernels::axpy(step, p, x);
      kernels::axpy(-step, ap, r);
      if (opt.deflate_mean) {
        project_range(r);
        recenter(x, opt.weights, w_sum);
      }
      ++it;
      if (norm2(r) / b_norm <= opt.tol) break;
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_new = kernels::dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    const double before = rel;
    true_residual();
    rel = norm2(r) / b_norm;
    if (rel > opt.tol && rel >= before) break;  // no progress from a restart
  }

  result.report = {it, rel, rel <= opt.tol};
  if (!result.report.converged)
    throw SolveError("conjugate gradients did not converge (relative residual " + std::to_string(rel) +
                         " after " + std::to_string(it) + " iterations)",
                     result.report);
  return result;
}

namespace {

// Number of eigenvalues of the symmetric tridiagonal (alpha, beta) below x.
int sturm_count(const std::vector<double>& alpha, const std::vector<double>& beta, double x) {
  int count = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double off = i == 0 ? 0.0 : beta[i - 1] * beta[i - 1];
    d = alpha[i] - x - (i == 0 ? 0.0 : off / d);
    if (d == 0.0) d = -1e-300;
    if (d < 0.0) ++count;
  }
  return count;
}

double tridiagonal_max_eigenvalue(const std::vector<double>& alpha, const std::vector<double>& beta) {
  double lo = alpha[0], hi = alpha[0];
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double r = (i > 0 ? std::abs(beta[i - 1]) : 0.0) + (i + 1 < alpha.size() ? std::abs(beta[i]) : 0.0);
    lo = std::min(lo, alpha[i] - r);
    hi = std::max(hi, alpha[i] + r);
  }
  const int m = static_cast<int>(alpha.size());
  for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(std::abs(lo), std::abs(hi)); ++k) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count(alpha, beta, mid) < m) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double max_generalized_eigenvalue(const CsrMatrix& k, std::span<const double> w, double rel_tol) {
  const auto n = static_cast<std::size_t>(k.rows());
  if (w.size() != n) throw std::invalid_argument("weight vector size mismatch");
  if (n == 0) return 0.0;
  std::vector<double> inv_sqrt_w(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w[i] > 0.0)) throw std::invalid_argument("weights must be positive");
    inv_sqrt_w[i] = 1.0 / std::sqrt(w[i]);
  }

  // Deterministic start vector from a fixed splitmix64 stream.
  std::vector<std::vector<double>> basis;
  std::vector<double> q(n);
  std::uint64_t state = 0x9E3779B97F4A7C15ULL;
  for (auto& v : q) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    v = static_cast<double>(z >> 11) * 0x1.0p-53 - 0.5;
  }
  double qn = norm2(q);
  for (auto& v : q) v /= qn;

  std::vector<double> alpha, beta, tmp(n), y(n);
  double previous = 0.0;
  int stable = 0;
  const std::size_t max_steps = std::min<std::size_t>(n, 600);
  for (std::size_t step = 0; step < max_steps; ++step) {
    basis.push_back(q);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = inv_sqrt_w[i] * q[i];
    kernels::spmv(k, tmp, y);
    for (std::size_t i = 0; i < n; ++i) y[i] *= inv_sqrt_w[i];
    const double a = kernels::dot(q, y);
    alpha.push_back(a);
    // full reorthogonalization (twice for stability)
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : basis) kernels::axpy(-kernels::dot(v, y), v, y);
    const double current = tridiagonal_max_eigenvalue(alpha, beta);
    if (step > 0 && std::abs(current - previous) <= 1e-3 * rel_tol * std::abs(current)) {
      if (++stable >= 3) return current;
    } else {
      stable = 0;
    }
    previous = current;
    const double b = norm2(y);
    if (b <= 1e-14 * std::max(1.0, std::abs(current))) return current;  // invariant subspace
    beta.push_back(b);
    for (std::size_t i = 0; i < n; ++i) q[i] = y[i] / b;
  }
  return tridiagonal_max_eigenvalue(alpha, beta);
}

}  // namespace srcid
