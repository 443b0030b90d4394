#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "srcid/csr_matrix.hpp"
#include "srcid/fem.hpp"
#include "srcid/linalg.hpp"
#include "support/oracles.hpp"

using namespace srcid;

TEST_CASE("csr assembly sums duplicates") {
  const auto a = CsrMatrix::from_triplets(3, {{0, 0, 1.0}, {2, 1, 4.0}, {0, 0, 2.0}, {1, 2, 4.0}, {1, 1, 5.0}});
  CHECK(a.at(0, 0) == 3.0);
  CHECK(a.at(1, 2) == 4.0);
  CHECK(a.at(0, 2) == 0.0);
  CHECK(a.nonzeros() == 4);
  CHECK(a.max_asymmetry() == 0.0);
  const std::vector<double> x{1.0, 2.0, 3.0};
  const auto y = a.multiply(x);
  CHECK(y == std::vector<double>{3.0, 22.0, 8.0});
  const Index keep[] = {1, 2};
  const auto s = a.principal_submatrix(keep);
  CHECK(s.rows() == 2);
  CHECK(s.at(0, 1) == 4.0);
  CHECK(s.at(1, 0) == 4.0);
}

TEST_CASE("cg on the identity converges in one step") {
  const auto id = CsrMatrix::identity(5);
  const std::vector<double> b{1, -2, 3, 0.5, 7};
  const auto r = cg_solve(id, b);
  CHECK(r.report.iterations <= 1);
  for (int i = 0; i < 5; ++i) CHECK(r.x[i] == doctest::Approx(b[i]));
}

TEST_CASE("cg 2x2 hand example") {
  const auto a = CsrMatrix::from_triplets(2, {{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}});
  const std::vector<double> b{1.0, 0.0};
  const auto r = cg_solve(a, b);
  CHECK(std::abs(r.x[0] - 2.0 / 3.0) <= 1e-12);
  CHECK(std::abs(r.x[1] - 1.0 / 3.0) <= 1e-12);
  CHECK(r.report.converged);
}

TEST_CASE("cg matches dense solves on random SPD systems") {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd g(20, 20);
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) g(i, j) = rng.uniform();
    const Eigen::MatrixXd a = g * g.transpose() + 0.5 * Eigen::MatrixXd::Identity(20, 20);
    std::vector<CsrMatrix::Triplet> t;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) t.push_back({i, j, a(i, j)});
    const auto csr = CsrMatrix::from_triplets(20, t);
    std::vector<double> b(20);
    for (auto& v : b) v = rng.uniform();
    CgOptions opt;
    opt.tol = 1e-12;
    const auto r = cg_solve(csr, b, opt);
    const Eigen::VectorXd ref = a.ldlt().solve(oracle::vec(b));
    CHECK((oracle::vec(r.x) - ref).norm() <= 1e-8 * ref.norm());
  }
}

TEST_CASE("cg reports non-convergence") {
  const auto m = TriMesh::structured(16);
  const auto k = assemble_stiffness(m, CoefficientSet::uniform(m, SymMat2{}, 1.0, 0.0, 1.0));
  std::vector<double> b(m.num_vertices(), 1.0);
  b[3] = -5.0;
  CgOptions opt;
  opt.max_iter = 2;
  CHECK_THROWS_AS(cg_solve(k, b, opt), SolveError);
}

TEST_CASE("deflated cg on the Neumann stiffness") {
  const auto m = TriMesh::structured(8);
  const auto k = assemble_stiffness(m, CoefficientSet::uniform(m, SymMat2{}, 0.0, 0.0, 1.0));
  const auto mass = assemble_mass(m);
  oracle::Rng rng(5);
  std::vector<double> b(m.num_vertices());
  for (auto& v : b) v = rng.uniform();
  const double mean = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
  for (auto& v : b) v -= mean;

  CgOptions opt;
  opt.deflate_mean = true;
  opt.weights = mass.lumped;
  const auto r1 = cg_solve(k, b, opt);
  double wx = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) wx += mass.lumped[i] * r1.x[i];
  CHECK(std::abs(wx) <= 1e-10);

  std::vector<double> guess(b.size(), 7.0);
  for (std::size_t i = 0; i < guess.size(); ++i) guess[i] += 0.01 * rng.uniform();
  const auto r2 = cg_solve(k, b, opt, guess);
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    diff = std::max(diff, std::abs(r1.x[i] - r2.x[i]));
    norm = std::max(norm, std::abs(r1.x[i]));
  }
  CHECK(diff <= 1e-8 * norm);

  b[0] += 1.0;
  CHECK_THROWS_AS(cg_solve(k, b, opt), std::invalid_argument);
}

namespace {
double dense_grad_norm(const TriMesh& m) {
  const Eigen::MatrixXd k = oracle::dense(assemble_gradient_gram(m));
  const auto w = assemble_mass(m).lumped;
  Eigen::MatrixXd winv = Eigen::MatrixXd::Zero(k.rows(), k.rows());
  for (Eigen::Index i = 0; i < k.rows(); ++i) winv(i, i) = 1.0 / std::sqrt(w[i]);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(winv * k * winv);
  return std::sqrt(es.eigenvalues().maxCoeff());
}
}  // namespace

TEST_CASE("gradient operator norm against a dense eigensolve") {
  for (int level : {1, 2, 4}) {
    const auto m = TriMesh::structured(level);
    CHECK(std::abs(grad_operator_norm(m) - dense_grad_norm(m)) <= 1e-6 * dense_grad_norm(m));
  }
}

TEST_CASE("gradient operator norm scales like 1/h") {
  double prev = grad_operator_norm(TriMesh::structured(4));
  for (int level : {8, 16}) {
    const auto m = TriMesh::structured(level);
    const double g = grad_operator_norm(m);
    CHECK(g / prev >= 1.9);
    CHECK(g / prev <= 2.1);
    CHECK(g * m.mesh_size() < 10.0);
    prev = g;
  }
}

TEST_CASE("gradient operator norm ignores vertex order") {
  const auto m = TriMesh::structured(6);
  const auto k = assemble_gradient_gram(m);
  const auto w = assemble_mass(m).lumped;
  const Index n = k.rows();
  // Reverse the numbering.
  std::vector<CsrMatrix::Triplet> t;
  for (Index i = 0; i < n; ++i)
    for (Index p = k.row_offsets()[i]; p < k.row_offsets()[i + 1]; ++p)
      t.push_back({n - 1 - i, n - 1 - k.col_indices()[p], k.values()[p]});
  const auto kr = CsrMatrix::from_triplets(n, t);
  std::vector<double> wr(w.rbegin(), w.rend());
  const double a = max_generalized_eigenvalue(k, w);
  const double b = max_generalized_eigenvalue(kr, wr);
  CHECK(std::abs(std::sqrt(a) - std::sqrt(b)) <= 1e-6 * std::sqrt(a));
}
