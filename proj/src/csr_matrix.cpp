#include "srcid/csr_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srcid/kernels.hpp"

namespace srcid {

CsrMatrix CsrMatrix::from_triplets(Index n, std::vector<Triplet> triplets) {
  if (n < 0) throw std::invalid_argument("negative matrix dimension");
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.n_ = n;
  m.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  Index prev_row = -1;
  Index prev_col = -1;
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw std::out_of_range("triplet index outside matrix");
    if (t.row == prev_row && t.col == prev_col) {
      m.values_.back() += t.value;
      continue;
    }
    m.cols_.push_back(t.col);
    m.values_.push_back(t.value);
    ++m.offsets_[t.row + 1];
    prev_row = t.row;
    prev_col = t.col;
  }
  for (Index i = 0; i < n; ++i) m.offsets_[i + 1] += m.offsets_[i];
  return m;
}

CsrMatrix CsrMatrix::identity(Index n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (Index i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, std::move(t));
}

double CsrMatrix::at(Index i, Index j) const {
  const auto begin = cols_.begin() + offsets_[i];
  const auto end = cols_.begin() + offsets_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n_);
  for (Index i = 0; i < n_; ++i) d[i] = at(i, i);
  return d;
}

std::vector<double> CsrMatrix::row_sums() const {
  std::vector<double> s(n_, 0.0);
  for (Index i = 0; i < n_; ++i)
    for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) s[i] += values_[k];
  return s;
}

double CsrMatrix::max_asymmetry() const {
  double worst = 0.0;
  for (Index i = 0; i < n_; ++i)
    for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k)
      worst = std::max(worst, std::abs(values_[k] - at(cols_[k], i)));
  return worst;
}

CsrMatrix CsrMatrix::principal_submatrix(std::span<const Index> keep) const {
  std::vector<Index> map(n_, -1);
  for (std::size_t k = 0; k < keep.size(); ++k) map[keep[k]] = static_cast<Index>(k);
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const Index i = keep[r];
    for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k)
      if (map[cols_[k]] >= 0) t.push_back({static_cast<Index>(r), map[cols_[k]], values_[k]});
  }
  return from_triplets(static_cast<Index>(keep.size()), std::move(t));
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_);
  kernels::spmv(*this, x, y);
  return y;
}

double CsrMatrix::quadratic_form(std::span<const double> x) const { return bilinear_form(x, x); }

double CsrMatrix::bilinear_form(std::span<const double> x, std::span<const double> y) const {
  const auto ay = multiply(y);
  return kernels::dot(x, ay);
}

}  // namespace srcid
