#pragma once

#include <span>
#include <vector>

#include "srcid/fields.hpp"

namespace srcid {

/// Square matrix in compressed sparse row form. Immutable after construction.
class CsrMatrix {
 public:
  struct Triplet {
    Index row;
    Index col;
    double value;
  };

  CsrMatrix() = default;
  /// Sums duplicate entries; columns within a row end up sorted.
  static CsrMatrix from_triplets(Index n, std::vector<Triplet> triplets);
  static CsrMatrix identity(Index n);

  [[nodiscard]] Index rows() const { return n_; }
  [[nodiscard]] std::size_t nonzeros() const { return values_.size(); }
  [[nodiscard]] const std::vector<Index>& row_offsets() const { return offsets_; }
  [[nodiscard]] const std::vector<Index>& col_indices() const { return cols_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  [[nodiscard]] double at(Index i, Index j) const;
  [[nodiscard]] std::vector<double> diagonal() const;
  [[nodiscard]] std::vector<double> row_sums() const;
  /// max |A_ij - A_ji| over stored entries.
  [[nodiscard]] double max_asymmetry() const;
  /// Principal submatrix on the given (sorted) index set.
  [[nodiscard]] CsrMatrix principal_submatrix(std::span<const Index> keep) const;

  [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;
  [[nodiscard]] double quadratic_form(std::span<const double> x) const;
  [[nodiscard]] double bilinear_form(std::span<const double> x, std::span<const double> y) const;

 private:
  Index n_ = 0;
  std::vector<Index> offsets_{0};
  std::vector<Index> cols_;
  std::vector<double> values_;
};

}  // namespace srcid
