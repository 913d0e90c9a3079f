#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mominv/rational.hpp"

namespace mominv {

/// Row-compressed sparse matrix of exact rationals. Zeros are never stored.
class SparseMatrix {
 public:
  using Row = std::map<std::size_t, Rational>;

  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows) {}

  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const;

  Rational at(std::size_t r, std::size_t c) const;
  const Row& row(std::size_t r) const { return rows_.at(r); }

  void add(std::size_t r, std::size_t c, const Rational& v);
  void set(std::size_t r, std::size_t c, const Rational& v);

  SparseMatrix select_rows(std::span<const std::size_t> keep) const;
  /// Keeps the listed columns, renumbered 0..keep.size()-1 in the given order.
  SparseMatrix select_cols(std::span<const std::size_t> keep) const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t cols_ = 0;
  std::vector<Row> rows_;
};

/// Dense row-major matrix of exact rationals for small eliminations.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

DenseMatrix to_dense(const SparseMatrix& m);

std::size_t rank(DenseMatrix m);

/// Rows kept by a forward pass that retains each row not in the span of the
/// rows retained before it. The result is a row basis.
std::vector<std::size_t> independent_rows(const DenseMatrix& m);

/// Solves a square system exactly; nullopt when the matrix is singular.
std::optional<std::vector<Rational>> solve(DenseMatrix a, std::vector<Rational> rhs);

}  // namespace mominv
