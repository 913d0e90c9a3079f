#include "mominv/linalg.hpp"

#include <stdexcept>
#include <utility>

namespace mominv {

std::size_t SparseMatrix::nnz() const {
  std::size_t total = 0;
  for (const auto& r : rows_) total += r.size();
  return total;
}

Rational SparseMatrix::at(std::size_t r, std::size_t c) const {
  const Row& row = rows_.at(r);
  auto it = row.find(c);
  return it == row.end() ? Rational(0) : it->second;
}

void SparseMatrix::add(std::size_t r, std::size_t c, const Rational& v) {
  if (c >= cols_) throw std::out_of_range("sparse matrix column out of range");
  if (v == 0) return;
  Row& row = rows_.at(r);
  auto [it, inserted] = row.try_emplace(c, v);
  if (!inserted) {
    it->second += v;
    if (it->second == 0) row.erase(it);
  }
}

void SparseMatrix::set(std::size_t r, std::size_t c, const Rational& v) {
  if (c >= cols_) throw std::out_of_range("sparse matrix column out of range");
  Row& row = rows_.at(r);
  if (v == 0) {
    row.erase(c);
  } else {
    row[c] = v;
  }
}

SparseMatrix SparseMatrix::select_rows(std::span<const std::size_t> keep) const {
  SparseMatrix out(keep.size(), cols_);
  for (std::size_t i = 0; i < keep.size(); ++i) out.rows_[i] = rows_.at(keep[i]);
  return out;
}

SparseMatrix SparseMatrix::select_cols(std::span<const std::size_t> keep) const {
  std::map<std::size_t, std::size_t> remap;
  for (std::size_t i = 0; i < keep.size(); ++i) remap.emplace(keep[i], i);
  SparseMatrix out(rows(), keep.size());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (const auto& [c, v] : rows_[r]) {
      if (auto it = remap.find(c); it != remap.end()) out.rows_[r].emplace(it->second, v);
    }
  }
  return out;
}

DenseMatrix to_dense(const SparseMatrix& m) {
  DenseMatrix d(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (const auto& [c, v] : m.row(r)) d(r, c) = v;
  }
  return d;
}

namespace {

// Reduces row `r` of `m` against the pivots found so far. Returns the pivot
// column of the reduced row, or cols() if it became zero.
std::size_t reduce_row(DenseMatrix& m, std::size_t r, const std::vector<std::pair<std::size_t, std::size_t>>& pivots) {
  for (const auto& [pr, pc] : pivots) {
    if (m(r, pc) == 0) continue;
    Rational f = m(r, pc) / m(pr, pc);
    for (std::size_t c = pc; c < m.cols(); ++c) {
      if (m(pr, c) != 0) m(r, c) -= f * m(pr, c);
    }
  }
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (m(r, c) != 0) return c;
  }
  return m.cols();
}

}  // namespace

std::vector<std::size_t> independent_rows(const DenseMatrix& input) {
  DenseMatrix m = input;
  std::vector<std::pair<std::size_t, std::size_t>> pivots;
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::size_t pc = reduce_row(m, r, pivots);
    if (pc == m.cols()) continue;
    // Keep pivots sorted by column so the reduction above stays triangular.
    auto pos = pivots.begin();
    while (pos != pivots.end() && pos->second < pc) ++pos;
    pivots.insert(pos, {r, pc});
    kept.push_back(r);
  }
  return kept;
}

std::size_t rank(DenseMatrix m) { return independent_rows(m).size(); }

std::optional<std::vector<Rational>> solve(DenseMatrix a, std::vector<Rational> rhs) {
  const std::size_t n = a.rows();
  if (a.cols() != n || rhs.size() != n) throw std::invalid_argument("solve: dimension mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a(piv, col) == 0) ++piv;
    if (piv == n) return std::nullopt;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(piv, c), a(col, c));
      std::swap(rhs[piv], rhs[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      if (a(r, col) == 0) continue;
      Rational f = a(r, col) / a(col, col);
      for (std::size_t c = col; c < n; ++c) {
        if (a(col, c) != 0) a(r, c) -= f * a(col, c);
      }
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = n; i-- > 0;) {
    Rational s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) {
      if (a(i, c) != 0) s -= a(i, c) * x[c];
    }
    x[i] = s / a(i, i);
  }
  return x;
}

}  // namespace mominv
