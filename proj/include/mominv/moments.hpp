#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mominv/linalg.hpp"
#include "mominv/network.hpp"
#include "mominv/polynomial.hpp"

namespace mominv {

/// Ordered moment variables E[x^beta]; graded-lex sorted, never the zero index.
using MomentBasis = std::vector<MultiIndex>;

/// What an equation row stands for: the stationary moment equation of E[x^alpha],
/// or a user conservation law.
struct RowLabel {
  enum class Kind { Moment, Conservation };
  Kind kind = Kind::Moment;
  MultiIndex alpha;         ///< Moment rows
  std::size_t law = 0;      ///< Conservation rows: index into ReactionNetwork::conservation

  std::string to_string() const;
  friend bool operator==(const RowLabel&, const RowLabel&) = default;
};

/// Truncated stationary moment equations
///
///   sum_j weight_j * (A_j mu + b_j) = 0
///
/// with one slot per rate parameter (weight theta_j) followed by one
/// parameter-free slot (weight 1) holding conservation rows.
struct MomentSystem {
  std::size_t species = 0;
  std::size_t parameters = 0;
  int order = 0;
  MomentBasis basis;
  std::vector<RowLabel> equations;
  std::vector<SparseMatrix> A;           ///< parameters + 1 slots
  std::vector<std::vector<Rational>> b;  ///< parameters + 1 slots

  // Filled in by the preprocessing passes.
  std::vector<RowLabel> removed_rows;
  std::vector<MultiIndex> removed_columns;

  std::size_t rows() const noexcept { return equations.size(); }
  std::size_t cols() const noexcept { return basis.size(); }
  std::size_t slots() const noexcept { return A.size(); }
  std::size_t fixed_slot() const noexcept { return parameters; }
};

/// (x + s)^alpha - x^alpha, fully expanded.
Polynomial shift_difference(const MultiIndex& alpha, std::span<const int> s);

/// Moment equations for every alpha with 1 <= |alpha| <= order, plus one row
/// per conservation law.
MomentSystem build_moment_system(const ReactionNetwork& net, int order);

struct NumericSystem {
  SparseMatrix matrix;
  std::vector<Rational> constant;
};

/// sum_j theta_j A_j and sum_j theta_j b_j (fixed slot weighted by 1).
NumericSystem assemble_numeric(const MomentSystem& sys, std::span<const Rational> theta);

/// Sparse triplet dump: one "slot <j>" header per non-empty slot, then
/// "row col num/den" lines, then "b row num/den" lines.
std::string dump_triplets(const MomentSystem& sys);

}  // namespace mominv
