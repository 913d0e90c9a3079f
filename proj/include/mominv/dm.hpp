#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "mominv/structural.hpp"

namespace mominv {

inline constexpr std::size_t unmatched = std::numeric_limits<std::size_t>::max();

struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  ///< (row, col), ascending row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  std::vector<std::size_t> row_mate;  ///< col matched to each row, or `unmatched`
  std::vector<std::size_t> col_mate;  ///< row matched to each col, or `unmatched`
};

/// Maximum cardinality bipartite matching between rows and columns of `s`.
/// Augmenting paths are searched row by row in ascending order, visiting
/// columns in ascending order, so the result is a pure function of `s`.
Matching max_matching(const StructuralMatrix& s);

struct BlockRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  bool contains(std::size_t i) const noexcept { return begin <= i && i < end; }
  friend bool operator==(const BlockRange&, const BlockRange&) = default;
};

/// Dulmage-Mendelsohn form of a full-row-rank pattern:
///
///   P A Q = [ A_u  A_ud ]
///           [ 0    A_d  ]
///
/// with A_u of full structural row rank and A_d square, block upper
/// triangular with the finest possible partition into irreducible blocks.
struct DMResult {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_perm;  ///< row_perm[i] = original row placed at position i
  std::vector<std::size_t> col_perm;  ///< col_perm[j] = original column placed at position j
  std::size_t N_d = 0;
  /// Diagonal blocks of A_d as ranges in 0..N_d, top-left to bottom-right.
  std::vector<BlockRange> blocks;

  std::size_t eta() const noexcept { return blocks.size(); }
  std::size_t underdetermined_rows() const noexcept { return rows - N_d; }
  std::size_t underdetermined_cols() const noexcept { return cols - N_d; }
  /// Absolute row/column positions in P A Q of diagonal block i (0-based).
  BlockRange row_range(std::size_t i) const;
  BlockRange col_range(std::size_t i) const;
};

/// Requires structural rank == rows; throws AssumptionError otherwise.
/// Blocks are ordered topologically; among blocks free to go next, the one
/// holding the smallest original column index comes first.
DMResult dm_decompose(const StructuralMatrix& s);

StructuralMatrix permute(const StructuralMatrix& s, const std::vector<std::size_t>& row_perm,
                         const std::vector<std::size_t>& col_perm);

struct PsiBlock {
  BlockRange rows;
  BlockRange cols;
};

/// The perturbation system after applying diag(P,P), diag(Q,Q) and swapping
/// the middle block rows/columns:
///
///   Psi = [ A_u1  A_u2  A_u3  ]
///         [ 0     A_d   A_d^k ]
///         [ 0     0     A_d   ]
///
/// Block 0 is the underdetermined part A_u1. Blocks 1..eta are the diagonal
/// blocks of the derivative copy of A_d, blocks eta+1..2eta those of the
/// moment copy.
struct PsiSystem {
  std::size_t M = 0;
  std::size_t N = 0;
  std::size_t N_d = 0;
  std::size_t eta = 0;
  std::size_t k = 0;
  StructuralMatrix psi;
  StructuralVector rhs;
  /// Row/column of the unpermuted perturbation system each Psi row/column came from.
  std::vector<std::size_t> row_origin;
  std::vector<std::size_t> col_origin;
  std::vector<PsiBlock> blocks;
  std::vector<bool> deriv_block_flags;
  std::vector<VarLabel> var_labels;
  std::vector<EqLabel> row_labels;

  std::size_t node_count() const noexcept { return 2 * eta; }
  /// First row/column of the welldetermined trailing part.
  std::size_t determined_row_offset() const noexcept { return 2 * (M - N_d); }
  std::size_t determined_col_offset() const noexcept { return 2 * (N - N_d); }
};

PsiSystem assemble_psi(const AugmentedSystem& aug, const DMResult& dm);

}  // namespace mominv
