#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mominv/linalg.hpp"
#include "mominv/moments.hpp"

namespace mominv {

/// Binary sparsity pattern: the set of structurally nonzero positions.
class StructuralMatrix {
 public:
  using Position = std::pair<std::size_t, std::size_t>;

  StructuralMatrix() = default;
  StructuralMatrix(std::size_t rows, std::size_t cols, std::vector<Position> nonzeros = {});

  static StructuralMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return nz_.size(); }
  std::span<const Position> nonzeros() const noexcept { return nz_; }
  bool contains(std::size_t r, std::size_t c) const;

  /// Column indices per row, ascending.
  std::vector<std::vector<std::size_t>> row_lists() const;
  /// Row indices per column, ascending.
  std::vector<std::vector<std::size_t>> col_lists() const;

  StructuralMatrix operator|(const StructuralMatrix& other) const;

  friend bool operator==(const StructuralMatrix&, const StructuralMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Position> nz_;
};

struct StructuralVector {
  std::size_t size = 0;
  std::vector<std::size_t> nonzeros;  ///< sorted

  bool contains(std::size_t i) const;
  StructuralVector operator|(const StructuralVector& other) const;
  friend bool operator==(const StructuralVector&, const StructuralVector&) = default;
};

/// The pi operator: positions of exactly the nonzero entries.
StructuralMatrix structure_of(const SparseMatrix& m);
StructuralMatrix structure_of(const DenseMatrix& m);
StructuralVector structure_of(std::span<const Rational> v);

/// Removes rows so that the [A_j | b_j] slots share no left null vector.
/// Rows are dropped highest index first; removed labels are appended to
/// `removed_rows`.
MomentSystem eliminate_redundancy(MomentSystem sys);

/// Removes basis columns that are zero in every slot; removed moments are
/// appended to `removed_columns`.
MomentSystem drop_unused_columns(MomentSystem sys);

enum class Copy { Derivative, Moment };

/// Column of the perturbation system: a moment or its derivative in theta_k.
struct VarLabel {
  Copy copy;
  MultiIndex moment;
  std::string to_string() const;
  friend bool operator==(const VarLabel&, const VarLabel&) = default;
};

/// Row of the perturbation system: a derivative equation or a moment equation.
struct EqLabel {
  Copy copy;
  RowLabel row;
  std::string to_string() const;
  friend bool operator==(const EqLabel&, const EqLabel&) = default;
};

/// The 2M x 2N structural system
///
///   [ sum theta_j A_j   A_k            ] [ nu' ]     [ b_k            ]
///   [ 0                 sum theta_j A_j ] [ nu  ] = - [ sum theta_j b_j ]
///
/// stored through its blocks. Columns 0..N-1 are derivatives, N..2N-1 moments;
/// rows 0..M-1 derivative equations, M..2M-1 moment equations.
struct AugmentedSystem {
  std::size_t M = 0;
  std::size_t N = 0;
  std::size_t k = 0;
  StructuralMatrix union_A;
  StructuralMatrix A_k_struct;
  StructuralVector b_union;
  StructuralVector b_k_struct;
  std::vector<VarLabel> var_labels;
  std::vector<EqLabel> row_labels;
  MomentSystem numeric;

  /// Pattern of the full 2M x 2N matrix.
  StructuralMatrix phi() const;
  /// Pattern of the full right-hand side [b_k; b_union].
  StructuralVector phi_rhs() const;
};

AugmentedSystem build_augmented(const MomentSystem& sys, std::size_t k);

struct RankReport {
  std::size_t rows = 0;
  std::size_t structural_rank = 0;
  std::size_t samples = 0;
  /// Sampled theta values at which sum theta_j A_j lost rank.
  std::vector<std::vector<Rational>> failing_theta;
  /// Samples where structure_of(sum theta_j A_j) was a strict subset of union_A.
  std::size_t cancellations = 0;

  bool structural_ok() const noexcept { return structural_rank == rows; }
  bool numeric_ok() const noexcept { return failing_theta.empty(); }
};

/// Structural rank of union_A (exact) and numeric rank at `samples` random
/// positive rational theta (exact arithmetic, seeded).
RankReport structural_rank_check(const AugmentedSystem& aug, std::size_t samples = 10,
                                 std::uint64_t seed = 0x5eed);

/// "%%MatrixMarket matrix coordinate pattern general", 1-based entries.
std::string to_matrix_market(const StructuralMatrix& s);
StructuralMatrix read_matrix_market(std::string_view text);

}  // namespace mominv
