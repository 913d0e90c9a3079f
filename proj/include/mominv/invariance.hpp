#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mominv/dm.hpp"
#include "mominv/network.hpp"
#include "mominv/structural.hpp"

namespace mominv {

/// Dependency graph over the 2*eta diagonal blocks of Psi. Nodes are numbered
/// 1..2*eta like the Psi blocks; edge (q, p) means block p's equations involve
/// block q's variables.
struct BlockDAG {
  std::size_t nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  ///< (q, p), sorted
  std::vector<std::size_t> sources;                        ///< sorted
  std::vector<bool> derivative;                            ///< index 1..nodes
  std::vector<std::vector<VarLabel>> labels;               ///< index 1..nodes
};

BlockDAG build_block_dag(const PsiSystem& psi);

/// Nodes not reachable from any source, ascending.
std::vector<std::size_t> unreachable_blocks(const BlockDAG& dag);

struct Diagnostics {
  std::size_t equations_built = 0;
  std::size_t moments_built = 0;
  std::size_t M = 0;
  std::size_t N = 0;
  std::size_t N_d = 0;
  std::size_t eta = 0;
  std::vector<RowLabel> removed_rows;
  std::vector<MultiIndex> removed_columns;
  RankReport rank;
};

struct InvarianceReport {
  std::size_t k = 0;
  std::string parameter;
  int order = 0;
  /// Moments whose derivative in theta_k is structurally zero.
  std::vector<MultiIndex> invariant_moments;
  /// Moments whose stationary value is structurally zero.
  std::vector<MultiIndex> structurally_zero_moments;
  /// Moments in the underdetermined part; no verdict.
  std::vector<MultiIndex> undetermined_moments;
  BlockDAG dag;
  std::vector<std::size_t> unreachable;
  DMResult dm;
  PsiSystem psi;
  Diagnostics diagnostics;
  std::vector<std::string> warnings;
};

/// Full pipeline. Errors carry the name of the failing stage in Error::stage().
InvarianceReport analyze(const ReactionNetwork& net, std::size_t k, int order);

struct MonteCarloReport {
  std::size_t trials = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t aborted = 0;
  std::size_t resamples = 0;
  std::size_t flagged_variables = 0;
  std::vector<std::string> failures;

  bool ok() const noexcept { return failed == 0 && aborted == 0; }
};

/// Draws random nonzero rationals for every structural nonzero of the
/// welldetermined part of Psi and its right-hand side (both copies of A_d
/// share values; the A_k and b_k couplings keep their own pattern), solves
/// by block back-substitution and checks that every variable of an
/// unreachable block is exactly zero. Trial t is seeded with seed + t.
MonteCarloReport monte_carlo_check(const PsiSystem& psi, std::size_t trials, std::uint64_t seed);

/// Same check against an explicit list of flagged blocks (1-based).
MonteCarloReport monte_carlo_check(const PsiSystem& psi, std::span<const std::size_t> flagged_blocks,
                                   std::size_t trials, std::uint64_t seed);

}  // namespace mominv
