#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mominv/dm.hpp"
#include "mominv/moments.hpp"
#include "mominv/network.hpp"
#include "mominv/structural.hpp"

namespace mominv::testing {

std::filesystem::path data_path(const std::string& name);

ReactionNetwork antithetic();
ReactionNetwork birth_death();

/// Builds a network from a compact description; every reaction gets its own
/// parameter theta<j+1>.
struct ReactionSpec {
  std::string name;
  std::vector<int> stoich;
  PropensityKind kind;
};
ReactionNetwork make_network(std::size_t species, const std::vector<ReactionSpec>& reactions);

/// Random mass-action network: reactant complex from the propensity kind,
/// product complex of at most two molecules. One parameter per reaction.
struct RandomNetworkSpec {
  std::size_t min_species = 1;
  std::size_t max_species = 4;
  std::size_t min_reactions = 2;
  std::size_t max_reactions = 8;
};
ReactionNetwork random_network(std::mt19937_64& rng, const RandomNetworkSpec& spec);

/// Six-species integral-feedback network: a controller Z1 made at a constant
/// rate switches promoter A on, A activates promoter B, B produces the sensor
/// Z2, and Z1 + Z2 annihilate. Species Z1, A_off, A_on, B_off, B_on, Z2; the
/// promoter pairs are pathwise-conserved with total one. Optional leaks,
/// repression, extra sensing and decays vary the topology. Returns the
/// network and its rate values.
struct FeedbackNetwork {
  ReactionNetwork net;
  std::vector<double> theta;
};
FeedbackNetwork feedback_network(std::mt19937_64& rng);

StructuralMatrix random_pattern(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double density);

// ---------------------------------------------------------------------------
// Independent oracles. None of these call into the code under test beyond the
// plain data types.

/// Exact rank by fraction-free elimination on a dense copy.
std::size_t oracle_rank(std::vector<std::vector<Rational>> m);

/// Coefficients of w(x) * ((x + s)^alpha - x^alpha) recovered by exact
/// tensor-product interpolation from values on an integer grid.
std::map<MultiIndex, Rational> oracle_expansion(const Reaction& r, std::size_t n, const MultiIndex& alpha);

/// Maximum matching size by exhaustive search.
std::size_t oracle_structural_rank(const StructuralMatrix& s);

/// Largest number of diagonal blocks over every row permutation, column
/// permutation and split point satisfying the block shape of a DM form.
std::size_t oracle_max_eta(const StructuralMatrix& s);

/// Literal reverse-greedy redundancy removal on K = [A_1|b_1|...]: repeatedly
/// drop the highest-index row that lies in the span of the remaining rows
/// until none does. Returns kept row indices.
std::vector<std::size_t> oracle_reverse_greedy(const MomentSystem& sys);

/// Psi recomputed from the explicit block formula with permutation dm.
StructuralMatrix oracle_psi(const AugmentedSystem& aug, const DMResult& dm);

/// Empty when P A Q has the documented DM shape: zero lower-left block,
/// full structural row rank A_u, block upper triangular A_d with
/// structurally nonsingular diagonal blocks. Otherwise a description.
std::string dm_shape_violation(const StructuralMatrix& s, const DMResult& dm);

/// Empty when psi (the antithetic example, perturbing theta3) matches the reference 6x8
/// pattern up to permutations inside each diagonal block.
std::string reference_psi_violation(const PsiSystem& psi);

}  // namespace mominv::testing
