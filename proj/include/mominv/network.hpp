#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mominv/polynomial.hpp"
#include "mominv/rational.hpp"

namespace mominv {

struct Species {
  std::size_t id;
  std::string name;
};

namespace propensity {
struct Zeroth {};
struct Mono {
  std::size_t species;
};
/// x_a * x_b with a != b.
struct BiHetero {
  std::size_t species_a;
  std::size_t species_b;
};
/// x_i (x_i - 1) / 2.
struct BiHomo {
  std::size_t species;
};
}  // namespace propensity

using PropensityKind = std::variant<propensity::Zeroth, propensity::Mono,
                                    propensity::BiHetero, propensity::BiHomo>;

struct Reaction {
  std::string name;
  std::vector<int> stoich;
  PropensityKind kind;
  std::size_t rate;  ///< index into ReactionNetwork::parameters
};

/// E[c . x] = constant.
struct Conservation {
  std::vector<int> coefficients;
  Rational constant;
};

struct ReactionNetwork {
  std::vector<Species> species;
  std::vector<std::string> parameters;
  std::vector<Reaction> reactions;
  std::vector<Conservation> conservation;

  std::size_t species_count() const noexcept { return species.size(); }
  std::size_t parameter_count() const noexcept { return parameters.size(); }
  std::optional<std::size_t> species_index(std::string_view name) const;
  std::optional<std::size_t> parameter_index(std::string_view name) const;
};

/// Throws ValidationError naming the offending item when an invariant is broken.
void validate(const ReactionNetwork& net);

/// Parses and validates the JSON network format. Indices follow file order.
ReactionNetwork load_network(std::string_view text);
ReactionNetwork load_network_file(const std::filesystem::path& path);

/// Inverse of load_network; stable under a parse round trip.
std::string serialize_network(const ReactionNetwork& net);

/// w_j(x) / theta_j as an exact polynomial in x.
Polynomial propensity_polynomial(const Reaction& r);

std::string kind_name(const PropensityKind& kind);

}  // namespace mominv
