#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "mominv/network.hpp"
#include "mominv/polynomial.hpp"

namespace mominv::fsp {

/// Truncated state space {0..bounds[0]} x ... x {0..bounds[n-1]}, enumerated
/// row-major (last species fastest).
struct StateBox {
  std::vector<int> bounds;
  std::size_t cap = 2'000'000;

  /// Throws OracleError when a bound is < 1 or the count exceeds `cap`.
  std::size_t state_count() const;
  std::size_t index(std::span<const int> x) const;
  void decode(std::size_t index, std::span<int> x) const;
  bool contains(std::span<const int> x) const;
};

/// Rate matrix Q with Q(to, from) = total rate of from -> to and
/// Q(from, from) = -(total outflow kept in the box). Transitions that would
/// leave the box are dropped together with their outflow, so columns sum to zero.
Eigen::SparseMatrix<double> build_generator(const ReactionNetwork& net, const StateBox& box,
                                            std::span<const double> theta);

struct StationaryEstimate {
  std::map<MultiIndex, double> moments;
  /// Probability on states within one step of a box face across which the
  /// truncation dropped transitions.
  double leaked_mass = 0.0;
  std::vector<double> theta;
  std::size_t states = 0;
  std::size_t recurrent_states = 0;
  std::vector<std::string> warnings;

  bool truncation_suspect() const noexcept { return leaked_mass > 0.01; }
};

/// Stationary distribution on the largest closed communicating class of the
/// truncated chain, and the requested raw moments under it.
StationaryEstimate stationary_moments(const ReactionNetwork& net, const StateBox& box,
                                      std::span<const double> theta, std::span<const MultiIndex> indices);

struct SensitivityEstimate {
  std::map<MultiIndex, double> derivative;
  StationaryEstimate base;
  double step = 0.0;
  /// Largest leaked mass across the three solves.
  double leaked_mass = 0.0;
};

inline constexpr double default_fd_step = 1e-3;
inline constexpr double zero_tolerance = 1e-6;

/// Central difference in theta_k with relative step h: (mu(theta_k (1+h)) -
/// mu(theta_k (1-h))) / (2 h theta_k).
SensitivityEstimate sensitivity_fd(const ReactionNetwork& net, const StateBox& box, std::span<const double> theta,
                                   std::size_t k, double h, std::span<const MultiIndex> indices);

/// |fd| <= tol * max(1, |moment|).
bool classifies_zero(double fd, double moment, double tol = zero_tolerance);

}  // namespace mominv::fsp
