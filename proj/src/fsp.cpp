#include "mominv/fsp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

#include <Eigen/SparseLU>

#include "mominv/errors.hpp"
#include "mominv/graph.hpp"

namespace mominv::fsp {

namespace {

double propensity_value(const Reaction& r, std::span<const int> x) {
  if (std::holds_alternative<propensity::Zeroth>(r.kind)) return 1.0;
  if (const auto* k = std::get_if<propensity::Mono>(&r.kind)) return x[k->species];
  if (const auto* k = std::get_if<propensity::BiHetero>(&r.kind)) {
    return static_cast<double>(x[k->species_a]) * static_cast<double>(x[k->species_b]);
  }
  const double v = x[std::get<propensity::BiHomo>(r.kind).species];
  return v * (v - 1.0) / 2.0;
}

void check_theta(const ReactionNetwork& net, std::span<const double> theta) {
  if (theta.size() != net.parameter_count()) throw OracleError("theta has wrong length");
  for (double t : theta) {
    if (!(t > 0.0) || !std::isfinite(t)) throw OracleError("theta entries must be positive and finite");
  }
}

void enumerate_region(const StateBox& box, const std::vector<int>& lo, const std::vector<int>& hi,
                      std::vector<std::size_t>& out) {
  std::vector<int> x = lo;
  const std::size_t n = lo.size();
  while (true) {
    out.push_back(box.index(x));
    std::size_t d = n;
    while (d-- > 0) {
      if (++x[d] <= hi[d]) break;
      x[d] = lo[d];
    }
    if (d == static_cast<std::size_t>(-1)) return;
  }
}

// Nested dissection of the lattice. A slab as thick as the largest jump along
// an axis separates the two sides, so the halves are ordered first and the
// slab last.
void dissect(const StateBox& box, std::vector<int> lo, std::vector<int> hi, const std::vector<int>& reach,
             std::vector<std::size_t>& out) {
  constexpr std::size_t leaf_volume = 64;
  std::size_t volume = 1;
  std::size_t axis = lo.size();
  int widest = 0;
  for (std::size_t d = 0; d < lo.size(); ++d) {
    const int extent = hi[d] - lo[d] + 1;
    volume *= static_cast<std::size_t>(extent);
    if (extent >= reach[d] + 2 && extent - reach[d] > widest) {
      widest = extent - reach[d];
      axis = d;
    }
  }
  if (volume <= leaf_volume || axis == lo.size()) {
    enumerate_region(box, lo, hi, out);
    return;
  }
  const int mid = lo[axis] + widest / 2;
  std::vector<int> left_hi = hi;
  left_hi[axis] = mid - 1;
  std::vector<int> right_lo = lo;
  right_lo[axis] = mid + reach[axis];
  dissect(box, lo, left_hi, reach, out);
  dissect(box, right_lo, hi, reach, out);
  if (reach[axis] > 0) {
    std::vector<int> slab_lo = lo;
    std::vector<int> slab_hi = hi;
    slab_lo[axis] = mid;
    slab_hi[axis] = mid + reach[axis] - 1;
    enumerate_region(box, slab_lo, slab_hi, out);
  }
}

// Elimination order over the class members (local indices).
std::vector<Eigen::Index> elimination_order(const ReactionNetwork& net, const StateBox& box,
                                            const std::vector<Eigen::Index>& local) {
  const std::size_t n = box.bounds.size();
  std::vector<int> reach(n, 0);
  for (const auto& r : net.reactions) {
    for (std::size_t i = 0; i < n; ++i) reach[i] = std::max(reach[i], std::abs(r.stoich[i]));
  }
  std::vector<std::size_t> states;
  states.reserve(local.size());
  dissect(box, std::vector<int>(n, 0), box.bounds, reach, states);
  std::vector<Eigen::Index> order;
  for (std::size_t s : states) {
    if (local[s] >= 0) order.push_back(local[s]);
  }
  return order;
}

// Solves the class generator with row `pin` replaced by e_pin^T, eliminating
// in `order` with `pin` moved last.
Eigen::VectorXd solve_pinned(const Eigen::SparseMatrix<double>& q, const std::vector<std::size_t>& members,
                             const std::vector<Eigen::Index>& local, const std::vector<Eigen::Index>& order,
                             Eigen::Index pin) {
  const auto dim = static_cast<Eigen::Index>(members.size());
  std::vector<Eigen::Index> pos(members.size());
  Eigen::Index next = 0;
  for (Eigen::Index i : order) {
    if (i != pin) pos[static_cast<std::size_t>(i)] = next++;
  }
  pos[static_cast<std::size_t>(pin)] = next;

  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(members[i]);
    for (Eigen::SparseMatrix<double>::InnerIterator it(q, col); it; ++it) {
      const Eigen::Index row = local[static_cast<std::size_t>(it.row())];
      if (row >= 0 && row != pin) {
        triplets.emplace_back(pos[static_cast<std::size_t>(row)], pos[i], it.value());
      }
    }
  }
  triplets.emplace_back(dim - 1, dim - 1, 1.0);
  Eigen::SparseMatrix<double> a(dim, dim);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  rhs(dim - 1) = 1.0;

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::NaturalOrdering<int>> lu;
  lu.setPivotThreshold(0.1);
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw OracleError("stationary solve failed: singular truncated generator");
  Eigen::VectorXd y = lu.solve(rhs);
  // One step of iterative refinement.
  Eigen::VectorXd residual = rhs - a * y;
  y += lu.solve(residual);
  if (lu.info() != Eigen::Success || !y.allFinite()) throw OracleError("stationary solve failed");
  Eigen::VectorXd p(dim);
  for (std::size_t i = 0; i < members.size(); ++i) p(static_cast<Eigen::Index>(i)) = y(pos[i]);
  return p;
}

}  // namespace

std::size_t StateBox::state_count() const {
  if (bounds.empty()) throw OracleError("state box has no species");
  std::size_t count = 1;
  for (int b : bounds) {
    if (b < 1) throw OracleError("state box bounds must be at least 1");
    const auto width = static_cast<std::size_t>(b) + 1;
    if (count > cap / width) throw OracleError("state box exceeds the cap of " + std::to_string(cap) + " states");
    count *= width;
  }
  if (count > cap) throw OracleError("state box exceeds the cap of " + std::to_string(cap) + " states");
  return count;
}

std::size_t StateBox::index(std::span<const int> x) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < bounds.size(); ++i) idx = idx * (static_cast<std::size_t>(bounds[i]) + 1) + x[i];
  return idx;
}

void StateBox::decode(std::size_t index, std::span<int> x) const {
  for (std::size_t i = bounds.size(); i-- > 0;) {
    const auto width = static_cast<std::size_t>(bounds[i]) + 1;
    x[i] = static_cast<int>(index % width);
    index /= width;
  }
}

bool StateBox::contains(std::span<const int> x) const {
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (x[i] < 0 || x[i] > bounds[i]) return false;
  }
  return true;
}

Eigen::SparseMatrix<double> build_generator(const ReactionNetwork& net, const StateBox& box,
                                            std::span<const double> theta) {
  check_theta(net, theta);
  if (box.bounds.size() != net.species_count()) throw OracleError("state box dimension does not match the network");
  const std::size_t states = box.state_count();
  const std::size_t n = net.species_count();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(states * (net.reactions.size() + 1));
  std::vector<int> x(n);
  std::vector<int> y(n);
  for (std::size_t s = 0; s < states; ++s) {
    box.decode(s, x);
    double outflow = 0.0;
    for (const auto& r : net.reactions) {
      const double rate = theta[r.rate] * propensity_value(r, x);
      if (rate <= 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + r.stoich[i];
      if (!box.contains(y)) continue;
      const auto to = static_cast<Eigen::Index>(box.index(y));
      triplets.emplace_back(to, static_cast<Eigen::Index>(s), rate);
      outflow += rate;
    }
    triplets.emplace_back(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s), -outflow);
  }
  const auto dim = static_cast<Eigen::Index>(states);
  Eigen::SparseMatrix<double> q(dim, dim);
  q.setFromTriplets(triplets.begin(), triplets.end());
  q.makeCompressed();
  return q;
}

StationaryEstimate stationary_moments(const ReactionNetwork& net, const StateBox& box,
                                      std::span<const double> theta, std::span<const MultiIndex> indices) {
  const Eigen::SparseMatrix<double> q = build_generator(net, box, theta);
  const std::size_t states = static_cast<std::size_t>(q.cols());
  const std::size_t n = net.species_count();

  // Transition graph from -> to; its closed classes are the recurrent ones.
  Adjacency graph(states);
  for (Eigen::Index col = 0; col < q.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(q, col); it; ++it) {
      if (it.row() != col && it.value() > 0.0) graph[col].push_back(static_cast<std::size_t>(it.row()));
    }
  }
  const Components scc = strongly_connected_components(graph);
  std::vector<bool> closed(scc.members.size(), true);
  for (std::size_t v = 0; v < states; ++v) {
    for (std::size_t w : graph[v]) {
      if (scc.component[w] != scc.component[v]) closed[scc.component[v]] = false;
    }
  }
  std::size_t best = scc.members.size();
  std::size_t closed_count = 0;
  for (std::size_t c = 0; c < scc.members.size(); ++c) {
    if (!closed[c]) continue;
    ++closed_count;
    if (best == scc.members.size() || scc.members[c].size() > scc.members[best].size()) best = c;
  }

  StationaryEstimate est;
  est.theta.assign(theta.begin(), theta.end());
  est.states = states;
  if (closed_count > 1) {
    est.warnings.push_back("truncated chain has " + std::to_string(closed_count) +
                           " closed classes; using the largest");
  }

  std::vector<std::size_t> members = scc.members[best];
  std::sort(members.begin(), members.end());
  est.recurrent_states = members.size();
  std::vector<Eigen::Index> local(states, -1);
  for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = static_cast<Eigen::Index>(i);

  // Q p = 0 on the class with one equation replaced by sum(p) = 1. That system is
  // a rank-one update of the one with the row replaced by a unit pin e_r; by
  // Sherman-Morrison its solution is the pinned solution divided by its sum, so
  // only the sparse pinned matrix is factorized. The pin is moved to the most
  // likely state if the first choice carries too little mass.
  const auto dim = static_cast<Eigen::Index>(members.size());
  const std::vector<Eigen::Index> order = elimination_order(net, box, local);
  // A pin on a state of negligible mass can make the factorization break
  // down numerically, so a corner and a central separator state are tried next.
  Eigen::VectorXd p;
  Eigen::Index pin = -1;
  for (Eigen::Index candidate : {Eigen::Index{0}, dim - 1, order.back()}) {
    try {
      p = solve_pinned(q, members, local, order, candidate);
      pin = candidate;
      break;
    } catch (const OracleError&) {
      if (candidate == order.back()) throw;
    }
  }
  Eigen::Index heaviest = 0;
  p.maxCoeff(&heaviest);
  if (p(pin) < 1e-6 * p(heaviest)) {
    try {
      p = solve_pinned(q, members, local, order, heaviest);
    } catch (const OracleError&) {
      // Keep the earlier solution.
    }
  }
  p /= p.sum();

  bool clipped = false;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (p(i) < 0.0) {
      if (p(i) < -1e-12) clipped = true;
      p(i) = 0.0;
    }
  }
  if (clipped) est.warnings.push_back("negative stationary probabilities below -1e-12 were clipped");
  p /= p.sum();

  // Faces through which the truncation actually dropped transitions.
  std::vector<bool> upper(n, false);
  std::vector<bool> lower(n, false);
  std::vector<int> x(n);
  std::vector<int> y(n);
  for (std::size_t m : members) {
    box.decode(m, x);
    for (const auto& r : net.reactions) {
      if (propensity_value(r, x) <= 0.0) continue;
      for (std::size_t s = 0; s < n; ++s) {
        y[s] = x[s] + r.stoich[s];
        if (y[s] > box.bounds[s]) upper[s] = true;
        if (y[s] < 0) lower[s] = true;
      }
    }
  }

  for (const auto& alpha : indices) est.moments[alpha] = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const double pi = p(static_cast<Eigen::Index>(i));
    if (pi == 0.0) continue;
    box.decode(members[i], x);
    for (std::size_t s = 0; s < n; ++s) {
      if ((upper[s] && x[s] >= box.bounds[s] - 1) || (lower[s] && x[s] <= 1)) {
        est.leaked_mass += pi;
        break;
      }
    }
    for (const auto& alpha : indices) {
      double v = pi;
      for (std::size_t s = 0; s < n; ++s) {
        for (int e = 0; e < alpha[s]; ++e) v *= x[s];
      }
      est.moments[alpha] += v;
    }
  }
  est.leaked_mass = std::clamp(est.leaked_mass, 0.0, 1.0);
  if (est.truncation_suspect()) est.warnings.push_back("truncation suspect: leaked mass above 1%");
  return est;
}

SensitivityEstimate sensitivity_fd(const ReactionNetwork& net, const StateBox& box, std::span<const double> theta,
                                   std::size_t k, double h, std::span<const MultiIndex> indices) {
  check_theta(net, theta);
  if (k >= theta.size()) throw OracleError("perturbed parameter index out of range");
  if (!(h > 0.0) || !(h < 1.0)) throw OracleError("finite-difference step must lie in (0, 1)");

  std::vector<double> up(theta.begin(), theta.end());
  std::vector<double> down(theta.begin(), theta.end());
  up[k] = theta[k] * (1.0 + h);
  down[k] = theta[k] * (1.0 - h);

  SensitivityEstimate out;
  out.step = h;
  out.base = stationary_moments(net, box, theta, indices);
  const StationaryEstimate plus = stationary_moments(net, box, up, indices);
  const StationaryEstimate minus = stationary_moments(net, box, down, indices);
  out.leaked_mass = std::max({out.base.leaked_mass, plus.leaked_mass, minus.leaked_mass});
  const double denom = 2.0 * h * theta[k];
  for (const auto& alpha : indices) {
    out.derivative[alpha] = (plus.moments.at(alpha) - minus.moments.at(alpha)) / denom;
  }
  return out;
}

bool classifies_zero(double fd, double moment, double tol) {
  return std::abs(fd) <= tol * std::max(1.0, std::abs(moment));
}

}  // namespace mominv::fsp
