#include "support.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <set>

namespace mominv::testing {

std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(MOMINV_DATA_DIR) / name; }

ReactionNetwork antithetic() { return load_network_file(data_path("antithetic.json")); }
ReactionNetwork birth_death() { return load_network_file(data_path("birth_death.json")); }

ReactionNetwork make_network(std::size_t species, const std::vector<ReactionSpec>& reactions) {
  ReactionNetwork net;
  for (std::size_t i = 0; i < species; ++i) net.species.push_back({i, "X" + std::to_string(i + 1)});
  for (std::size_t j = 0; j < reactions.size(); ++j) {
    net.parameters.push_back("theta" + std::to_string(j + 1));
    net.reactions.push_back({reactions[j].name, reactions[j].stoich, reactions[j].kind, j});
  }
  validate(net);
  return net;
}

namespace {

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

ReactionNetwork random_network(std::mt19937_64& rng, const RandomNetworkSpec& spec) {
  const std::size_t n = uniform(rng, spec.min_species, spec.max_species);
  const std::size_t count = uniform(rng, spec.min_reactions, spec.max_reactions);
  std::vector<ReactionSpec> reactions;
  while (reactions.size() < count) {
    std::vector<int> reactant(n, 0);
    PropensityKind kind;
    const std::size_t max_kind = n >= 2 ? 3 : 2;
    switch (uniform(rng, 0, max_kind)) {
      case 0:
        kind = propensity::Zeroth{};
        break;
      case 1: {
        const std::size_t i = uniform(rng, 0, n - 1);
        kind = propensity::Mono{i};
        reactant[i] = 1;
        break;
      }
      case 2: {
        const std::size_t i = uniform(rng, 0, n - 1);
        kind = propensity::BiHomo{i};
        reactant[i] = 2;
        break;
      }
      default: {
        const std::size_t a = uniform(rng, 0, n - 1);
        std::size_t b = uniform(rng, 0, n - 2);
        if (b >= a) ++b;
        kind = propensity::BiHetero{std::min(a, b), std::max(a, b)};
        reactant[a] = 1;
        reactant[b] = 1;
        break;
      }
    }
    std::vector<int> stoich(n, 0);
    const std::size_t products = uniform(rng, 0, 2);
    for (std::size_t p = 0; p < products; ++p) ++stoich[uniform(rng, 0, n - 1)];
    for (std::size_t i = 0; i < n; ++i) stoich[i] -= reactant[i];
    if (std::all_of(stoich.begin(), stoich.end(), [](int v) { return v == 0; })) continue;
    reactions.push_back({"R" + std::to_string(reactions.size() + 1), stoich, kind});
  }
  return make_network(n, reactions);
}

FeedbackNetwork feedback_network(std::mt19937_64& rng) {
  enum { Z1, A_off, A_on, B_off, B_on, Z2 };
  auto rate = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  auto vec = [](std::initializer_list<std::pair<int, int>> entries) {
    std::vector<int> s(6, 0);
    for (auto [i, v] : entries) s[static_cast<std::size_t>(i)] = v;
    return s;
  };

  std::vector<ReactionSpec> r;
  std::vector<double> theta;
  auto add = [&](std::string name, std::vector<int> s, PropensityKind kind, double value) {
    r.push_back({std::move(name), std::move(s), kind});
    theta.push_back(value);
  };

  const double mu = rate(0.5, 1.5);
  add("reference", vec({{Z1, 1}}), propensity::Zeroth{}, mu);
  add("actuate", vec({{A_off, -1}, {A_on, 1}}), propensity::BiHetero{Z1, A_off}, rate(0.5, 2.0));
  add("a_relax", vec({{A_on, -1}, {A_off, 1}}), propensity::Mono{A_on}, rate(0.5, 2.0));
  add("relay", vec({{B_off, -1}, {B_on, 1}}), propensity::BiHetero{A_on, B_off}, rate(1.0, 3.0));
  add("b_relax", vec({{B_on, -1}, {B_off, 1}}), propensity::Mono{B_on}, rate(0.5, 2.0));
  // Output capacity above the reference keeps the integrator from winding up.
  add("sense", vec({{Z2, 1}}), propensity::Mono{B_on}, rate(2.5 * mu, 4.0 * mu));
  add("annihilate", vec({{Z1, -1}, {Z2, -1}}), propensity::BiHetero{Z1, Z2}, rate(0.5, 2.0));
  if (coin(0.5)) add("a_leak", vec({{A_off, -1}, {A_on, 1}}), propensity::Mono{A_off}, rate(0.05, 0.3));
  if (coin(0.5)) add("b_leak", vec({{B_off, -1}, {B_on, 1}}), propensity::Mono{B_off}, rate(0.05, 0.3));
  if (coin(0.4)) add("repress", vec({{B_on, -1}, {B_off, 1}}), propensity::BiHetero{B_on, Z2}, rate(0.1, 0.5));
  if (coin(0.3)) add("a_sense", vec({{Z2, 1}}), propensity::Mono{A_on}, rate(0.2, 1.0));
  if (coin(0.3)) add("z2_decay", vec({{Z2, -1}}), propensity::Mono{Z2}, rate(0.05, 0.3));
  if (coin(0.2)) add("z1_decay", vec({{Z1, -1}}), propensity::Mono{Z1}, rate(0.05, 0.3));

  FeedbackNetwork out{make_network(6, r), theta};
  const char* names[] = {"Z1", "A_off", "A_on", "B_off", "B_on", "Z2"};
  for (std::size_t i = 0; i < 6; ++i) out.net.species[i].name = names[i];
  validate(out.net);
  return out;
}

StructuralMatrix random_pattern(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double density) {
  std::bernoulli_distribution bit(density);
  std::vector<StructuralMatrix::Position> nz;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (bit(rng)) nz.emplace_back(r, c);
    }
  }
  return StructuralMatrix(rows, cols, nz);
}

std::size_t oracle_rank(std::vector<std::vector<Rational>> m) {
  std::size_t rank = 0;
  const std::size_t rows = m.size();
  const std::size_t cols = rows == 0 ? 0 : m[0].size();
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && m[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[rank], m[pivot]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || m[r][c] == 0) continue;
      const Rational f = m[r][c] / m[rank][c];
      for (std::size_t j = c; j < cols; ++j) m[r][j] -= f * m[rank][j];
    }
    ++rank;
  }
  return rank;
}

namespace {

Rational ipow(const Rational& base, int e) {
  Rational out = 1;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

Rational evaluate_term(const Reaction& r, const std::vector<long>& x, const MultiIndex& alpha) {
  Rational w;
  if (std::holds_alternative<propensity::Zeroth>(r.kind)) {
    w = 1;
  } else if (const auto* k = std::get_if<propensity::Mono>(&r.kind)) {
    w = x[k->species];
  } else if (const auto* k = std::get_if<propensity::BiHetero>(&r.kind)) {
    w = Rational(x[k->species_a]) * x[k->species_b];
  } else {
    const long v = x[std::get<propensity::BiHomo>(r.kind).species];
    w = Rational(v * (v - 1), 2);
  }
  Rational shifted = 1;
  Rational plain = 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    shifted *= ipow(Rational(x[i] + r.stoich[i]), alpha[i]);
    plain *= ipow(Rational(x[i]), alpha[i]);
  }
  return w * (shifted - plain);
}

// Inverse of the Vandermonde matrix V(p, e) = p^e on points 0..D.
std::vector<std::vector<Rational>> inverse_vandermonde(int degree) {
  const std::size_t size = static_cast<std::size_t>(degree) + 1;
  std::vector<std::vector<Rational>> a(size, std::vector<Rational>(2 * size));
  for (std::size_t p = 0; p < size; ++p) {
    for (std::size_t e = 0; e < size; ++e) a[p][e] = ipow(Rational(static_cast<long>(p)), static_cast<int>(e));
    a[p][size + p] = 1;
  }
  for (std::size_t c = 0; c < size; ++c) {
    std::size_t pivot = c;
    while (a[pivot][c] == 0) ++pivot;
    std::swap(a[c], a[pivot]);
    const Rational inv = 1 / a[c][c];
    for (auto& v : a[c]) v *= inv;
    for (std::size_t r = 0; r < size; ++r) {
      if (r == c || a[r][c] == 0) continue;
      const Rational f = a[r][c];
      for (std::size_t j = 0; j < 2 * size; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<std::vector<Rational>> inv(size, std::vector<Rational>(size));
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) inv[r][c] = a[r][size + c];
  }
  return inv;
}

}  // namespace

std::map<MultiIndex, Rational> oracle_expansion(const Reaction& r, std::size_t n, const MultiIndex& alpha) {
  const int degree = alpha.order() + 2;
  const std::size_t side = static_cast<std::size_t>(degree) + 1;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= side;

  std::vector<Rational> grid(total);
  std::vector<long> x(n);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = n; i-- > 0;) {
      x[i] = static_cast<long>(rest % side);
      rest /= side;
    }
    grid[idx] = evaluate_term(r, x, alpha);
  }

  // Values to coefficients one axis at a time.
  const auto inv = inverse_vandermonde(degree);
  std::size_t stride = 1;
  for (std::size_t axis = n; axis-- > 0;) {
    std::vector<Rational> line(side);
    for (std::size_t base = 0; base < total; ++base) {
      if ((base / stride) % side != 0) continue;
      for (std::size_t p = 0; p < side; ++p) line[p] = grid[base + p * stride];
      for (std::size_t e = 0; e < side; ++e) {
        Rational acc = 0;
        for (std::size_t p = 0; p < side; ++p) acc += inv[e][p] * line[p];
        grid[base + e * stride] = acc;
      }
    }
    stride *= side;
  }

  std::map<MultiIndex, Rational> out;
  for (std::size_t idx = 0; idx < total; ++idx) {
    if (grid[idx] == 0) continue;
    std::vector<int> e(n);
    std::size_t rest = idx;
    for (std::size_t i = n; i-- > 0;) {
      e[i] = static_cast<int>(rest % side);
      rest /= side;
    }
    out.emplace(MultiIndex(e), grid[idx]);
  }
  return out;
}

std::size_t oracle_structural_rank(const StructuralMatrix& s) {
  const auto rows = s.row_lists();
  std::vector<bool> used(s.cols(), false);
  std::size_t best = 0;
  auto search = [&](auto&& self, std::size_t r, std::size_t matched) -> void {
    if (matched + (rows.size() - r) <= best) return;
    if (r == rows.size()) {
      best = std::max(best, matched);
      return;
    }
    for (std::size_t c : rows[r]) {
      if (used[c]) continue;
      used[c] = true;
      self(self, r + 1, matched + 1);
      used[c] = false;
    }
    self(self, r + 1, matched);
  };
  search(search, 0, 0);
  return best;
}

std::size_t oracle_max_eta(const StructuralMatrix& s) {
  const std::size_t m = s.rows();
  const std::size_t n = s.cols();
  std::vector<std::size_t> rp(m);
  std::vector<std::size_t> cp(n);
  std::iota(rp.begin(), rp.end(), 0);
  std::size_t best = 0;
  do {
    std::iota(cp.begin(), cp.end(), 0);
    do {
      auto at = [&](std::size_t i, std::size_t j) { return s.contains(rp[i], cp[j]); };
      for (std::size_t nd = 1; nd <= std::min(m, n); ++nd) {
        const std::size_t mu = m - nd;
        const std::size_t nu = n - nd;
        bool ok = true;
        for (std::size_t i = mu; i < m && ok; ++i) {
          for (std::size_t j = 0; j < nu && ok; ++j) ok = !at(i, j);
        }
        if (!ok) continue;
        std::vector<StructuralMatrix::Position> upper;
        std::vector<StructuralMatrix::Position> lower;
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            if (!at(i, j)) continue;
            if (i < mu && j < nu) upper.emplace_back(i, j);
            if (i >= mu && j >= nu) lower.emplace_back(i - mu, j - nu);
          }
        }
        if (oracle_structural_rank(StructuralMatrix(mu, nu, upper)) != mu) continue;
        const StructuralMatrix d(nd, nd, lower);
        if (oracle_structural_rank(d) != nd) continue;
        // Boundary t splits A_d into blocks when rows >= t have nothing in cols < t.
        std::size_t eta = 1;
        for (std::size_t t = 1; t < nd; ++t) {
          bool zero = true;
          for (std::size_t i = t; i < nd && zero; ++i) {
            for (std::size_t j = 0; j < t && zero; ++j) zero = !d.contains(i, j);
          }
          if (zero) ++eta;
        }
        best = std::max(best, eta);
      }
    } while (std::next_permutation(cp.begin(), cp.end()));
  } while (std::next_permutation(rp.begin(), rp.end()));
  return best;
}

std::vector<std::size_t> oracle_reverse_greedy(const MomentSystem& sys) {
  std::vector<std::vector<Rational>> k(sys.rows());
  for (std::size_t r = 0; r < sys.rows(); ++r) {
    for (std::size_t j = 0; j < sys.slots(); ++j) {
      for (std::size_t c = 0; c < sys.cols(); ++c) k[r].push_back(sys.A[j].at(r, c));
      k[r].push_back(sys.b[j][r]);
    }
  }
  std::vector<std::size_t> kept(sys.rows());
  std::iota(kept.begin(), kept.end(), 0);
  auto rank_of = [&](const std::vector<std::size_t>& rows) {
    std::vector<std::vector<Rational>> m;
    for (std::size_t r : rows) m.push_back(k[r]);
    return oracle_rank(m);
  };
  bool removed = true;
  while (removed) {
    removed = false;
    const std::size_t full = rank_of(kept);
    if (full == kept.size()) break;
    for (std::size_t pos = kept.size(); pos-- > 0;) {
      std::vector<std::size_t> trial = kept;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(pos));
      if (rank_of(trial) == full) {
        kept = trial;
        removed = true;
        break;
      }
    }
  }
  return kept;
}

StructuralMatrix oracle_psi(const AugmentedSystem& aug, const DMResult& dm) {
  const std::size_t m = aug.M;
  const std::size_t n = aug.N;
  const std::size_t nd = dm.N_d;
  const std::size_t mu = m - nd;
  const std::size_t nu = n - nd;
  const StructuralMatrix a = permute(aug.union_A, dm.row_perm, dm.col_perm);
  const StructuralMatrix ak = permute(aug.A_k_struct, dm.row_perm, dm.col_perm);

  // Row blocks: [u', u, d', d]; column blocks likewise.
  auto row_base = [&](int block) { return std::array<std::size_t, 4>{0, mu, 2 * mu, 2 * mu + nd}[block]; };
  auto col_base = [&](int block) { return std::array<std::size_t, 4>{0, nu, 2 * nu, 2 * nu + nd}[block]; };
  std::vector<StructuralMatrix::Position> nz;
  auto place = [&](const StructuralMatrix& src, bool src_upper_rows, bool src_left_cols, int rb, int cb) {
    for (auto [r, c] : src.nonzeros()) {
      const bool upper_row = r < mu;
      const bool left_col = c < nu;
      if (upper_row != src_upper_rows || left_col != src_left_cols) continue;
      const std::size_t lr = upper_row ? r : r - mu;
      const std::size_t lc = left_col ? c : c - nu;
      nz.emplace_back(row_base(rb) + lr, col_base(cb) + lc);
    }
  };
  // Derivative rows: [A_u, A_u^k, A_ud, A_ud^k] and [0, 0, A_d, A_d^k].
  place(a, true, true, 0, 0);
  place(ak, true, true, 0, 1);
  place(a, true, false, 0, 2);
  place(ak, true, false, 0, 3);
  place(a, false, false, 2, 2);
  place(ak, false, false, 2, 3);
  // Moment rows: [0, A_u, 0, A_ud] and [0, 0, 0, A_d].
  place(a, true, true, 1, 1);
  place(a, true, false, 1, 3);
  place(a, false, false, 3, 3);
  return StructuralMatrix(2 * m, 2 * n, nz);
}

}  // namespace mominv::testing

namespace mominv::testing {

std::string dm_shape_violation(const StructuralMatrix& s, const DMResult& dm) {
  auto is_perm = [](std::vector<std::size_t> p, std::size_t n) {
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] != i) return false;
    }
    return p.size() == n;
  };
  if (!is_perm(dm.row_perm, s.rows()) || !is_perm(dm.col_perm, s.cols())) return "not a permutation";
  if (dm.N_d > std::min(s.rows(), s.cols())) return "N_d too large";
  const StructuralMatrix p = permute(s, dm.row_perm, dm.col_perm);
  const std::size_t mu = dm.underdetermined_rows();
  const std::size_t nu = dm.underdetermined_cols();
  std::vector<StructuralMatrix::Position> upper;
  for (auto [i, j] : p.nonzeros()) {
    if (i >= mu && j < nu) return "nonzero below the underdetermined part";
    if (i < mu && j < nu) upper.emplace_back(i, j);
  }
  if (oracle_structural_rank(StructuralMatrix(mu, nu, upper)) != mu) return "A_u lacks full row rank";
  std::size_t next = 0;
  for (const BlockRange& b : dm.blocks) {
    if (b.begin != next || b.end <= b.begin) return "blocks do not tile A_d";
    next = b.end;
  }
  if (next != dm.N_d) return "blocks do not tile A_d";
  for (std::size_t bi = 0; bi < dm.eta(); ++bi) {
    const BlockRange r = dm.row_range(bi);
    const BlockRange c = dm.col_range(bi);
    std::vector<StructuralMatrix::Position> inner;
    for (auto [i, j] : p.nonzeros()) {
      if (r.contains(i) && c.contains(j)) inner.emplace_back(i - r.begin, j - c.begin);
      if (r.contains(i) && j >= nu && j < c.begin) return "A_d not block upper triangular";
    }
    if (oracle_structural_rank(StructuralMatrix(r.size(), c.size(), inner)) != r.size()) {
      return "singular diagonal block";
    }
  }
  return {};
}

std::string reference_psi_violation(const PsiSystem& psi) {
  using Labels = std::set<std::string>;
  struct Block {
    Labels cols;
    std::multiset<Labels> rows;
  };
  // Reference pattern: underdetermined part, then the derivative copy blocks
  // E[x2], E[x1*x3], then the moment copy blocks.
  const std::vector<Block> expected{
      {{"E[x2^2]'", "E[x1]'", "E[x2^2]", "E[x1]"},
       {{"E[x2^2]'", "E[x1]'", "E[x2]'"}, {"E[x2^2]", "E[x1]", "E[x2]"}}},
      {{"E[x2]'"}, {{"E[x2]'", "E[x1*x3]'", "E[x2]"}}},
      {{"E[x1*x3]'"}, {{"E[x1*x3]'"}}},
      {{"E[x2]"}, {{"E[x2]", "E[x1*x3]"}}},
      {{"E[x1*x3]"}, {{"E[x1*x3]"}}},
  };
  if (psi.psi.rows() != 6 || psi.psi.cols() != 8) return "Psi is not 6x8";
  if (psi.blocks.size() != expected.size()) return "wrong number of blocks";
  const auto rows = psi.psi.row_lists();
  for (std::size_t b = 0; b < expected.size(); ++b) {
    const PsiBlock& pb = psi.blocks[b];
    Labels cols;
    for (std::size_t j = pb.cols.begin; j < pb.cols.end; ++j) cols.insert(psi.var_labels[j].to_string());
    if (cols != expected[b].cols) return "block " + std::to_string(b) + " has the wrong variables";
    std::multiset<Labels> got;
    for (std::size_t i = pb.rows.begin; i < pb.rows.end; ++i) {
      Labels row;
      for (std::size_t j : rows[i]) row.insert(psi.var_labels[j].to_string());
      got.insert(row);
    }
    if (got != expected[b].rows) return "block " + std::to_string(b) + " rows differ from the reference";
  }
  if (psi.rhs.nonzeros != std::vector<std::size_t>{5}) return "right-hand side pattern differs";
  return {};
}

}  // namespace mominv::testing
