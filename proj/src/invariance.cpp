#include "mominv/invariance.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <tuple>

#include "mominv/errors.hpp"
#include "mominv/moments.hpp"

namespace mominv {

BlockDAG build_block_dag(const PsiSystem& psi) {
  BlockDAG dag;
  dag.nodes = psi.node_count();
  dag.derivative.assign(dag.nodes + 1, false);
  dag.labels.assign(dag.nodes + 1, {});

  // Block id per Psi row/column; 0 for the underdetermined part.
  std::vector<std::size_t> row_block(psi.psi.rows(), 0);
  std::vector<std::size_t> col_block(psi.psi.cols(), 0);
  for (std::size_t i = 1; i < psi.blocks.size(); ++i) {
    for (std::size_t r = psi.blocks[i].rows.begin; r < psi.blocks[i].rows.end; ++r) row_block[r] = i;
    for (std::size_t c = psi.blocks[i].cols.begin; c < psi.blocks[i].cols.end; ++c) {
      col_block[c] = i;
      dag.labels[i].push_back(psi.var_labels[c]);
    }
    dag.derivative[i] = psi.deriv_block_flags[i];
  }

  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& [r, c] : psi.psi.nonzeros()) {
    const std::size_t p = row_block[r];
    const std::size_t q = col_block[c];
    if (p != 0 && q != 0 && p != q) edges.emplace(q, p);
  }
  dag.edges.assign(edges.begin(), edges.end());

  std::set<std::size_t> sources;
  for (std::size_t r : psi.rhs.nonzeros) {
    if (row_block[r] != 0) sources.insert(row_block[r]);
  }
  dag.sources.assign(sources.begin(), sources.end());
  return dag;
}

std::vector<std::size_t> unreachable_blocks(const BlockDAG& dag) {
  std::vector<std::vector<std::size_t>> out(dag.nodes + 1);
  for (const auto& [q, p] : dag.edges) out[q].push_back(p);
  std::vector<bool> reached(dag.nodes + 1, false);
  std::vector<std::size_t> stack(dag.sources.begin(), dag.sources.end());
  for (std::size_t s : stack) reached[s] = true;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w : out[v]) {
      if (!reached[w]) {
        reached[w] = true;
        stack.push_back(w);
      }
    }
  }
  std::vector<std::size_t> result;
  for (std::size_t v = 1; v <= dag.nodes; ++v) {
    if (!reached[v]) result.push_back(v);
  }
  return result;
}

namespace {

template <class F>
auto run_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage(stage);
    throw;
  }
}

std::vector<MultiIndex> sorted_unique(std::vector<MultiIndex> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

InvarianceReport analyze(const ReactionNetwork& net, std::size_t k, int order) {
  InvarianceReport report;
  report.order = order;
  report.k = k;
  if (k >= net.parameter_count()) {
    ValidationError e("perturbed parameter index " + std::to_string(k) + " out of range");
    e.set_stage("analyze");
    throw e;
  }
  report.parameter = net.parameters[k];

  MomentSystem sys = run_stage("build_moment_system", [&] { return build_moment_system(net, order); });
  report.diagnostics.equations_built = sys.rows();
  report.diagnostics.moments_built = sys.cols();
  sys = run_stage("eliminate_redundancy", [&] { return eliminate_redundancy(std::move(sys)); });
  sys = run_stage("drop_unused_columns", [&] { return drop_unused_columns(std::move(sys)); });
  report.diagnostics.removed_rows = sys.removed_rows;
  report.diagnostics.removed_columns = sys.removed_columns;
  for (const auto& r : sys.removed_rows) report.warnings.push_back("removed redundant equation " + r.to_string());
  for (const auto& c : sys.removed_columns) report.warnings.push_back("removed unused moment " + moment_string(c));

  AugmentedSystem aug = run_stage("build_augmented", [&] { return build_augmented(sys, k); });
  report.diagnostics.M = aug.M;
  report.diagnostics.N = aug.N;

  report.diagnostics.rank = run_stage("structural_rank_check", [&] {
    RankReport rank = structural_rank_check(aug);
    if (!rank.structural_ok()) {
      throw AssumptionError("moment equations are structurally rank deficient: structural rank " +
                            std::to_string(rank.structural_rank) + " < " + std::to_string(rank.rows) + " equations");
    }
    return rank;
  });
  if (!report.diagnostics.rank.numeric_ok()) {
    report.warnings.push_back("numeric rank of the moment matrix fell below " + std::to_string(aug.M) + " at " +
                              std::to_string(report.diagnostics.rank.failing_theta.size()) + " of " +
                              std::to_string(report.diagnostics.rank.samples) + " sampled parameter values");
  }
  if (report.diagnostics.rank.cancellations > 0) {
    report.warnings.push_back("accidental cancellation in the moment matrix at " +
                              std::to_string(report.diagnostics.rank.cancellations) + " sampled parameter values");
  }

  report.dm = run_stage("dm_decompose", [&] { return dm_decompose(aug.union_A); });
  report.diagnostics.N_d = report.dm.N_d;
  report.diagnostics.eta = report.dm.eta();
  report.psi = run_stage("assemble_psi", [&] { return assemble_psi(aug, report.dm); });
  report.dag = run_stage("build_block_dag", [&] { return build_block_dag(report.psi); });
  report.unreachable = run_stage("unreachable_blocks", [&] { return unreachable_blocks(report.dag); });

  std::vector<MultiIndex> zero;
  std::vector<MultiIndex> invariant;
  for (std::size_t v : report.unreachable) {
    for (const auto& label : report.dag.labels[v]) {
      (report.dag.derivative[v] ? invariant : zero).push_back(label.moment);
    }
  }
  report.structurally_zero_moments = sorted_unique(std::move(zero));
  std::erase_if(invariant, [&](const MultiIndex& m) {
    return std::binary_search(report.structurally_zero_moments.begin(), report.structurally_zero_moments.end(), m);
  });
  report.invariant_moments = sorted_unique(std::move(invariant));

  std::vector<MultiIndex> undetermined;
  for (std::size_t c = report.psi.blocks[0].cols.begin; c < report.psi.blocks[0].cols.end; ++c) {
    undetermined.push_back(report.psi.var_labels[c].moment);
  }
  report.undetermined_moments = sorted_unique(std::move(undetermined));
  return report;
}

namespace {

Rational random_nonzero(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> num(1, 1000);
  std::uniform_int_distribution<long> den(1, 1000);
  std::bernoulli_distribution negative(0.5);
  Rational q(num(rng), den(rng));
  q.canonicalize();
  return negative(rng) ? Rational(-q) : q;
}

enum class Source { Union, Perturbed, RhsPerturbed, RhsUnion };

struct Instantiation {
  std::map<std::pair<std::size_t, std::size_t>, Rational> matrix;  // determined part of Psi
  std::vector<Rational> rhs;                                       // full Psi rhs length
};

// Values are keyed by their origin in the unpermuted system so both copies
// of A_d receive identical entries.
Instantiation instantiate(const PsiSystem& psi, std::mt19937_64& rng) {
  const std::size_t row0 = psi.determined_row_offset();
  const std::size_t col0 = psi.determined_col_offset();
  std::map<std::tuple<Source, std::size_t, std::size_t>, Rational> drawn;
  auto value = [&](Source s, std::size_t r, std::size_t c) -> const Rational& {
    auto [it, inserted] = drawn.try_emplace({s, r, c});
    if (inserted) it->second = random_nonzero(rng);
    return it->second;
  };

  Instantiation inst;
  for (const auto& [i, j] : psi.psi.nonzeros()) {
    if (i < row0 || j < col0) continue;
    const std::size_t R = psi.row_origin[i];
    const std::size_t C = psi.col_origin[j];
    if (R < psi.M && C < psi.N) {
      inst.matrix.emplace(std::pair{i, j}, value(Source::Union, R, C));
    } else if (R >= psi.M && C >= psi.N) {
      inst.matrix.emplace(std::pair{i, j}, value(Source::Union, R - psi.M, C - psi.N));
    } else {
      inst.matrix.emplace(std::pair{i, j}, value(Source::Perturbed, R, C - psi.N));
    }
  }
  inst.rhs.assign(psi.psi.rows(), Rational(0));
  for (std::size_t i : psi.rhs.nonzeros) {
    if (i < row0) continue;
    const std::size_t R = psi.row_origin[i];
    inst.rhs[i] = R < psi.M ? value(Source::RhsPerturbed, R, 0) : value(Source::RhsUnion, R - psi.M, 0);
  }
  return inst;
}

// Block back-substitution; nullopt when a diagonal block is singular.
std::optional<std::vector<Rational>> back_substitute(const PsiSystem& psi, const Instantiation& inst) {
  std::vector<Rational> x(psi.psi.cols(), Rational(0));
  std::vector<std::vector<std::pair<std::size_t, Rational>>> rows(psi.psi.rows());
  for (const auto& [pos, v] : inst.matrix) rows[pos.first].emplace_back(pos.second, v);

  for (std::size_t i = psi.blocks.size() - 1; i >= 1; --i) {
    const PsiBlock& blk = psi.blocks[i];
    const std::size_t n = blk.rows.size();
    DenseMatrix a(n, n);
    std::vector<Rational> b(n);
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t row = blk.rows.begin + r;
      b[r] = inst.rhs[row];
      for (const auto& [col, v] : rows[row]) {
        if (blk.cols.contains(col)) {
          a(r, col - blk.cols.begin) = v;
        } else {
          b[r] -= v * x[col];
        }
      }
    }
    auto solution = solve(std::move(a), std::move(b));
    if (!solution) return std::nullopt;
    for (std::size_t c = 0; c < n; ++c) x[blk.cols.begin + c] = (*solution)[c];
  }
  return x;
}

}  // namespace

MonteCarloReport monte_carlo_check(const PsiSystem& psi, std::span<const std::size_t> flagged_blocks,
                                   std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("monte_carlo_check: trials must be at least 1");
  constexpr std::size_t max_resamples = 100;
  MonteCarloReport report;
  report.trials = trials;
  for (std::size_t b : flagged_blocks) {
    if (b == 0 || b >= psi.blocks.size()) throw std::invalid_argument("monte_carlo_check: flagged block out of range");
    report.flagged_variables += psi.blocks[b].cols.size();
  }

  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed + t);
    std::optional<std::vector<Rational>> x;
    std::size_t attempts = 0;
    while (!x && attempts <= max_resamples) {
      if (attempts > 0) ++report.resamples;
      x = back_substitute(psi, instantiate(psi, rng));
      ++attempts;
    }
    if (!x) {
      ++report.aborted;
      report.failures.push_back("trial " + std::to_string(t) + ": diagonal block stayed singular after " +
                                std::to_string(max_resamples) + " resamples");
      continue;
    }
    bool ok = true;
    for (std::size_t b : flagged_blocks) {
      for (std::size_t c = psi.blocks[b].cols.begin; c < psi.blocks[b].cols.end; ++c) {
        if ((*x)[c] != 0) {
          ok = false;
          report.failures.push_back("trial " + std::to_string(t) + ": " + psi.var_labels[c].to_string() + " = " +
                                    (*x)[c].get_str());
        }
      }
    }
    ok ? ++report.passed : ++report.failed;
  }
  return report;
}

MonteCarloReport monte_carlo_check(const PsiSystem& psi, std::size_t trials, std::uint64_t seed) {
  const auto flagged = unreachable_blocks(build_block_dag(psi));
  return monte_carlo_check(psi, flagged, trials, seed);
}

}  // namespace mominv
