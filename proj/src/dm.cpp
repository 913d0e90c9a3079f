#include "mominv/dm.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

#include "mominv/errors.hpp"
#include "mominv/graph.hpp"

namespace mominv {

namespace {

// One augmenting-path search from `root`, depth-first without recursion.
bool augment_from(std::size_t root, const std::vector<std::vector<std::size_t>>& adj,
                  std::vector<std::size_t>& row_mate, std::vector<std::size_t>& col_mate,
                  std::vector<bool>& visited) {
  std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
  std::vector<std::size_t> path_cols;
  while (!stack.empty()) {
    auto& [r, pos] = stack.back();
    if (pos == adj[r].size()) {
      stack.pop_back();
      if (!stack.empty()) path_cols.pop_back();
      continue;
    }
    const std::size_t c = adj[r][pos++];
    if (visited[c]) continue;
    visited[c] = true;
    path_cols.push_back(c);
    if (col_mate[c] == unmatched) {
      for (std::size_t i = 0; i < stack.size(); ++i) {
        row_mate[stack[i].first] = path_cols[i];
        col_mate[path_cols[i]] = stack[i].first;
      }
      return true;
    }
    stack.emplace_back(col_mate[c], 0);
  }
  return false;
}

}  // namespace

Matching max_matching(const StructuralMatrix& s) {
  const auto adj = s.row_lists();
  Matching m;
  m.row_mate.assign(s.rows(), unmatched);
  m.col_mate.assign(s.cols(), unmatched);
  std::vector<bool> visited(s.cols());
  for (std::size_t r = 0; r < s.rows(); ++r) {
    std::fill(visited.begin(), visited.end(), false);
    augment_from(r, adj, m.row_mate, m.col_mate, visited);
  }
  for (std::size_t r = 0; r < s.rows(); ++r) {
    if (m.row_mate[r] == unmatched) {
      m.unmatched_rows.push_back(r);
    } else {
      m.pairs.emplace_back(r, m.row_mate[r]);
    }
  }
  for (std::size_t c = 0; c < s.cols(); ++c) {
    if (m.col_mate[c] == unmatched) m.unmatched_cols.push_back(c);
  }
  return m;
}

BlockRange DMResult::row_range(std::size_t i) const {
  const std::size_t off = underdetermined_rows();
  return {off + blocks.at(i).begin, off + blocks.at(i).end};
}

BlockRange DMResult::col_range(std::size_t i) const {
  const std::size_t off = underdetermined_cols();
  return {off + blocks.at(i).begin, off + blocks.at(i).end};
}

DMResult dm_decompose(const StructuralMatrix& s) {
  const Matching matching = max_matching(s);
  if (matching.pairs.size() != s.rows()) {
    throw AssumptionError("coefficient pattern has structural rank " + std::to_string(matching.pairs.size()) +
                          " < " + std::to_string(s.rows()) + " rows");
  }
  const auto cols_of_row = s.row_lists();
  const auto rows_of_col = s.col_lists();

  // Coarse step: alternating paths from unmatched columns (column -> any row
  // touching it -> that row's matched column) sweep out the underdetermined part.
  std::vector<bool> h_row(s.rows(), false);
  std::vector<bool> h_col(s.cols(), false);
  std::queue<std::size_t> frontier;
  for (std::size_t c : matching.unmatched_cols) {
    h_col[c] = true;
    frontier.push(c);
  }
  while (!frontier.empty()) {
    const std::size_t c = frontier.front();
    frontier.pop();
    for (std::size_t r : rows_of_col[c]) {
      if (h_row[r]) continue;
      h_row[r] = true;
      const std::size_t next = matching.row_mate[r];
      if (!h_col[next]) {
        h_col[next] = true;
        frontier.push(next);
      }
    }
  }

  // Fine step on the square part: one node per matched pair, edge q -> p when
  // row(p) touches col(q). Rows of p then depend on the variables of q, so q's
  // block must sit at or after p's block.
  std::vector<std::size_t> pair_rows;
  std::vector<std::size_t> pair_cols;
  std::vector<std::size_t> node_of_col(s.cols(), unmatched);
  for (std::size_t c = 0; c < s.cols(); ++c) {
    if (h_col[c]) continue;
    node_of_col[c] = pair_cols.size();
    pair_cols.push_back(c);
    pair_rows.push_back(matching.col_mate[c]);
  }
  const std::size_t nodes = pair_cols.size();
  Adjacency graph(nodes);
  for (std::size_t p = 0; p < nodes; ++p) {
    for (std::size_t c : cols_of_row[pair_rows[p]]) {
      const std::size_t q = node_of_col[c];
      if (q != unmatched && q != p) graph[q].push_back(p);
    }
  }
  const Components scc = strongly_connected_components(graph);
  const std::size_t comps = scc.members.size();

  // Block X can be placed once every block it points to is placed.
  std::vector<std::set<std::size_t>> successors(comps);
  std::vector<std::set<std::size_t>> predecessors(comps);
  for (std::size_t q = 0; q < nodes; ++q) {
    for (std::size_t p : graph[q]) {
      const std::size_t cq = scc.component[q];
      const std::size_t cp = scc.component[p];
      if (cq != cp) {
        successors[cq].insert(cp);
        predecessors[cp].insert(cq);
      }
    }
  }
  std::vector<std::size_t> min_col(comps, unmatched);
  for (std::size_t c = 0; c < comps; ++c) {
    for (std::size_t v : scc.members[c]) min_col[c] = std::min(min_col[c], pair_cols[v]);
  }
  std::vector<std::size_t> pending(comps);
  using Entry = std::pair<std::size_t, std::size_t>;  // (smallest column, component)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
  for (std::size_t c = 0; c < comps; ++c) {
    pending[c] = successors[c].size();
    if (pending[c] == 0) ready.emplace(min_col[c], c);
  }

  DMResult dm;
  dm.rows = s.rows();
  dm.cols = s.cols();
  dm.N_d = nodes;
  for (std::size_t r = 0; r < s.rows(); ++r) {
    if (h_row[r]) dm.row_perm.push_back(r);
  }
  for (std::size_t c = 0; c < s.cols(); ++c) {
    if (h_col[c]) dm.col_perm.push_back(c);
  }
  std::size_t placed = 0;
  while (!ready.empty()) {
    const std::size_t comp = ready.top().second;
    ready.pop();
    std::vector<std::size_t> members = scc.members[comp];
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return pair_cols[a] < pair_cols[b]; });
    dm.blocks.push_back({placed, placed + members.size()});
    placed += members.size();
    for (std::size_t v : members) {
      dm.row_perm.push_back(pair_rows[v]);
      dm.col_perm.push_back(pair_cols[v]);
    }
    for (std::size_t pred : predecessors[comp]) {
      if (--pending[pred] == 0) ready.emplace(min_col[pred], pred);
    }
  }
  return dm;
}

StructuralMatrix permute(const StructuralMatrix& s, const std::vector<std::size_t>& row_perm,
                         const std::vector<std::size_t>& col_perm) {
  if (row_perm.size() != s.rows() || col_perm.size() != s.cols()) {
    throw std::invalid_argument("permute: permutation size mismatch");
  }
  std::vector<std::size_t> row_pos(s.rows(), unmatched);
  std::vector<std::size_t> col_pos(s.cols(), unmatched);
  for (std::size_t i = 0; i < row_perm.size(); ++i) row_pos.at(row_perm[i]) = i;
  for (std::size_t j = 0; j < col_perm.size(); ++j) col_pos.at(col_perm[j]) = j;
  std::vector<StructuralMatrix::Position> nz;
  for (const auto& [r, c] : s.nonzeros()) nz.emplace_back(row_pos[r], col_pos[c]);
  return {s.rows(), s.cols(), std::move(nz)};
}

PsiSystem assemble_psi(const AugmentedSystem& aug, const DMResult& dm) {
  if (dm.rows != aug.M || dm.cols != aug.N) throw std::invalid_argument("assemble_psi: DM result does not match system");
  const std::size_t M = aug.M;
  const std::size_t N = aug.N;
  const std::size_t ur = dm.underdetermined_rows();
  const std::size_t uc = dm.underdetermined_cols();

  PsiSystem psi;
  psi.M = M;
  psi.N = N;
  psi.N_d = dm.N_d;
  psi.eta = dm.eta();
  psi.k = aug.k;

  // Block order [u-deriv, u-moment, d-deriv, d-moment] on both axes.
  for (std::size_t i = 0; i < ur; ++i) psi.row_origin.push_back(dm.row_perm[i]);
  for (std::size_t i = 0; i < ur; ++i) psi.row_origin.push_back(M + dm.row_perm[i]);
  for (std::size_t i = ur; i < M; ++i) psi.row_origin.push_back(dm.row_perm[i]);
  for (std::size_t i = ur; i < M; ++i) psi.row_origin.push_back(M + dm.row_perm[i]);
  for (std::size_t j = 0; j < uc; ++j) psi.col_origin.push_back(dm.col_perm[j]);
  for (std::size_t j = 0; j < uc; ++j) psi.col_origin.push_back(N + dm.col_perm[j]);
  for (std::size_t j = uc; j < N; ++j) psi.col_origin.push_back(dm.col_perm[j]);
  for (std::size_t j = uc; j < N; ++j) psi.col_origin.push_back(N + dm.col_perm[j]);

  psi.psi = permute(aug.phi(), psi.row_origin, psi.col_origin);
  std::vector<std::size_t> row_pos(2 * M);
  for (std::size_t i = 0; i < 2 * M; ++i) row_pos[psi.row_origin[i]] = i;
  psi.rhs.size = 2 * M;
  for (std::size_t r : aug.phi_rhs().nonzeros) psi.rhs.nonzeros.push_back(row_pos[r]);
  std::sort(psi.rhs.nonzeros.begin(), psi.rhs.nonzeros.end());

  for (std::size_t i : psi.row_origin) psi.row_labels.push_back(aug.row_labels[i]);
  for (std::size_t j : psi.col_origin) psi.var_labels.push_back(aug.var_labels[j]);

  psi.blocks.push_back({{0, 2 * ur}, {0, 2 * uc}});
  psi.deriv_block_flags.push_back(false);
  for (std::size_t copy = 0; copy < 2; ++copy) {
    const std::size_t row_off = 2 * ur + copy * dm.N_d;
    const std::size_t col_off = 2 * uc + copy * dm.N_d;
    for (const auto& b : dm.blocks) {
      psi.blocks.push_back({{row_off + b.begin, row_off + b.end}, {col_off + b.begin, col_off + b.end}});
      psi.deriv_block_flags.push_back(copy == 0);
    }
  }
  return psi;
}

}  // namespace mominv
