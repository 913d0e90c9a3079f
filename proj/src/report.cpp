#include "mominv/report.hpp"

#include <algorithm>
#include <sstream>

namespace mominv {

using nlohmann::json;

nlohmann::json moment_json(const MultiIndex& alpha) {
  return {{"label", moment_string(alpha)},
          {"exponents", std::vector<int>(alpha.exponents().begin(), alpha.exponents().end())}};
}

namespace {

json moments_json(const std::vector<MultiIndex>& v) {
  json arr = json::array();
  for (const auto& m : v) arr.push_back(moment_json(m));
  return arr;
}

json range_json(const BlockRange& r) { return json::array({r.begin, r.end}); }

}  // namespace

nlohmann::json to_json(const DMResult& dm) {
  json blocks = json::array();
  for (std::size_t i = 0; i < dm.eta(); ++i) {
    blocks.push_back({{"rows", range_json(dm.row_range(i))}, {"cols", range_json(dm.col_range(i))}});
  }
  return {{"rows", dm.rows},
          {"cols", dm.cols},
          {"N_d", dm.N_d},
          {"eta", dm.eta()},
          {"underdetermined", {{"rows", dm.underdetermined_rows()}, {"cols", dm.underdetermined_cols()}}},
          {"row_perm", dm.row_perm},
          {"col_perm", dm.col_perm},
          {"blocks", blocks}};
}

nlohmann::json to_json(const PsiSystem& psi) {
  json blocks = json::array();
  for (std::size_t i = 0; i < psi.blocks.size(); ++i) {
    json vars = json::array();
    for (std::size_t c = psi.blocks[i].cols.begin; c < psi.blocks[i].cols.end; ++c) {
      vars.push_back(psi.var_labels[c].to_string());
    }
    json eqs = json::array();
    for (std::size_t r = psi.blocks[i].rows.begin; r < psi.blocks[i].rows.end; ++r) {
      eqs.push_back(psi.row_labels[r].to_string());
    }
    blocks.push_back({{"index", i},
                      {"kind", i == 0 ? "underdetermined" : (psi.deriv_block_flags[i] ? "derivative" : "moment")},
                      {"rows", range_json(psi.blocks[i].rows)},
                      {"cols", range_json(psi.blocks[i].cols)},
                      {"variables", vars},
                      {"equations", eqs}});
  }
  return {{"rows", psi.psi.rows()},
          {"cols", psi.psi.cols()},
          {"row_origin", psi.row_origin},
          {"col_origin", psi.col_origin},
          {"rhs", psi.rhs.nonzeros},
          {"blocks", blocks}};
}

nlohmann::json to_json(const BlockDAG& dag, const std::vector<std::size_t>& unreachable) {
  json nodes = json::array();
  for (std::size_t v = 1; v <= dag.nodes; ++v) {
    json vars = json::array();
    for (const auto& l : dag.labels[v]) vars.push_back(l.to_string());
    const bool source = std::binary_search(dag.sources.begin(), dag.sources.end(), v);
    const bool unreached = std::binary_search(unreachable.begin(), unreachable.end(), v);
    nodes.push_back({{"id", v},
                     {"kind", dag.derivative[v] ? "derivative" : "moment"},
                     {"variables", vars},
                     {"source", source},
                     {"reachable", !unreached}});
  }
  json edges = json::array();
  for (const auto& [q, p] : dag.edges) edges.push_back(json::array({q, p}));
  return {{"nodes", nodes}, {"edges", edges}, {"sources", dag.sources}, {"unreachable", unreachable}};
}

nlohmann::json to_json(const MonteCarloReport& mc) {
  return {{"trials", mc.trials},
          {"passed", mc.passed},
          {"failed", mc.failed},
          {"aborted", mc.aborted},
          {"resamples", mc.resamples},
          {"flagged_variables", mc.flagged_variables},
          {"failures", mc.failures}};
}

nlohmann::json to_json(const InvarianceReport& report, const std::string& network_name) {
  const auto& d = report.diagnostics;
  return {{"schema", report_schema},
          {"network", network_name},
          {"perturb", report.parameter},
          {"order", report.order},
          {"dims", {{"M", d.M}, {"N", d.N}, {"N_d", d.N_d}, {"eta", d.eta}}},
          {"invariant_moments", moments_json(report.invariant_moments)},
          {"structurally_zero_moments", moments_json(report.structurally_zero_moments)},
          {"undetermined_moments", moments_json(report.undetermined_moments)},
          {"dag", to_json(report.dag, report.unreachable)},
          {"warnings", report.warnings}};
}

std::string to_dot(const BlockDAG& dag, const std::vector<std::size_t>& unreachable) {
  std::ostringstream os;
  os << "digraph {\n";
  for (std::size_t v = 1; v <= dag.nodes; ++v) {
    std::string label;
    for (const auto& l : dag.labels[v]) label += (label.empty() ? "" : ", ") + l.to_string();
    os << "  V" << v << " [label=\"V" << v << ": " << label << "\"";
    if (std::binary_search(dag.sources.begin(), dag.sources.end(), v)) os << ", shape=doublecircle";
    if (std::binary_search(unreachable.begin(), unreachable.end(), v)) os << ", style=filled";
    os << "];\n";
  }
  for (const auto& [q, p] : dag.edges) os << "  V" << q << " -> V" << p << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace mominv
