#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mominv/dm.hpp"
#include "mominv/invariance.hpp"

namespace mominv {

inline constexpr int report_schema = 1;

nlohmann::json moment_json(const MultiIndex& alpha);
nlohmann::json to_json(const DMResult& dm);
nlohmann::json to_json(const PsiSystem& psi);
nlohmann::json to_json(const BlockDAG& dag, const std::vector<std::size_t>& unreachable);
nlohmann::json to_json(const MonteCarloReport& mc);

/// Top-level analysis report. `oracle` is attached by the caller when present.
nlohmann::json to_json(const InvarianceReport& report, const std::string& network_name);

/// Graphviz rendering: sources double-circled, unreachable nodes filled.
std::string to_dot(const BlockDAG& dag, const std::vector<std::size_t>& unreachable);

}  // namespace mominv
