#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mominv::cli {

/// Process exit codes.
enum ExitCode : int {
  ok = 0,
  input_error = 1,
  assumption_violated = 2,
  oracle_disagreement = 3,
};

struct AnalysisConfig {
  std::string network_path;
  std::string perturb;
  int order = 1;
  std::string format = "text";
  std::optional<std::string> dot_path;
  bool oracle = false;
  std::vector<double> theta;
  std::vector<int> box;
  double fd_step = 1e-3;
  std::optional<std::size_t> mc_trials;
  std::uint64_t seed = 1;
};

int cmd_analyze(const AnalysisConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_oracle(const AnalysisConfig& cfg, std::ostream& out, std::ostream& err);

struct DecomposeConfig {
  std::optional<std::string> network_path;
  std::optional<std::string> pattern_path;
  std::optional<std::string> perturb;
  int order = 1;
  std::string format = "text";
  std::optional<std::string> mtx_path;
  std::optional<std::string> psi_mtx_path;
};

int cmd_decompose(const DecomposeConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses `args` (without the program name) and dispatches to a subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mominv::cli
