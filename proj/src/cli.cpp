#include "mominv/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mominv/errors.hpp"
#include "mominv/fsp.hpp"
#include "mominv/invariance.hpp"
#include "mominv/report.hpp"

namespace mominv::cli {

using nlohmann::json;

namespace {

int exit_code_for(const Error& e) {
  if (dynamic_cast<const AssumptionError*>(&e) != nullptr) return assumption_violated;
  return input_error;
}

std::string describe(const Error& e) {
  return e.stage().empty() ? std::string(e.what()) : e.stage() + ": " + e.what();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << content;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::size_t resolve_parameter(const ReactionNetwork& net, const std::string& name) {
  auto k = net.parameter_index(name);
  if (!k) throw ValidationError("--perturb: undeclared parameter '" + name + "'");
  return *k;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string moment_list(const std::vector<MultiIndex>& v) {
  std::string s;
  for (const auto& m : v) s += (s.empty() ? "" : ", ") + moment_string(m);
  return s.empty() ? "(none)" : s;
}

struct OracleOutcome {
  json report;
  std::vector<std::string> lines;
  bool disagreement = false;
  bool truncation_suspect = false;
};

OracleOutcome run_oracle(const ReactionNetwork& net, const InvarianceReport& report, const AnalysisConfig& cfg) {
  std::vector<double> theta = cfg.theta;
  if (theta.empty()) theta.assign(net.parameter_count(), 1.0);
  if (theta.size() != net.parameter_count()) {
    throw ValidationError("--theta: expected " + std::to_string(net.parameter_count()) + " values");
  }
  fsp::StateBox box;
  box.bounds = cfg.box;
  if (box.bounds.empty()) box.bounds.assign(net.species_count(), 30);
  if (box.bounds.size() != net.species_count()) {
    throw ValidationError("--box: expected " + std::to_string(net.species_count()) + " bounds");
  }

  std::vector<MultiIndex> moments;
  for (const auto& label : report.psi.var_labels) {
    if (label.copy == Copy::Moment) moments.push_back(label.moment);
  }
  std::sort(moments.begin(), moments.end());

  const fsp::SensitivityEstimate est = fsp::sensitivity_fd(net, box, theta, report.k, cfg.fd_step, moments);

  OracleOutcome outcome;
  outcome.truncation_suspect = est.leaked_mass > 0.01;
  json entries = json::array();
  for (const auto& alpha : moments) {
    const double mu = est.base.moments.at(alpha);
    const double fd = est.derivative.at(alpha);
    const bool zero = fsp::classifies_zero(fd, mu);
    const bool invariant = std::binary_search(report.invariant_moments.begin(), report.invariant_moments.end(), alpha);
    const bool struct_zero =
        std::binary_search(report.structurally_zero_moments.begin(), report.structurally_zero_moments.end(), alpha);
    const bool flagged = invariant || struct_zero;
    bool agrees = true;
    if (flagged) agrees = zero && (!struct_zero || std::abs(mu) <= fsp::zero_tolerance);
    outcome.disagreement = outcome.disagreement || !agrees;

    std::string line = moment_string(alpha) + ": " + (zero ? std::string("0") : format_double(fd));
    if (flagged) {
      line += agrees ? " (agrees)" : " (DISAGREES)";
    } else {
      line += zero ? " (zero)" : " (nonzero)";
    }
    outcome.lines.push_back(std::move(line));
    entries.push_back({{"moment", moment_json(alpha)},
                       {"value", mu},
                       {"derivative", fd},
                       {"classified_zero", zero},
                       {"flagged", flagged},
                       {"agrees", agrees}});
  }
  outcome.report = {{"theta", theta},
                    {"box", box.bounds},
                    {"fd_step", cfg.fd_step},
                    {"leaked_mass", est.leaked_mass},
                    {"states", est.base.states},
                    {"recurrent_states", est.base.recurrent_states},
                    {"moments", entries},
                    {"agreement", !outcome.disagreement},
                    {"warnings", est.base.warnings}};
  return outcome;
}

}  // namespace

int cmd_analyze(const AnalysisConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const ReactionNetwork net = load_network_file(cfg.network_path);
    const std::size_t k = resolve_parameter(net, cfg.perturb);
    InvarianceReport report = analyze(net, k, cfg.order);

    std::optional<OracleOutcome> oracle;
    std::optional<MonteCarloReport> mc;
    const std::size_t trials = cfg.mc_trials.value_or(cfg.oracle ? 100 : 0);
    if (trials > 0) mc = monte_carlo_check(report.psi, trials, cfg.seed);
    if (cfg.oracle) oracle = run_oracle(net, report, cfg);
    if (mc && !mc->ok()) report.warnings.push_back("Monte Carlo check failed");
    if (oracle && oracle->truncation_suspect) report.warnings.push_back("truncation suspect");

    if (cfg.dot_path) write_file(*cfg.dot_path, to_dot(report.dag, report.unreachable));

    if (cfg.format == "json") {
      json doc = to_json(report, cfg.network_path);
      if (oracle || mc) {
        json o = oracle ? oracle->report : json::object();
        if (mc) o["monte_carlo"] = to_json(*mc);
        doc["oracle"] = o;
      }
      out << doc.dump(2) << '\n';
    } else {
      out << "network: " << cfg.network_path << '\n';
      out << "perturb: " << report.parameter << " (order " << report.order << ")\n";
      out << "dims: M=" << report.diagnostics.M << " N=" << report.diagnostics.N << " N_d=" << report.diagnostics.N_d
          << " eta=" << report.diagnostics.eta << '\n';
      for (const auto& m : report.invariant_moments) out << "invariant: " << moment_string(m) << '\n';
      for (const auto& m : report.structurally_zero_moments) out << "structurally zero: " << moment_string(m) << '\n';
      out << "undetermined: " << moment_list(report.undetermined_moments) << '\n';
      if (mc) {
        out << "monte carlo: " << mc->passed << '/' << mc->trials << " trials passed\n";
      }
      if (oracle) {
        for (const auto& line : oracle->lines) out << "oracle " << line << '\n';
      }
      for (const auto& w : report.warnings) out << "warning: " << w << '\n';
    }
    if (mc && !mc->ok()) return oracle_disagreement;
    if (oracle && oracle->disagreement) return oracle_disagreement;
    return ok;
  } catch (const Error& e) {
    err << "error: " << describe(e) << '\n';
    return exit_code_for(e);
  }
}

int cmd_oracle(const AnalysisConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const ReactionNetwork net = load_network_file(cfg.network_path);
    const std::size_t k = resolve_parameter(net, cfg.perturb);
    const InvarianceReport report = analyze(net, k, cfg.order);
    const OracleOutcome oracle = run_oracle(net, report, cfg);
    if (cfg.format == "json") {
      out << oracle.report.dump(2) << '\n';
    } else {
      out << "perturb: " << report.parameter << " (fd step " << cfg.fd_step << ", leaked mass "
          << format_double(oracle.report.at("leaked_mass").get<double>()) << ")\n";
      for (const auto& line : oracle.lines) out << line << '\n';
      if (oracle.truncation_suspect) out << "warning: truncation suspect\n";
    }
    return oracle.disagreement ? oracle_disagreement : ok;
  } catch (const Error& e) {
    err << "error: " << describe(e) << '\n';
    return exit_code_for(e);
  }
}

int cmd_decompose(const DecomposeConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    StructuralMatrix pattern;
    std::optional<AugmentedSystem> aug;
    if (cfg.pattern_path) {
      pattern = read_matrix_market(read_file(*cfg.pattern_path));
    } else if (cfg.network_path) {
      const ReactionNetwork net = load_network_file(*cfg.network_path);
      std::size_t k = 0;
      if (cfg.perturb) k = resolve_parameter(net, *cfg.perturb);
      MomentSystem sys = drop_unused_columns(eliminate_redundancy(build_moment_system(net, cfg.order)));
      aug = build_augmented(sys, k);
      pattern = aug->union_A;
    } else {
      throw ValidationError("decompose needs --network or --pattern");
    }

    const DMResult dm = dm_decompose(pattern);
    if (cfg.mtx_path) write_file(*cfg.mtx_path, to_matrix_market(permute(pattern, dm.row_perm, dm.col_perm)));
    std::optional<PsiSystem> psi;
    if (aug && cfg.perturb) psi = assemble_psi(*aug, dm);
    if (cfg.psi_mtx_path) {
      if (!psi) throw ValidationError("--psi-mtx needs --network and --perturb");
      write_file(*cfg.psi_mtx_path, to_matrix_market(psi->psi));
    }

    if (cfg.format == "json") {
      json doc = {{"schema", report_schema}, {"dm", to_json(dm)}};
      if (psi) doc["psi"] = to_json(*psi);
      out << doc.dump(2) << '\n';
    } else {
      out << "N_d=" << dm.N_d << " eta=" << dm.eta() << '\n';
      out << "underdetermined: " << dm.underdetermined_rows() << "x" << dm.underdetermined_cols() << '\n';
      out << "row_perm:";
      for (auto r : dm.row_perm) out << ' ' << r;
      out << "\ncol_perm:";
      for (auto c : dm.col_perm) out << ' ' << c;
      out << '\n';
      for (std::size_t i = 0; i < dm.eta(); ++i) {
        const auto rr = dm.row_range(i);
        const auto cr = dm.col_range(i);
        out << "block " << i + 1 << ": rows [" << rr.begin << "," << rr.end << ") cols [" << cr.begin << ","
            << cr.end << ")\n";
      }
      out << to_matrix_market(permute(pattern, dm.row_perm, dm.col_perm));
    }
    return ok;
  } catch (const Error& e) {
    err << "error: " << describe(e) << '\n';
    return exit_code_for(e);
  }
}

namespace {

void add_analysis_options(CLI::App& app, AnalysisConfig& cfg) {
  app.add_option("--network", cfg.network_path, "Reaction network JSON file")->required();
  app.add_option("--perturb", cfg.perturb, "Name of the rate parameter to perturb")->required();
  app.add_option("--order", cfg.order, "Highest moment order of the equations")->check(CLI::PositiveNumber);
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--dot", cfg.dot_path, "Write the block DAG as Graphviz DOT");
  app.add_flag("--oracle", cfg.oracle, "Cross-check verdicts with the finite state projection oracle");
  app.add_option("--theta", cfg.theta, "Rate parameter values for the oracle")->delimiter(',');
  app.add_option("--box", cfg.box, "Per-species copy-number bounds for the oracle")->delimiter(',');
  app.add_option("--fd-step", cfg.fd_step, "Relative finite-difference step");
  app.add_option("--mc-trials", cfg.mc_trials, "Monte Carlo instantiations of the structural system");
  app.add_option("--seed", cfg.seed, "Monte Carlo seed");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structural invariance analysis of stationary moments in stochastic reaction networks", "mominv"};
  app.require_subcommand(1);

  AnalysisConfig analyze_cfg;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Find stationary moments invariant under a rate perturbation");
  add_analysis_options(*analyze_cmd, analyze_cfg);

  AnalysisConfig oracle_cfg;
  oracle_cfg.oracle = true;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Finite-difference sensitivities from the truncated master equation");
  add_analysis_options(*oracle_cmd, oracle_cfg);

  DecomposeConfig dcfg;
  CLI::App* decompose_cmd = app.add_subcommand("decompose", "Dulmage-Mendelsohn decomposition of the moment equations");
  auto* net_opt = decompose_cmd->add_option("--network", dcfg.network_path, "Reaction network JSON file");
  auto* pat_opt = decompose_cmd->add_option("--pattern", dcfg.pattern_path, "Matrix Market pattern file");
  net_opt->excludes(pat_opt);
  decompose_cmd->add_option("--perturb", dcfg.perturb, "Parameter for the perturbation system");
  decompose_cmd->add_option("--order", dcfg.order, "Highest moment order")->check(CLI::PositiveNumber);
  decompose_cmd->add_option("--format", dcfg.format, "Output format")->check(CLI::IsMember({"json", "text"}));
  decompose_cmd->add_option("--mtx", dcfg.mtx_path, "Write the permuted pattern as Matrix Market");
  decompose_cmd->add_option("--psi-mtx", dcfg.psi_mtx_path, "Write the perturbation system pattern as Matrix Market");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  }

  if (analyze_cmd->parsed()) return cmd_analyze(analyze_cfg, out, err);
  if (oracle_cmd->parsed()) return cmd_oracle(oracle_cfg, out, err);
  return cmd_decompose(dcfg, out, err);
}

}  // namespace mominv::cli
