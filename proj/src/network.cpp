#include "mominv/network.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mominv/errors.hpp"

namespace mominv {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t column = 1;
  offset = std::min(offset, text.size());
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ValidationError(where + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

std::string require_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ValidationError(where + ": expected a string");
  return v.get<std::string>();
}

int require_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ValidationError(where + ": expected an integer");
  return v.get<int>();
}

std::size_t lookup_species(const ReactionNetwork& net, const std::string& name,
                           const std::string& where) {
  auto idx = net.species_index(name);
  if (!idx) throw ValidationError(where + ": undeclared species '" + name + "'");
  return *idx;
}

std::vector<int> parse_coefficients(const ReactionNetwork& net, const json& obj,
                                    const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object of species counts");
  std::vector<int> v(net.species_count(), 0);
  for (const auto& [name, value] : obj.items()) {
    v[lookup_species(net, name, where)] = require_int(value, where + "." + name);
  }
  return v;
}

PropensityKind parse_kind(const ReactionNetwork& net, const json& p, const std::string& where) {
  const std::string kind = require_string(require(p, "kind", where), where + ".kind");
  if (kind == "zeroth") return propensity::Zeroth{};
  if (kind == "mono" || kind == "bihomo") {
    const json& s = require(p, "species", where);
    std::size_t i = lookup_species(net, require_string(s, where + ".species"), where);
    if (kind == "mono") return propensity::Mono{i};
    return propensity::BiHomo{i};
  }
  if (kind == "bi") {
    const json& s = require(p, "species", where);
    if (!s.is_array() || s.size() != 2) {
      throw ValidationError(where + ".species: 'bi' needs an array of two species");
    }
    std::size_t a = lookup_species(net, require_string(s[0], where + ".species"), where);
    std::size_t b = lookup_species(net, require_string(s[1], where + ".species"), where);
    return propensity::BiHetero{a, b};
  }
  throw ValidationError(where + ": unknown propensity kind '" + kind + "'");
}

std::string kind_json_name(const PropensityKind& kind) {
  return std::visit(overloaded{[](const propensity::Zeroth&) { return "zeroth"; },
                               [](const propensity::Mono&) { return "mono"; },
                               [](const propensity::BiHetero&) { return "bi"; },
                               [](const propensity::BiHomo&) { return "bihomo"; }},
                    kind);
}

}  // namespace

std::optional<std::size_t> ReactionNetwork::species_index(std::string_view name) const {
  for (const auto& s : species) {
    if (s.name == name) return s.id;
  }
  return std::nullopt;
}

std::optional<std::size_t> ReactionNetwork::parameter_index(std::string_view name) const {
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    if (parameters[i] == name) return i;
  }
  return std::nullopt;
}

std::string kind_name(const PropensityKind& kind) { return kind_json_name(kind); }

void validate(const ReactionNetwork& net) {
  const std::size_t n = net.species_count();
  if (n == 0) throw ValidationError("network declares no species");
  if (net.parameters.empty()) throw ValidationError("network declares no parameters");
  if (net.reactions.empty()) throw ValidationError("network declares no reactions");

  std::set<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = net.species[i];
    if (s.id != i) throw ValidationError("species '" + s.name + "' has index out of order");
    if (s.name.empty()) throw ValidationError("species " + std::to_string(i) + " has an empty name");
    if (!names.insert(s.name).second) throw ValidationError("duplicate species name '" + s.name + "'");
  }
  std::set<std::string> params;
  for (const auto& p : net.parameters) {
    if (p.empty()) throw ValidationError("empty parameter name");
    if (!params.insert(p).second) throw ValidationError("duplicate parameter name '" + p + "'");
  }

  std::vector<bool> used(net.parameter_count(), false);
  std::set<std::string> reaction_names;
  for (const auto& r : net.reactions) {
    const std::string where = "reaction '" + r.name + "'";
    if (r.name.empty()) throw ValidationError("reaction with empty name");
    if (!reaction_names.insert(r.name).second) throw ValidationError("duplicate reaction name '" + r.name + "'");
    if (r.stoich.size() != n) throw ValidationError(where + ": stoichiometry has wrong length");
    if (std::all_of(r.stoich.begin(), r.stoich.end(), [](int v) { return v == 0; })) {
      throw ValidationError(where + ": stoichiometry is all zero");
    }
    if (r.rate >= net.parameter_count()) throw ValidationError(where + ": rate index out of range");
    used[r.rate] = true;
    const bool species_ok = std::visit(
        overloaded{[](const propensity::Zeroth&) { return true; },
                   [n](const propensity::Mono& k) { return k.species < n; },
                   [n](const propensity::BiHomo& k) { return k.species < n; },
                   [n](const propensity::BiHetero& k) { return k.species_a < n && k.species_b < n; }},
        r.kind);
    if (!species_ok) throw ValidationError(where + ": propensity species out of range");
    if (const auto* bi = std::get_if<propensity::BiHetero>(&r.kind); bi && bi->species_a == bi->species_b) {
      throw ValidationError(where + ": 'bi' propensity needs two distinct species (use 'bihomo')");
    }
  }
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (!used[k]) throw ValidationError("parameter '" + net.parameters[k] + "' is not used by any reaction");
  }
  for (std::size_t c = 0; c < net.conservation.size(); ++c) {
    const auto& law = net.conservation[c];
    if (law.coefficients.size() != n) {
      throw ValidationError("conservation law " + std::to_string(c) + ": coefficient vector has wrong length");
    }
    if (std::all_of(law.coefficients.begin(), law.coefficients.end(), [](int v) { return v == 0; })) {
      throw ValidationError("conservation law " + std::to_string(c) + ": all coefficients are zero");
    }
  }
}

ReactionNetwork load_network(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("network JSON parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + e.what(),
                     line, column);
  }
  if (!doc.is_object()) throw ValidationError("network file: top level must be an object");

  ReactionNetwork net;
  const json& species = require(doc, "species", "network");
  if (!species.is_array()) throw ValidationError("network.species: expected an array");
  for (const auto& s : species) {
    net.species.push_back({net.species.size(), require_string(s, "network.species")});
  }
  const json& parameters = require(doc, "parameters", "network");
  if (!parameters.is_array()) throw ValidationError("network.parameters: expected an array");
  for (const auto& p : parameters) net.parameters.push_back(require_string(p, "network.parameters"));

  // Name uniqueness first so later lookups are unambiguous.
  {
    std::set<std::string> seen;
    for (const auto& s : net.species) {
      if (!seen.insert(s.name).second) throw ValidationError("duplicate species name '" + s.name + "'");
    }
    seen.clear();
    for (const auto& p : net.parameters) {
      if (!seen.insert(p).second) throw ValidationError("duplicate parameter name '" + p + "'");
    }
  }

  const json& reactions = require(doc, "reactions", "network");
  if (!reactions.is_array()) throw ValidationError("network.reactions: expected an array");
  for (std::size_t j = 0; j < reactions.size(); ++j) {
    const json& r = reactions[j];
    std::string where = "reaction #" + std::to_string(j + 1);
    Reaction reaction;
    reaction.name = require_string(require(r, "name", where), where + ".name");
    where = "reaction '" + reaction.name + "'";
    reaction.stoich = parse_coefficients(net, require(r, "stoichiometry", where), where + ".stoichiometry");
    const json& p = require(r, "propensity", where);
    reaction.kind = parse_kind(net, p, where + ".propensity");
    const std::string rate = require_string(require(p, "rate", where + ".propensity"), where + ".rate");
    auto k = net.parameter_index(rate);
    if (!k) throw ValidationError(where + ": undeclared parameter '" + rate + "'");
    reaction.rate = *k;
    net.reactions.push_back(std::move(reaction));
  }

  if (doc.contains("conservation")) {
    const json& laws = doc.at("conservation");
    if (!laws.is_array()) throw ValidationError("network.conservation: expected an array");
    for (std::size_t c = 0; c < laws.size(); ++c) {
      const std::string where = "conservation law " + std::to_string(c);
      Conservation law;
      law.coefficients = parse_coefficients(net, require(laws[c], "coefficients", where), where + ".coefficients");
      const json& constant = require(laws[c], "constant", where);
      try {
        law.constant = constant.is_number_integer() ? Rational(constant.get<long>())
                                                    : parse_rational(require_string(constant, where + ".constant"));
      } catch (const std::invalid_argument& e) {
        throw ValidationError(where + ".constant: " + e.what());
      }
      net.conservation.push_back(std::move(law));
    }
  }

  validate(net);
  return net;
}

ReactionNetwork load_network_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open network file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_network(ss.str());
}

std::string serialize_network(const ReactionNetwork& net) {
  auto counts = [&](const std::vector<int>& v) {
    json obj = json::object();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] != 0) obj[net.species[i].name] = v[i];
    }
    return obj;
  };

  json doc;
  doc["species"] = json::array();
  for (const auto& s : net.species) doc["species"].push_back(s.name);
  doc["parameters"] = net.parameters;
  doc["reactions"] = json::array();
  for (const auto& r : net.reactions) {
    json p;
    p["kind"] = kind_json_name(r.kind);
    std::visit(overloaded{[](const propensity::Zeroth&) {},
                          [&](const propensity::Mono& k) { p["species"] = net.species[k.species].name; },
                          [&](const propensity::BiHomo& k) { p["species"] = net.species[k.species].name; },
                          [&](const propensity::BiHetero& k) {
                            p["species"] = {net.species[k.species_a].name, net.species[k.species_b].name};
                          }},
               r.kind);
    p["rate"] = net.parameters[r.rate];
    doc["reactions"].push_back({{"name", r.name}, {"stoichiometry", counts(r.stoich)}, {"propensity", p}});
  }
  doc["conservation"] = json::array();
  for (const auto& law : net.conservation) {
    doc["conservation"].push_back({{"coefficients", counts(law.coefficients)}, {"constant", to_string(law.constant)}});
  }
  return doc.dump(2);
}

Polynomial propensity_polynomial(const Reaction& r) {
  const std::size_t n = r.stoich.size();
  return std::visit(
      overloaded{[n](const propensity::Zeroth&) { return Polynomial::constant(n, 1); },
                 [n](const propensity::Mono& k) { return Polynomial::variable(n, k.species); },
                 [n](const propensity::BiHetero& k) {
                   return Polynomial::variable(n, k.species_a) * Polynomial::variable(n, k.species_b);
                 },
                 [n](const propensity::BiHomo& k) {
                   Polynomial x = Polynomial::variable(n, k.species);
                   return (x * x - x) * Rational(1, 2);
                 }},
      r.kind);
}

}  // namespace mominv
