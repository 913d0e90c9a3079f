#include "mominv/moments.hpp"

#include <map>
#include <set>
#include <sstream>

#include "mominv/errors.hpp"

namespace mominv {

std::string RowLabel::to_string() const {
  if (kind == Kind::Conservation) return "conservation[" + std::to_string(law) + "]";
  return "d/dt " + moment_string(alpha);
}

Polynomial shift_difference(const MultiIndex& alpha, std::span<const int> s) {
  const std::size_t n = alpha.size();
  if (s.size() != n) throw std::invalid_argument("shift_difference: stoichiometry length mismatch");
  Polynomial shifted = Polynomial::constant(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0) continue;
    Polynomial factor = Polynomial::variable(n, i) + Polynomial::constant(n, s[i]);
    shifted = shifted * factor.pow(static_cast<unsigned>(alpha[i]));
  }
  shifted.add_term(alpha, -1);
  return shifted;
}

MomentSystem build_moment_system(const ReactionNetwork& net, int order) {
  if (order < 1) throw ValidationError("moment order must be at least 1");
  const std::size_t n = net.species_count();
  const std::size_t m = net.parameter_count();

  std::vector<RowLabel> rows;
  for (int q = 1; q <= order; ++q) {
    for (auto& alpha : indices_of_order(n, q)) rows.push_back({RowLabel::Kind::Moment, std::move(alpha), 0});
  }
  for (std::size_t c = 0; c < net.conservation.size(); ++c) {
    rows.push_back({RowLabel::Kind::Conservation, MultiIndex::zero(n), c});
  }

  // Coefficients keyed by monomial first; columns are assigned once the basis is known.
  using RowTerms = std::map<MultiIndex, Rational>;
  std::vector<std::vector<RowTerms>> coef(m + 1, std::vector<RowTerms>(rows.size()));
  std::vector<std::vector<Rational>> constant(m + 1, std::vector<Rational>(rows.size()));
  std::set<MultiIndex> basis;

  std::vector<Polynomial> propensities;
  for (const auto& r : net.reactions) propensities.push_back(propensity_polynomial(r));

  for (std::size_t row = 0; row < rows.size(); ++row) {
    if (rows[row].kind == RowLabel::Kind::Moment) {
      for (std::size_t j = 0; j < net.reactions.size(); ++j) {
        const Reaction& r = net.reactions[j];
        Polynomial term = propensities[j] * shift_difference(rows[row].alpha, r.stoich);
        for (const auto& [beta, c] : term.terms()) {
          if (beta.is_zero()) {
            constant[r.rate][row] += c;
          } else {
            auto& slot = coef[r.rate][row][beta];
            slot += c;
          }
        }
      }
    } else {
      const Conservation& law = net.conservation[rows[row].law];
      for (std::size_t i = 0; i < n; ++i) {
        if (law.coefficients[i] != 0) coef[m][row][MultiIndex::unit(n, i)] += law.coefficients[i];
      }
      constant[m][row] = -law.constant;
    }
  }

  for (auto& slot : coef) {
    for (auto& row_terms : slot) {
      std::erase_if(row_terms, [](const auto& kv) { return kv.second == 0; });
      for (const auto& [beta, c] : row_terms) basis.insert(beta);
    }
  }

  MomentSystem sys;
  sys.species = n;
  sys.parameters = m;
  sys.order = order;
  sys.basis.assign(basis.begin(), basis.end());
  sys.equations = std::move(rows);
  std::map<MultiIndex, std::size_t> column;
  for (std::size_t c = 0; c < sys.basis.size(); ++c) column.emplace(sys.basis[c], c);

  for (std::size_t j = 0; j <= m; ++j) {
    SparseMatrix a(sys.rows(), sys.cols());
    for (std::size_t row = 0; row < sys.rows(); ++row) {
      for (const auto& [beta, c] : coef[j][row]) a.set(row, column.at(beta), c);
    }
    sys.A.push_back(std::move(a));
    sys.b.push_back(std::move(constant[j]));
  }
  return sys;
}

NumericSystem assemble_numeric(const MomentSystem& sys, std::span<const Rational> theta) {
  if (theta.size() != sys.parameters) throw ValidationError("theta has wrong length");
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (theta[j] <= 0) throw ValidationError("theta[" + std::to_string(j) + "] must be positive");
  }
  NumericSystem out{SparseMatrix(sys.rows(), sys.cols()), std::vector<Rational>(sys.rows())};
  for (std::size_t j = 0; j < sys.slots(); ++j) {
    const Rational w = j < sys.parameters ? theta[j] : Rational(1);
    for (std::size_t r = 0; r < sys.rows(); ++r) {
      for (const auto& [c, v] : sys.A[j].row(r)) out.matrix.add(r, c, w * v);
      out.constant[r] += w * sys.b[j][r];
    }
  }
  return out;
}

std::string dump_triplets(const MomentSystem& sys) {
  std::ostringstream os;
  for (std::size_t j = 0; j < sys.slots(); ++j) {
    bool has_b = false;
    for (const auto& v : sys.b[j]) has_b = has_b || v != 0;
    if (sys.A[j].nnz() == 0 && !has_b) continue;
    os << "slot " << j << (j == sys.fixed_slot() ? " fixed" : "") << '\n';
    for (std::size_t r = 0; r < sys.rows(); ++r) {
      for (const auto& [c, v] : sys.A[j].row(r)) os << r << ' ' << c << ' ' << v.get_num() << '/' << v.get_den() << '\n';
    }
    for (std::size_t r = 0; r < sys.rows(); ++r) {
      const Rational& v = sys.b[j][r];
      if (v != 0) os << "b " << r << ' ' << v.get_num() << '/' << v.get_den() << '\n';
    }
  }
  return os.str();
}

}  // namespace mominv
