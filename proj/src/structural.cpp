#include "mominv/structural.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "mominv/dm.hpp"
#include "mominv/errors.hpp"

namespace mominv {

StructuralMatrix::StructuralMatrix(std::size_t rows, std::size_t cols, std::vector<Position> nonzeros)
    : rows_(rows), cols_(cols), nz_(std::move(nonzeros)) {
  for (const auto& [r, c] : nz_) {
    if (r >= rows_ || c >= cols_) throw std::out_of_range("structural position out of range");
  }
  std::sort(nz_.begin(), nz_.end());
  nz_.erase(std::unique(nz_.begin(), nz_.end()), nz_.end());
}

StructuralMatrix StructuralMatrix::identity(std::size_t n) {
  std::vector<Position> nz;
  for (std::size_t i = 0; i < n; ++i) nz.emplace_back(i, i);
  return {n, n, std::move(nz)};
}

bool StructuralMatrix::contains(std::size_t r, std::size_t c) const {
  return std::binary_search(nz_.begin(), nz_.end(), Position{r, c});
}

std::vector<std::vector<std::size_t>> StructuralMatrix::row_lists() const {
  std::vector<std::vector<std::size_t>> out(rows_);
  for (const auto& [r, c] : nz_) out[r].push_back(c);
  return out;
}

std::vector<std::vector<std::size_t>> StructuralMatrix::col_lists() const {
  std::vector<std::vector<std::size_t>> out(cols_);
  for (const auto& [r, c] : nz_) out[c].push_back(r);
  return out;
}

StructuralMatrix StructuralMatrix::operator|(const StructuralMatrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw std::invalid_argument("pattern union: shape mismatch");
  std::vector<Position> nz;
  std::set_union(nz_.begin(), nz_.end(), other.nz_.begin(), other.nz_.end(), std::back_inserter(nz));
  return {rows_, cols_, std::move(nz)};
}

bool StructuralVector::contains(std::size_t i) const {
  return std::binary_search(nonzeros.begin(), nonzeros.end(), i);
}

StructuralVector StructuralVector::operator|(const StructuralVector& other) const {
  if (size != other.size) throw std::invalid_argument("pattern union: length mismatch");
  StructuralVector out{size, {}};
  std::set_union(nonzeros.begin(), nonzeros.end(), other.nonzeros.begin(), other.nonzeros.end(),
                 std::back_inserter(out.nonzeros));
  return out;
}

StructuralMatrix structure_of(const SparseMatrix& m) {
  std::vector<StructuralMatrix::Position> nz;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (const auto& [c, v] : m.row(r)) {
      if (v != 0) nz.emplace_back(r, c);
    }
  }
  return {m.rows(), m.cols(), std::move(nz)};
}

StructuralMatrix structure_of(const DenseMatrix& m) {
  std::vector<StructuralMatrix::Position> nz;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m(r, c) != 0) nz.emplace_back(r, c);
    }
  }
  return {m.rows(), m.cols(), std::move(nz)};
}

StructuralVector structure_of(std::span<const Rational> v) {
  StructuralVector out{v.size(), {}};
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0) out.nonzeros.push_back(i);
  }
  return out;
}

namespace {

MomentSystem restrict_rows(MomentSystem sys, const std::vector<std::size_t>& keep) {
  std::vector<bool> kept(sys.rows(), false);
  for (std::size_t r : keep) kept[r] = true;
  for (std::size_t r = 0; r < sys.rows(); ++r) {
    if (!kept[r]) sys.removed_rows.push_back(sys.equations[r]);
  }
  std::vector<RowLabel> labels;
  for (std::size_t r : keep) labels.push_back(sys.equations[r]);
  sys.equations = std::move(labels);
  for (std::size_t j = 0; j < sys.slots(); ++j) {
    sys.A[j] = sys.A[j].select_rows(keep);
    std::vector<Rational> b;
    for (std::size_t r : keep) b.push_back(sys.b[j][r]);
    sys.b[j] = std::move(b);
  }
  return sys;
}

}  // namespace

MomentSystem eliminate_redundancy(MomentSystem sys) {
  // Common left null vectors of all [A_j | b_j] are exactly the left null
  // vectors of their horizontal concatenation K. Keeping the rows retained by
  // a forward independence pass removes the same rows as repeatedly deleting
  // the highest-index row that lies in the span of the remaining ones.
  const std::size_t width = sys.slots() * (sys.cols() + 1);
  DenseMatrix K(sys.rows(), width);
  for (std::size_t j = 0; j < sys.slots(); ++j) {
    const std::size_t offset = j * (sys.cols() + 1);
    for (std::size_t r = 0; r < sys.rows(); ++r) {
      for (const auto& [c, v] : sys.A[j].row(r)) K(r, offset + c) = v;
      K(r, offset + sys.cols()) = sys.b[j][r];
    }
  }
  std::vector<std::size_t> keep = independent_rows(K);
  if (keep.size() == sys.rows()) return sys;
  return restrict_rows(std::move(sys), keep);
}

MomentSystem drop_unused_columns(MomentSystem sys) {
  std::vector<bool> used(sys.cols(), false);
  for (const auto& a : sys.A) {
    for (std::size_t r = 0; r < a.rows(); ++r) {
      for (const auto& [c, v] : a.row(r)) used[c] = true;
    }
  }
  std::vector<std::size_t> keep;
  MomentBasis basis;
  for (std::size_t c = 0; c < sys.cols(); ++c) {
    if (used[c]) {
      keep.push_back(c);
      basis.push_back(sys.basis[c]);
    } else {
      sys.removed_columns.push_back(sys.basis[c]);
    }
  }
  if (keep.size() == sys.cols()) return sys;
  for (auto& a : sys.A) a = a.select_cols(keep);
  sys.basis = std::move(basis);
  return sys;
}

std::string VarLabel::to_string() const {
  std::string s = moment_string(moment);
  return copy == Copy::Derivative ? s + "'" : s;
}

std::string EqLabel::to_string() const {
  return (copy == Copy::Derivative ? "d/dtheta " : "") + row.to_string();
}

StructuralMatrix AugmentedSystem::phi() const {
  std::vector<StructuralMatrix::Position> nz;
  for (const auto& [r, c] : union_A.nonzeros()) {
    nz.emplace_back(r, c);
    nz.emplace_back(M + r, N + c);
  }
  for (const auto& [r, c] : A_k_struct.nonzeros()) nz.emplace_back(r, N + c);
  return {2 * M, 2 * N, std::move(nz)};
}

StructuralVector AugmentedSystem::phi_rhs() const {
  StructuralVector out{2 * M, b_k_struct.nonzeros};
  for (std::size_t r : b_union.nonzeros) out.nonzeros.push_back(M + r);
  return out;
}

AugmentedSystem build_augmented(const MomentSystem& sys, std::size_t k) {
  if (k >= sys.parameters) {
    throw ValidationError("perturbed parameter index " + std::to_string(k) + " out of range (" +
                          std::to_string(sys.parameters) + " parameters)");
  }
  AugmentedSystem aug;
  aug.M = sys.rows();
  aug.N = sys.cols();
  aug.k = k;
  aug.union_A = StructuralMatrix(aug.M, aug.N);
  aug.b_union = StructuralVector{aug.M, {}};
  for (std::size_t j = 0; j < sys.slots(); ++j) {
    aug.union_A = aug.union_A | structure_of(sys.A[j]);
    aug.b_union = aug.b_union | structure_of(sys.b[j]);
  }
  aug.A_k_struct = structure_of(sys.A[k]);
  aug.b_k_struct = structure_of(sys.b[k]);
  for (Copy copy : {Copy::Derivative, Copy::Moment}) {
    for (const auto& beta : sys.basis) aug.var_labels.push_back({copy, beta});
    for (const auto& row : sys.equations) aug.row_labels.push_back({copy, row});
  }
  aug.numeric = sys;
  return aug;
}

RankReport structural_rank_check(const AugmentedSystem& aug, std::size_t samples, std::uint64_t seed) {
  RankReport report;
  report.rows = aug.M;
  report.structural_rank = max_matching(aug.union_A).pairs.size();
  report.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> num(1, 1000);
  std::uniform_int_distribution<long> den(1, 1000);
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<Rational> theta;
    for (std::size_t j = 0; j < aug.numeric.parameters; ++j) {
      Rational t(num(rng), den(rng));
      t.canonicalize();
      theta.push_back(t);
    }
    NumericSystem ns = assemble_numeric(aug.numeric, theta);
    if (structure_of(ns.matrix) != aug.union_A) ++report.cancellations;
    if (rank(to_dense(ns.matrix)) != aug.M) report.failing_theta.push_back(std::move(theta));
  }
  return report;
}

std::string to_matrix_market(const StructuralMatrix& s) {
  std::ostringstream os;
  os << "%%MatrixMarket matrix coordinate pattern general\n";
  os << s.rows() << ' ' << s.cols() << ' ' << s.nnz() << '\n';
  for (const auto& [r, c] : s.nonzeros()) os << r + 1 << ' ' << c + 1 << '\n';
  return os.str();
}

StructuralMatrix read_matrix_market(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) { return ParseError("Matrix Market line " + std::to_string(line_no) + ": " + what, line_no, 1); };

  if (!std::getline(in, line)) throw fail("empty input");
  ++line_no;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate") {
    throw fail("expected '%%MatrixMarket matrix coordinate ...' header");
  }
  if (symmetry != "general") throw fail("only 'general' symmetry is supported");
  const bool has_values = field != "pattern";

  std::size_t rows = 0, cols = 0, nnz = 0;
  bool have_size = false;
  std::vector<StructuralMatrix::Position> nz;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    if (!have_size) {
      if (!(ls >> rows >> cols >> nnz)) throw fail("bad size line");
      have_size = true;
      continue;
    }
    std::size_t r = 0, c = 0;
    if (!(ls >> r >> c) || r == 0 || c == 0 || r > rows || c > cols) throw fail("bad entry");
    if (has_values) {
      double v = 0;
      if (!(ls >> v)) throw fail("missing value");
      if (v == 0) continue;
    }
    nz.emplace_back(r - 1, c - 1);
  }
  if (!have_size) throw fail("missing size line");
  return {rows, cols, std::move(nz)};
}

}  // namespace mominv
