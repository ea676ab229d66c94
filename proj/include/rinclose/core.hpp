#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace rinclose {

using Index = std::uint32_t;

/// Strictly ascending list of row or column indices (0-based).
using IndexSet = std::vector<Index>;

/// Raised when input data cannot be interpreted (ragged rows, bad cells, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for inconsistent parameters (eps vector size, infeasible generator setup, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ColumnKind { continuous, discrete, ordinal, nominal };

inline const char* to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::continuous: return "continuous";
    case ColumnKind::discrete: return "discrete";
    case ColumnKind::ordinal: return "ordinal";
    case ColumnKind::nominal: return "nominal";
  }
  return "continuous";
}

inline std::optional<ColumnKind> column_kind_from_string(std::string_view s) {
  if (s == "continuous") return ColumnKind::continuous;
  if (s == "discrete" || s == "integer") return ColumnKind::discrete;
  if (s == "ordinal") return ColumnKind::ordinal;
  if (s == "nominal") return ColumnKind::nominal;
  return std::nullopt;
}

inline bool is_categorical(ColumnKind kind) {
  return kind == ColumnKind::ordinal || kind == ColumnKind::nominal;
}

/// Dense n x m matrix of doubles with a per-cell missing mask.
///
/// Storage is column-major: every enumeration primitive scans one column
/// over a row subset. Categorical columns hold 1-based integer codes whose
/// labels live in `levels(j)`.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows),
        cols_(cols),
        values_(rows * cols, fill),
        missing_(rows * cols, 0),
        kinds_(cols, ColumnKind::continuous),
        names_(cols),
        levels_(cols) {
    if (rows == 0 || cols == 0) throw ConfigError("matrix must have at least one row and one column");
    for (std::size_t j = 0; j < cols; ++j) names_[j] = "y" + std::to_string(j + 1);
  }

  /// Builds a matrix from row-major nested vectors; every row must have the same length.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) throw ConfigError("matrix must be non-empty");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols()) throw DataError("ragged row " + std::to_string(i));
      for (std::size_t j = 0; j < m.cols(); ++j) m.set(i, j, rows[i][j]);
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double value(std::size_t i, std::size_t j) const noexcept { return values_[j * rows_ + i]; }
  bool missing(std::size_t i, std::size_t j) const noexcept { return missing_[j * rows_ + i] != 0; }

  void set(std::size_t i, std::size_t j, double v) noexcept {
    values_[j * rows_ + i] = v;
    missing_[j * rows_ + i] = 0;
  }
  void set_missing(std::size_t i, std::size_t j) noexcept {
    values_[j * rows_ + i] = 0.0;
    missing_[j * rows_ + i] = 1;
  }

  std::span<const double> column(std::size_t j) const noexcept {
    return {values_.data() + j * rows_, rows_};
  }
  std::span<const std::uint8_t> missing_column(std::size_t j) const noexcept {
    return {missing_.data() + j * rows_, rows_};
  }

  ColumnKind kind(std::size_t j) const { return kinds_.at(j); }
  void set_kind(std::size_t j, ColumnKind k) { kinds_.at(j) = k; }

  const std::string& name(std::size_t j) const { return names_.at(j); }
  void set_name(std::size_t j, std::string n) { names_.at(j) = std::move(n); }

  /// Labels of a categorical column; code c maps to levels(j)[c - 1].
  const std::vector<std::string>& levels(std::size_t j) const { return levels_.at(j); }
  void set_levels(std::size_t j, std::vector<std::string> l) { levels_.at(j) = std::move(l); }

  bool has_missing() const noexcept {
    return std::any_of(missing_.begin(), missing_.end(), [](std::uint8_t b) { return b != 0; });
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
  std::vector<ColumnKind> kinds_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> levels_;
};

struct Bicluster {
  IndexSet rows;
  IndexSet cols;

  friend auto operator<=>(const Bicluster&, const Bicluster&) = default;
  friend bool operator==(const Bicluster&, const Bicluster&) = default;
};

enum class Variant { cvc3, cvcp, cvc_legacy };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::cvc3: return "cvc3";
    case Variant::cvcp: return "cvcp";
    case Variant::cvc_legacy: return "cvc_legacy";
  }
  return "cvc3";
}

struct EnumParams {
  std::size_t min_row = 1;
  std::size_t min_col = 1;
  /// Maximum perturbation per column; must have one entry per matrix column.
  std::vector<double> eps;
  /// Inherit size and canonicity failures across levels (PN set).
  bool pn_inheritance = true;
  /// Drop a node once its column count can no longer reach min_col.
  bool min_col_pruning = true;
  Variant variant = Variant::cvc3;
  /// Stop after this many biclusters; 0 means unbounded.
  std::size_t max_biclusters = 0;
  /// Wall-clock budget in seconds; 0 means unbounded.
  double time_limit_seconds = 0.0;

  static EnumParams uniform(std::size_t n_cols, double eps_all, std::size_t min_row = 1,
                            std::size_t min_col = 1) {
    EnumParams p;
    p.min_row = min_row;
    p.min_col = min_col;
    p.eps.assign(n_cols, eps_all);
    return p;
  }
};

/// Throws ConfigError unless `params` is usable on `mat`.
inline void validate(const Matrix& mat, const EnumParams& params) {
  if (params.min_row < 1) throw ConfigError("min_row must be >= 1");
  if (params.min_col < 1) throw ConfigError("min_col must be >= 1");
  if (params.eps.size() != mat.cols())
    throw ConfigError("eps has " + std::to_string(params.eps.size()) + " entries, matrix has " +
                      std::to_string(mat.cols()) + " columns");
  for (std::size_t j = 0; j < mat.cols(); ++j) {
    if (!(params.eps[j] >= 0.0)) throw ConfigError("eps for column " + std::to_string(j) + " is negative");
    if (mat.kind(j) == ColumnKind::nominal && params.eps[j] != 0.0)
      throw ConfigError("nominal column '" + mat.name(j) + "' requires eps = 0");
  }
}

/// Set of biclusters keyed by row-set, iterated in lexicographic row-set order.
///
/// Two maximal CVC biclusters never share a row-set, so inserting a second
/// bicluster with an existing row-set merges the column-sets instead of
/// adding an entry.
class BiclusterSolution {
 public:
  struct InsertResult {
    bool inserted;  // false when the row-set was already present
  };

  BiclusterSolution() = default;
  explicit BiclusterSolution(EnumParams params) : params_(std::move(params)) {}

  InsertResult insert(Bicluster bic) {
    auto [it, fresh] = by_rows_.try_emplace(std::move(bic.rows), bic.cols);
    if (!fresh) {
      IndexSet merged;
      std::set_union(it->second.begin(), it->second.end(), bic.cols.begin(), bic.cols.end(),
                     std::back_inserter(merged));
      it->second = std::move(merged);
    }
    return {fresh};
  }

  std::size_t size() const noexcept { return by_rows_.size(); }
  bool empty() const noexcept { return by_rows_.empty(); }
  bool contains(const Bicluster& b) const {
    auto it = by_rows_.find(b.rows);
    return it != by_rows_.end() && it->second == b.cols;
  }
  const IndexSet* columns_for(const IndexSet& rows) const {
    auto it = by_rows_.find(rows);
    return it == by_rows_.end() ? nullptr : &it->second;
  }

  std::vector<Bicluster> biclusters() const {
    std::vector<Bicluster> out;
    out.reserve(by_rows_.size());
    for (const auto& [rows, cols] : by_rows_) out.push_back({rows, cols});
    return out;
  }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& [rows, cols] : by_rows_) f(rows, cols);
  }

  const EnumParams& params() const noexcept { return params_; }
  void set_params(EnumParams p) { params_ = std::move(p); }

  /// Set equality of (row-set, column-set) pairs; params are not compared.
  friend bool operator==(const BiclusterSolution& a, const BiclusterSolution& b) {
    return a.by_rows_ == b.by_rows_;
  }

 private:
  std::map<IndexSet, IndexSet> by_rows_;
  EnumParams params_;
};

namespace detail {

inline void check_index(const Matrix& mat, std::span<const Index> rows, std::size_t j) {
  if (j >= mat.cols()) throw std::invalid_argument("column index " + std::to_string(j) + " out of range");
  for (Index i : rows)
    if (i >= mat.rows()) throw std::invalid_argument("row index " + std::to_string(i) + " out of range");
}

/// Residue of column j over `rows`, or nullopt on a missing cell. Stops early
/// once the spread exceeds `limit`, returning a value > limit.
inline std::optional<double> residue_bounded(const Matrix& mat, std::span<const Index> rows, std::size_t j,
                                             double limit) {
  auto col = mat.column(j);
  auto miss = mat.missing_column(j);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index i : rows) {
    if (miss[i]) return std::nullopt;
    lo = std::min(lo, col[i]);
    hi = std::max(hi, col[i]);
    if (hi - lo > limit) return hi - lo;
  }
  return rows.empty() ? 0.0 : hi - lo;
}

inline bool fits(const Matrix& mat, std::span<const Index> rows, std::size_t j, double eps) {
  auto r = residue_bounded(mat, rows, j, eps);
  return r && *r <= eps;
}

}  // namespace detail

/// max - min of column j over `rows`; nullopt when any of those cells is missing.
inline std::optional<double> column_residue(const Matrix& mat, std::span<const Index> rows, std::size_t j) {
  if (rows.empty()) throw std::invalid_argument("column_residue needs a non-empty row set");
  detail::check_index(mat, rows, j);
  return detail::residue_bounded(mat, rows, j, std::numeric_limits<double>::infinity());
}

/// Spread over the whole submatrix (constant-values criterion); nullopt on missing cells.
inline std::optional<double> block_residue(const Matrix& mat, std::span<const Index> rows,
                                           std::span<const Index> cols) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index j : cols) {
    detail::check_index(mat, rows, j);
    for (Index i : rows) {
      if (mat.missing(i, j)) return std::nullopt;
      lo = std::min(lo, mat.value(i, j));
      hi = std::max(hi, mat.value(i, j));
    }
  }
  return hi - lo;
}

inline bool is_correct(const Matrix& mat, const Bicluster& bic, std::span<const double> eps) {
  if (bic.rows.empty() || bic.cols.empty()) return false;
  for (Index j : bic.cols) {
    detail::check_index(mat, bic.rows, j);
    if (!detail::fits(mat, bic.rows, j, eps[j])) return false;
  }
  return true;
}

struct MaximalityCheck {
  enum class Reason { maximal, incorrect, row_addable, col_addable };
  Reason reason = Reason::maximal;
  /// Offending column (incorrect), addable row or addable column.
  Index witness = 0;

  bool maximal() const noexcept { return reason == Reason::maximal; }
  explicit operator bool() const noexcept { return maximal(); }
};

inline MaximalityCheck check_maximality(const Matrix& mat, const Bicluster& bic, std::span<const double> eps) {
  using R = MaximalityCheck::Reason;
  for (Index j : bic.cols) {
    detail::check_index(mat, bic.rows, j);
    if (!detail::fits(mat, bic.rows, j, eps[j])) return {R::incorrect, j};
  }
  if (bic.rows.empty() || bic.cols.empty()) return {R::incorrect, 0};

  IndexSet extended(bic.rows.size() + 1);
  for (Index x = 0; x < mat.rows(); ++x) {
    if (std::binary_search(bic.rows.begin(), bic.rows.end(), x)) continue;
    auto pos = std::lower_bound(bic.rows.begin(), bic.rows.end(), x);
    std::copy(bic.rows.begin(), pos, extended.begin());
    extended[pos - bic.rows.begin()] = x;
    std::copy(pos, bic.rows.end(), extended.begin() + (pos - bic.rows.begin()) + 1);
    bool ok = std::all_of(bic.cols.begin(), bic.cols.end(),
                          [&](Index j) { return detail::fits(mat, extended, j, eps[j]); });
    if (ok) return {R::row_addable, x};
  }
  for (Index y = 0; y < mat.cols(); ++y) {
    if (std::binary_search(bic.cols.begin(), bic.cols.end(), y)) continue;
    if (detail::fits(mat, bic.rows, y, eps[y])) return {R::col_addable, y};
  }
  return {};
}

inline bool is_maximal(const Matrix& mat, const Bicluster& bic, std::span<const double> eps) {
  return check_maximality(mat, bic, eps).maximal();
}

/// Number of distinct cells covered by the union of the biclusters.
template <class Range>
std::size_t coverage_of(const Range& biclusters) {
  std::unordered_set<std::uint64_t> cells;
  for (const Bicluster& b : biclusters)
    for (Index i : b.rows)
      for (Index j : b.cols) cells.insert((static_cast<std::uint64_t>(i) << 32) | j);
  return cells.size();
}

inline std::size_t coverage(const BiclusterSolution& sol) {
  std::unordered_set<std::uint64_t> cells;
  sol.for_each([&](const IndexSet& rows, const IndexSet& cols) {
    for (Index i : rows)
      for (Index j : cols) cells.insert((static_cast<std::uint64_t>(i) << 32) | j);
  });
  return cells.size();
}

}  // namespace rinclose
