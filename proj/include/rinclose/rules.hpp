#pragma once

#include <rinclose/core.hpp>

#include <cmath>
#include <cstdio>
#include <set>

namespace rinclose {

/// Feature matrix plus one class label per row (labels may be empty when unlabeled).
struct LabeledDataset {
  Matrix matrix;
  std::vector<std::string> labels;
  std::string label_name;

  /// Distinct labels in lexicographic order.
  std::vector<std::string> classes() const {
    std::vector<std::string> c = labels;
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
  }
};

/// One attribute and its domain of interest: an interval for numeric and
/// ordinal columns, a set of codes for nominal ones.
struct QuantItem {
  Index column = 0;
  bool is_set = false;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> values;  // sorted, used when is_set

  bool contains(double v) const {
    if (is_set) return std::binary_search(values.begin(), values.end(), v);
    return lo <= v && v <= hi;
  }

  auto operator<=>(const QuantItem&) const = default;
  bool operator==(const QuantItem&) const = default;
};

struct QuantItemset {
  std::vector<QuantItem> items;  // ascending column

  auto operator<=>(const QuantItemset&) const = default;
  bool operator==(const QuantItemset&) const = default;
};

struct RuleMetrics {
  double support = 0.0;
  double confidence = 0.0;
  double completeness = 0.0;
  double lift = 0.0;
  double leverage = 0.0;
  std::size_t antecedent_rows = 0;  // |I|
  std::size_t class_rows = 0;       // |C|
  std::size_t hits = 0;             // |I ∩ C|
};

struct QuantRule {
  QuantItemset antecedent;
  std::string label;
  RuleMetrics metrics;
  /// Rows of the bicluster the rule came from; metrics use the re-matched rows.
  std::size_t bicluster_rows = 0;
};

struct RuleThresholds {
  double conf_min = 0.95;
  double lift_dist_min = 0.2;
};

/// Quantitative itemset described by a bicluster: value range per numeric or
/// ordinal column, observed values per nominal column.
inline QuantItemset bicluster_to_itemset(const Matrix& mat, const Bicluster& bic) {
  if (bic.rows.empty()) throw std::invalid_argument("bicluster has no rows");
  QuantItemset set;
  for (Index j : bic.cols) {
    detail::check_index(mat, bic.rows, j);
    QuantItem item;
    item.column = j;
    item.lo = std::numeric_limits<double>::infinity();
    item.hi = -item.lo;
    for (Index i : bic.rows) {
      if (mat.missing(i, j)) throw DataError("bicluster covers a missing cell at row " + std::to_string(i));
      double v = mat.value(i, j);
      item.lo = std::min(item.lo, v);
      item.hi = std::max(item.hi, v);
      if (mat.kind(j) == ColumnKind::nominal) item.values.push_back(v);
    }
    if (mat.kind(j) == ColumnKind::nominal) {
      item.is_set = true;
      std::sort(item.values.begin(), item.values.end());
      item.values.erase(std::unique(item.values.begin(), item.values.end()), item.values.end());
      item.lo = item.hi = 0.0;
    }
    set.items.push_back(std::move(item));
  }
  return set;
}

/// Rows whose every itemset column is present and inside its domain.
inline IndexSet itemset_support_rows(const Matrix& mat, const QuantItemset& set) {
  IndexSet out;
  for (const auto& item : set.items)
    if (item.column >= mat.cols()) throw std::invalid_argument("itemset column out of range");
  for (std::size_t i = 0; i < mat.rows(); ++i) {
    bool ok = std::all_of(set.items.begin(), set.items.end(), [&](const QuantItem& item) {
      return !mat.missing(i, item.column) && item.contains(mat.value(i, item.column));
    });
    if (ok) out.push_back(static_cast<Index>(i));
  }
  return out;
}

inline IndexSet itemset_support_rows(const LabeledDataset& ds, const QuantItemset& set) {
  return itemset_support_rows(ds.matrix, set);
}

/// Metrics of `antecedent => label` given the rows matching the antecedent.
inline RuleMetrics score_rows(const LabeledDataset& ds, std::span<const Index> matched, const std::string& label) {
  const std::size_t n = ds.matrix.rows();
  if (ds.labels.size() != n) throw DataError("dataset has no label for every row");
  if (matched.empty()) throw std::domain_error("rule antecedent matches no row");
  RuleMetrics m;
  m.class_rows = static_cast<std::size_t>(std::count(ds.labels.begin(), ds.labels.end(), label));
  if (m.class_rows == 0) throw std::domain_error("class '" + label + "' does not occur");
  m.antecedent_rows = matched.size();
  for (Index i : matched) m.hits += ds.labels[i] == label;

  const double nn = static_cast<double>(n);
  const double class_freq = static_cast<double>(m.class_rows) / nn;
  const double ante_freq = static_cast<double>(m.antecedent_rows) / nn;
  m.support = static_cast<double>(m.hits) / nn;
  m.confidence = static_cast<double>(m.hits) / static_cast<double>(m.antecedent_rows);
  m.completeness = static_cast<double>(m.hits) / static_cast<double>(m.class_rows);
  m.lift = m.confidence / class_freq;
  m.leverage = m.support - ante_freq * class_freq;
  return m;
}

inline RuleMetrics score_rule(const LabeledDataset& ds, const QuantItemset& set, const std::string& label) {
  auto rows = itemset_support_rows(ds, set);
  return score_rows(ds, rows, label);
}

inline bool passes(const RuleMetrics& m, const RuleThresholds& t) {
  return m.confidence >= t.conf_min && std::abs(m.lift - 1.0) >= t.lift_dist_min;
}

/// QCARs from a bicluster solution over ds.matrix. Every bicluster is tried
/// against every class; kept rules are deduplicated on (itemset, label) and
/// ordered by label, then descending confidence, then descending support.
template <class Range>
std::vector<QuantRule> mine_qcars(const LabeledDataset& ds, const Range& biclusters, const RuleThresholds& t = {}) {
  const auto classes = ds.classes();
  std::vector<QuantRule> rules;
  std::set<std::pair<QuantItemset, std::string>> seen;
  for (const Bicluster& b : biclusters) {
    QuantItemset set = bicluster_to_itemset(ds.matrix, b);
    IndexSet matched = itemset_support_rows(ds, set);
    for (const std::string& c : classes) {
      RuleMetrics m = score_rows(ds, matched, c);
      if (!passes(m, t)) continue;
      if (!seen.emplace(set, c).second) continue;
      rules.push_back({set, c, m, b.rows.size()});
    }
  }
  std::stable_sort(rules.begin(), rules.end(), [](const QuantRule& a, const QuantRule& b) {
    if (a.label != b.label) return a.label < b.label;
    if (a.metrics.confidence != b.metrics.confidence) return a.metrics.confidence > b.metrics.confidence;
    return a.metrics.support > b.metrics.support;
  });
  return rules;
}

inline std::vector<QuantRule> mine_qcars(const LabeledDataset& ds, const BiclusterSolution& sol,
                                         const RuleThresholds& t = {}) {
  return mine_qcars(ds, sol.biclusters(), t);
}

/// Percentage of rows matched by at least one rule antecedent.
inline double row_coverage(const LabeledDataset& ds, std::span<const QuantRule> rules) {
  const std::size_t n = ds.matrix.rows();
  if (n == 0) return 0.0;
  std::vector<std::uint8_t> hit(n, 0);
  for (const QuantRule& r : rules)
    for (Index i : itemset_support_rows(ds, r.antecedent)) hit[i] = 1;
  return 100.0 * static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string integer_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.0f", v);
  return buf;
}

inline std::string level_text(const Matrix& mat, Index j, double code) {
  const auto& levels = mat.levels(j);
  auto c = static_cast<long long>(std::llround(code));
  if (c >= 1 && static_cast<std::size_t>(c) <= levels.size()) return levels[c - 1];
  return integer_text(code);
}

}  // namespace detail

/// "Sex{M}", "SocialClass{B,C}", "Height[1.54,1.62]", "Age[30,41]".
inline std::string format_item(const Matrix& mat, const QuantItem& item) {
  const Index j = item.column;
  std::string out = mat.name(j);
  if (item.is_set) {
    out += '{';
    for (std::size_t k = 0; k < item.values.size(); ++k) {
      if (k) out += ',';
      out += detail::level_text(mat, j, item.values[k]);
    }
    return out + '}';
  }
  if (mat.kind(j) == ColumnKind::ordinal) {
    out += '{';
    for (double c = std::round(item.lo); c <= item.hi; c += 1.0) {
      if (c != std::round(item.lo)) out += ',';
      out += detail::level_text(mat, j, c);
    }
    return out + '}';
  }
  if (mat.kind(j) == ColumnKind::discrete)
    return out + '[' + detail::integer_text(item.lo) + ',' + detail::integer_text(item.hi) + ']';
  return out + '[' + detail::fixed2(item.lo) + ',' + detail::fixed2(item.hi) + ']';
}

inline std::string format_itemset(const Matrix& mat, const QuantItemset& set) {
  std::string out;
  for (std::size_t k = 0; k < set.items.size(); ++k) {
    if (k) out += ", ";
    out += format_item(mat, set.items[k]);
  }
  return out;
}

inline std::string format_rule(const Matrix& mat, const QuantRule& r) {
  return format_itemset(mat, r.antecedent) + " => " + r.label;
}

}  // namespace rinclose
