#pragma once

#include <rinclose/core.hpp>

#include <chrono>
#include <functional>
#include <unordered_set>

namespace rinclose {

/// Counters gathered during one enumeration run.
struct EnumStats {
  std::size_t bicluster_count = 0;
  std::size_t recursive_calls = 0;
  std::size_t canonicity_tests = 0;
  std::size_t canonicity_failures = 0;
  std::size_t row_canonicity_failures = 0;
  /// Most child candidates waiting in queues at any one time.
  std::size_t peak_queue_depth = 0;
  std::size_t symbol_table_entries = 0;
  /// High-water mark of the bytes held by pending nodes, Gamma/PN sets and the symbol table.
  std::size_t peak_tracked_bytes = 0;
  /// Set when max_biclusters or the time budget stopped the run early.
  bool truncated = false;
  double seconds = 0.0;
};

struct EnumResult {
  BiclusterSolution solution;
  EnumStats stats;
};

// ---------------------------------------------------------------------------
// Shared primitives
// ---------------------------------------------------------------------------

/// Maximal subsets of `rows` whose values in column j span at most eps_j.
///
/// Rows with a missing cell in column j are dropped first. The remaining
/// values are sorted (ties by row index) and scanned for maximal windows.
/// Each returned set is sorted ascending; order follows the window start.
inline std::vector<IndexSet> candidate_row_sets(const Matrix& mat, std::span<const Index> rows, std::size_t j,
                                                double eps_j) {
  auto col = mat.column(j);
  auto miss = mat.missing_column(j);
  std::vector<std::pair<double, Index>> sorted;
  sorted.reserve(rows.size());
  for (Index i : rows)
    if (!miss[i]) sorted.emplace_back(col[i], i);
  std::sort(sorted.begin(), sorted.end());

  std::vector<IndexSet> out;
  std::size_t prev_end = 0;  // one past the end of the previous window
  std::size_t end = 0;
  for (std::size_t start = 0; start < sorted.size(); ++start) {
    if (end < start) end = start;
    while (end < sorted.size() && sorted[end].first - sorted[start].first <= eps_j) ++end;
    if (end > prev_end) {
      IndexSet g;
      g.reserve(end - start);
      for (std::size_t p = start; p < end; ++p) g.push_back(sorted[p].second);
      std::sort(g.begin(), g.end());
      out.push_back(std::move(g));
      prev_end = end;
    }
  }
  return out;
}

struct ColumnCanonicity {
  /// Smallest earlier column that could be added to the candidate, if any.
  std::optional<Index> failed_at;
  bool canonical() const noexcept { return !failed_at; }
};

struct RowCanonicity {
  enum class Outcome { ok, rejected_part1, rejected_part2 };
  Outcome outcome = Outcome::ok;
  Index row = 0;  // the rejecting row from Gamma
  bool ok() const noexcept { return outcome == Outcome::ok; }
};

namespace detail {

inline std::vector<std::uint8_t> to_mask(std::span<const Index> set, std::size_t n) {
  std::vector<std::uint8_t> mask(n, 0);
  for (Index x : set) mask.at(x) = 1;
  return mask;
}

inline std::optional<Index> first_fitting_earlier_column(const Matrix& mat, std::span<const Index> g,
                                                         std::span<const std::uint8_t> in_intent, std::size_t j,
                                                         std::span<const double> eps) {
  for (std::size_t k = 0; k < j; ++k) {
    if (in_intent[k]) continue;
    if (fits(mat, g, k, eps[k])) return static_cast<Index>(k);
  }
  return std::nullopt;
}

/// Prefix min/max of a parent's rows (ascending) per intent column, built on demand.
class PrefixBounds {
 public:
  PrefixBounds(const Matrix& mat, std::span<const Index> parent_rows)
      : mat_(&mat), rows_(parent_rows), cache_(mat.cols()) {}

  /// Bounds over the first `count` parent rows in column k.
  std::pair<double, double> bounds(std::size_t k, std::size_t count) {
    auto& c = cache_[k];
    if (c.empty()) {
      c.resize(rows_.size() + 1);
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      c[0] = {lo, hi};
      auto col = mat_->column(k);
      for (std::size_t p = 0; p < rows_.size(); ++p) {
        lo = std::min(lo, col[rows_[p]]);
        hi = std::max(hi, col[rows_[p]]);
        c[p + 1] = {lo, hi};
      }
    }
    return c[count];
  }

 private:
  const Matrix* mat_;
  std::span<const Index> rows_;
  std::vector<std::vector<std::pair<double, double>>> cache_;
};

inline RowCanonicity row_canonicity_impl(const Matrix& mat, std::span<const Index> g_rows,
                                         std::span<const Index> gamma, std::span<const Index> parent_rows,
                                         std::span<const std::uint8_t> in_intent, std::size_t j,
                                         std::span<const double> eps, PrefixBounds& prefix) {
  using O = RowCanonicity::Outcome;
  if (gamma.empty()) return {};

  // Columns of the intent before j, then j itself.
  std::vector<Index> head;
  for (std::size_t k = 0; k < j; ++k)
    if (in_intent[k]) head.push_back(static_cast<Index>(k));
  head.push_back(static_cast<Index>(j));

  std::vector<std::pair<double, double>> g_bounds(head.size());
  for (std::size_t h = 0; h < head.size(); ++h) {
    auto col = mat.column(head[h]);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Index i : g_rows) {
      lo = std::min(lo, col[i]);
      hi = std::max(hi, col[i]);
    }
    g_bounds[h] = {lo, hi};
  }

  for (Index g : gamma) {
    bool extends = true;
    for (std::size_t h = 0; h < head.size() && extends; ++h) {
      Index k = head[h];
      if (mat.missing(g, k)) {
        extends = false;
        break;
      }
      double a = mat.value(g, k);
      extends = std::max(g_bounds[h].second, a) - std::min(g_bounds[h].first, a) <= eps[k];
    }
    if (extends) return {O::rejected_part1, g};
  }

  const std::size_t n_before = head.size() - 1;
  if (n_before == 0) return {};
  for (Index g : gamma) {
    std::size_t count = std::lower_bound(parent_rows.begin(), parent_rows.end(), g) - parent_rows.begin();
    bool smaller_parent = true;
    for (std::size_t h = 0; h < n_before && smaller_parent; ++h) {
      Index k = head[h];
      if (mat.missing(g, k)) {
        smaller_parent = false;
        break;
      }
      double a = mat.value(g, k);
      auto [plo, phi] = prefix.bounds(k, count);
      double lo = std::min({plo, g_bounds[h].first, a});
      double hi = std::max({phi, g_bounds[h].second, a});
      smaller_parent = hi - lo <= eps[k];
    }
    if (smaller_parent) return {O::rejected_part2, g};
  }
  return {};
}

}  // namespace detail

/// Column-canonicity: the candidate fails at the smallest k < j outside the
/// current intent whose column can be added to the candidate rows.
inline ColumnCanonicity column_canonicity(const Matrix& mat, std::span<const Index> g_rows,
                                          std::span<const Index> intent, std::size_t j, std::span<const double> eps) {
  auto mask = detail::to_mask(intent, mat.cols());
  return {detail::first_fitting_earlier_column(mat, g_rows, mask, j, eps)};
}

/// Row-canonicity of candidate `g_rows` created at column j by the node
/// (parent_rows, intent). Part 1 rejects when a Gamma row extends the
/// candidate over the intent columns before j plus j; part 2 rejects when a
/// Gamma row g gives a lexicographically smaller parent, i.e. when
/// parent rows below g, g itself and the candidate agree on the intent before j.
inline RowCanonicity row_canonicity(const Matrix& mat, std::span<const Index> g_rows, std::span<const Index> gamma,
                                    std::span<const Index> parent_rows, std::span<const Index> intent, std::size_t j,
                                    std::span<const double> eps) {
  auto mask = detail::to_mask(intent, mat.cols());
  detail::PrefixBounds prefix(mat, parent_rows);
  return detail::row_canonicity_impl(mat, g_rows, gamma, parent_rows, mask, j, eps, prefix);
}

/// Rows a child created at column j must check for row-canonicity.
///
/// The pivots are the min_row-th smallest (p1) and largest (p2) values of the
/// child in column j. Any descendant keeps at least min_row of those rows, so
/// only a row whose value lies in [p1 - eps_j, p2 + eps_j] can ever extend it.
/// Those rows of parent_rows \ g_rows join the inherited set.
inline IndexSet compute_gamma(const Matrix& mat, std::span<const Index> g_rows, std::size_t j,
                              std::span<const Index> parent_gamma, std::span<const Index> parent_rows,
                              std::size_t min_row, double eps_j) {
  if (g_rows.empty() || min_row == 0 || g_rows.size() < min_row)
    throw std::invalid_argument("compute_gamma needs |G| >= min_row >= 1");
  auto col = mat.column(j);
  auto miss = mat.missing_column(j);
  std::vector<double> vals;
  vals.reserve(g_rows.size());
  for (Index i : g_rows) vals.push_back(col[i]);
  std::sort(vals.begin(), vals.end());
  const double p1 = vals[min_row - 1];
  const double p2 = vals[vals.size() - min_row];

  IndexSet fresh;
  auto git = g_rows.begin();
  for (Index i : parent_rows) {
    while (git != g_rows.end() && *git < i) ++git;
    if (git != g_rows.end() && *git == i) continue;
    if (miss[i]) continue;
    double a = col[i];
    if (p1 - a <= eps_j && a - p2 <= eps_j) fresh.push_back(i);
  }
  IndexSet out;
  out.reserve(parent_gamma.size() + fresh.size());
  std::set_union(parent_gamma.begin(), parent_gamma.end(), fresh.begin(), fresh.end(), std::back_inserter(out));
  return out;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

namespace detail {

struct IndexSetHash {
  std::size_t operator()(const IndexSet& s) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (Index x : s) h = (h ^ x) * 1099511628211ull;
    return h;
  }
};

inline std::size_t bytes_of(const IndexSet& s) { return sizeof(IndexSet) + s.capacity() * sizeof(Index); }

/// Depth-first closure engine shared by the three variants.
///
/// Each node closes its intent over columns start..m-1, queues canonical
/// children in column order, emits itself, then its children are closed in
/// FIFO order. The recursion is kept on an explicit stack of frames.
template <class Sink>
class Engine {
 public:
  Engine(const Matrix& mat, const EnumParams& params, Sink& sink)
      : mat_(mat), p_(params), sink_(sink), m_(mat.cols()), started_(std::chrono::steady_clock::now()) {
    if (p_.variant == Variant::cvcp) p_.eps.assign(m_, 0.0);
    use_pn_ = p_.pn_inheritance && p_.variant != Variant::cvc_legacy;
  }

  EnumStats run() {
    IndexSet all(mat_.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);
    std::vector<std::uint8_t> intent(m_, 0), pn(m_, 0);
    close_node(std::move(all), std::move(intent), 0, 0, IndexSet{}, std::move(pn));

    while (!stack_.empty() && !stop_) {
      Frame& top = stack_.back();
      if (top.next == top.children.size()) {
        release(top.bytes);
        stack_.pop_back();
        continue;
      }
      Child child = std::move(top.children[top.next++]);
      --queued_;
      std::vector<std::uint8_t> intent = top.in_intent;
      std::size_t intent_size = top.intent_size;
      if (!intent[child.col]) {
        intent[child.col] = 1;
        ++intent_size;
      }
      std::vector<std::uint8_t> pn = top.pn;
      std::size_t child_bytes = bytes_of(child.rows) + bytes_of(child.gamma);
      release(child_bytes);
      close_node(std::move(child.rows), std::move(intent), intent_size, child.col + 1, std::move(child.gamma),
                 std::move(pn));
    }
    stats_.symbol_table_entries = table_.size();
    stats_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    return stats_;
  }

 private:
  struct Child {
    IndexSet rows;
    Index col;
    IndexSet gamma;
  };
  struct Frame {
    std::vector<std::uint8_t> in_intent;
    std::size_t intent_size = 0;
    std::vector<std::uint8_t> pn;
    std::vector<Child> children;
    std::size_t next = 0;
    std::size_t bytes = 0;
  };

  void hold(std::size_t b) {
    live_bytes_ += b;
    stats_.peak_tracked_bytes = std::max(stats_.peak_tracked_bytes, live_bytes_);
  }
  void release(std::size_t b) { live_bytes_ -= std::min(b, live_bytes_); }

  bool out_of_budget() {
    if (p_.max_biclusters && stats_.bicluster_count >= p_.max_biclusters) return true;
    if (p_.time_limit_seconds > 0 && (stats_.recursive_calls & 63) == 0) {
      double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
      if (s > p_.time_limit_seconds) return true;
    }
    return false;
  }

  void close_node(IndexSet rows, std::vector<std::uint8_t> in_intent, std::size_t intent_size, std::size_t start,
                  IndexSet gamma, std::vector<std::uint8_t> pn) {
    ++stats_.recursive_calls;
    if (out_of_budget()) {
      stop_ = true;
      stats_.truncated = true;
      return;
    }

    std::size_t remaining = 0;
    for (std::size_t c = start; c < m_; ++c) remaining += !in_intent[c];
    if (p_.min_col_pruning && intent_size + remaining < p_.min_col) return;

    PrefixBounds prefix(mat_, rows);
    std::vector<Child> children;
    std::size_t children_bytes = 0;
    bool stopped = false;

    for (std::size_t j = start; j < m_; ++j) {
      if (in_intent[j]) continue;
      if (p_.min_col_pruning && intent_size + remaining < p_.min_col) {
        stopped = true;
        break;
      }
      --remaining;
      if (pn[j]) continue;
      if (fits(mat_, rows, j, p_.eps[j])) {
        in_intent[j] = 1;
        ++intent_size;
        continue;
      }

      bool none_big_enough = true;   // a1
      bool none_canonical = true;    // a2
      bool failed_below_start = false;  // a3
      for (IndexSet& g : candidate_row_sets(mat_, rows, j, p_.eps[j])) {
        if (g.size() < p_.min_row) continue;
        none_big_enough = false;

        if (p_.variant == Variant::cvc_legacy && table_.count(g)) continue;

        ++stats_.canonicity_tests;
        auto k = first_fitting_earlier_column(mat_, g, in_intent, j, p_.eps);
        if (k) {
          ++stats_.canonicity_failures;
          if (*k >= start)
            none_canonical = false;
          else
            failed_below_start = true;
          continue;
        }
        none_canonical = false;

        IndexSet child_gamma;
        switch (p_.variant) {
          case Variant::cvcp:
            break;
          case Variant::cvc3: {
            auto rc = row_canonicity_impl(mat_, g, gamma, rows, in_intent, j, p_.eps, prefix);
            if (!rc.ok()) {
              ++stats_.row_canonicity_failures;
              continue;
            }
            child_gamma = compute_gamma(mat_, g, j, gamma, rows, p_.min_row, p_.eps[j]);
            break;
          }
          case Variant::cvc_legacy: {
            if (!row_maximal_legacy(g, gamma, in_intent, j)) {
              ++stats_.row_canonicity_failures;
              continue;
            }
            std::size_t entry = bytes_of(g) + 32;
            table_.insert(g);
            hold(entry);
            child_gamma = compute_gamma(mat_, g, j, gamma, rows, p_.min_row, p_.eps[j]);
            break;
          }
        }
        std::size_t b = bytes_of(g) + bytes_of(child_gamma);
        children_bytes += b;
        hold(b);
        ++queued_;
        stats_.peak_queue_depth = std::max(stats_.peak_queue_depth, queued_);
        children.push_back({std::move(g), static_cast<Index>(j), std::move(child_gamma)});
      }
      if (use_pn_ && (none_big_enough || (none_canonical && failed_below_start))) pn[j] = 1;
    }

    if (!stopped && rows.size() >= p_.min_row && intent_size >= p_.min_col) {
      IndexSet cols;
      cols.reserve(intent_size);
      for (std::size_t c = 0; c < m_; ++c)
        if (in_intent[c]) cols.push_back(static_cast<Index>(c));
      ++stats_.bicluster_count;
      sink_(rows, cols);
    }

    if (children.empty()) return;
    Frame f;
    f.bytes = 2 * m_ + sizeof(Frame);
    f.in_intent = std::move(in_intent);
    f.intent_size = intent_size;
    f.pn = std::move(pn);
    f.children = std::move(children);
    hold(f.bytes);
    (void)children_bytes;
    stack_.push_back(std::move(f));
  }

  // Row-maximality over Gamma against the current intent plus j.
  bool row_maximal_legacy(const IndexSet& g, const IndexSet& gamma, const std::vector<std::uint8_t>& in_intent,
                          std::size_t j) {
    if (gamma.empty()) return true;
    IndexSet ext(g.size() + 1);
    for (Index x : gamma) {
      auto pos = std::lower_bound(g.begin(), g.end(), x);
      std::copy(g.begin(), pos, ext.begin());
      ext[pos - g.begin()] = x;
      std::copy(pos, g.end(), ext.begin() + (pos - g.begin()) + 1);
      bool extends = fits(mat_, ext, j, p_.eps[j]);
      for (std::size_t k = 0; k < m_ && extends; ++k)
        if (in_intent[k]) extends = fits(mat_, ext, k, p_.eps[k]);
      if (extends) return false;
    }
    return true;
  }

  const Matrix& mat_;
  EnumParams p_;
  Sink& sink_;
  std::size_t m_;
  bool use_pn_ = true;
  bool stop_ = false;
  std::chrono::steady_clock::time_point started_;
  std::vector<Frame> stack_;
  std::unordered_set<IndexSet, IndexSetHash> table_;
  std::size_t queued_ = 0;
  std::size_t live_bytes_ = 0;
  EnumStats stats_;
};

}  // namespace detail

/// Runs the enumeration selected by params.variant, calling
/// `sink(rows, cols)` once per emitted bicluster.
template <class Sink>
EnumStats enumerate_into(const Matrix& mat, const EnumParams& params, Sink&& sink) {
  EnumParams p = params;
  if (p.variant == Variant::cvcp) p.eps.assign(mat.cols(), 0.0);
  validate(mat, p);
  auto& s = sink;
  detail::Engine<std::remove_reference_t<Sink>> engine(mat, p, s);
  return engine.run();
}

inline EnumResult enumerate(const Matrix& mat, const EnumParams& params) {
  EnumResult result{BiclusterSolution(params), {}};
  result.stats = enumerate_into(mat, params, [&](const IndexSet& rows, const IndexSet& cols) {
    result.solution.insert({rows, cols});
  });
  return result;
}

/// Online-partitioning enumeration with row-canonicity (no symbol table).
inline EnumResult enumerate_cvc3(const Matrix& mat, EnumParams params) {
  params.variant = Variant::cvc3;
  return enumerate(mat, params);
}

/// Perfect biclusters (eps = 0 everywhere): candidates are groups of equal values.
inline EnumResult enumerate_cvcp(const Matrix& mat, EnumParams params) {
  params.variant = Variant::cvcp;
  params.eps.assign(mat.cols(), 0.0);
  return enumerate(mat, params);
}

/// Symbol-table variant: duplicates are filtered by a set of emitted row-sets.
inline EnumResult enumerate_cvc_legacy(const Matrix& mat, EnumParams params) {
  params.variant = Variant::cvc_legacy;
  return enumerate(mat, params);
}

}  // namespace rinclose
