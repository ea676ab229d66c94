#pragma once

#include <rinclose/core.hpp>

namespace rinclose {

inline constexpr std::size_t kDefaultOracleRowCap = 16;

/// All maximal CVC biclusters by sweeping every row subset.
///
/// For each subset I the column closure J(I) is taken; (I, J(I)) is kept
/// when it is large enough and no outside row fits every column of J(I).
/// Cost is 2^n * n * m, so n is capped.
inline BiclusterSolution brute_force(const Matrix& mat, const EnumParams& params,
                                     std::size_t max_rows = kDefaultOracleRowCap) {
  validate(mat, params);
  const std::size_t n = mat.rows();
  const std::size_t m = mat.cols();
  if (n > max_rows || n >= 63)
    throw ConfigError("brute_force is limited to " + std::to_string(max_rows) + " rows, matrix has " +
                      std::to_string(n));

  BiclusterSolution out(params);
  IndexSet rows, cols, ext;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) < params.min_row) continue;
    rows.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) rows.push_back(static_cast<Index>(i));

    cols.clear();
    for (std::size_t j = 0; j < m; ++j)
      if (detail::fits(mat, rows, j, params.eps[j])) cols.push_back(static_cast<Index>(j));
    if (cols.empty() || cols.size() < params.min_col) continue;

    bool extendable = false;
    for (std::size_t x = 0; x < n && !extendable; ++x) {
      if (mask >> x & 1) continue;
      ext = rows;
      ext.insert(std::lower_bound(ext.begin(), ext.end(), static_cast<Index>(x)), static_cast<Index>(x));
      extendable = std::all_of(cols.begin(), cols.end(),
                               [&](Index j) { return detail::fits(mat, ext, j, params.eps[j]); });
    }
    if (!extendable) out.insert({rows, cols});
  }
  return out;
}

struct VerificationReport {
  struct Incorrect {
    Bicluster bicluster;
    Index column;  // first column that breaks the perturbation bound
  };
  struct NonMaximal {
    Bicluster bicluster;
    bool by_row;    // false: a column can be added
    Index witness;  // the addable row or column
  };

  std::size_t correct_count = 0;
  std::vector<Incorrect> incorrect;
  std::vector<NonMaximal> non_maximal;
  std::vector<IndexSet> duplicate_rowsets;
  bool oracle_run = false;
  std::vector<Bicluster> missing_from_solution;
  std::vector<Bicluster> extra_in_solution;

  bool passes() const noexcept {
    return incorrect.empty() && non_maximal.empty() && duplicate_rowsets.empty() && missing_from_solution.empty() &&
           extra_in_solution.empty();
  }
};

/// Checks correctness, maximality and distinct row-sets of every bicluster;
/// with `run_oracle` (and n within the cap) also diffs against brute_force.
inline VerificationReport verify(const Matrix& mat, std::span<const Bicluster> biclusters, const EnumParams& params,
                                 bool run_oracle, std::size_t max_rows = kDefaultOracleRowCap) {
  using R = MaximalityCheck::Reason;
  VerificationReport report;

  for (const Bicluster& b : biclusters) {
    auto check = check_maximality(mat, b, params.eps);
    switch (check.reason) {
      case R::incorrect:
        report.incorrect.push_back({b, check.witness});
        break;
      case R::row_addable:
        ++report.correct_count;
        report.non_maximal.push_back({b, true, check.witness});
        break;
      case R::col_addable:
        ++report.correct_count;
        report.non_maximal.push_back({b, false, check.witness});
        break;
      case R::maximal:
        ++report.correct_count;
        break;
    }
  }

  std::vector<const IndexSet*> keys;
  keys.reserve(biclusters.size());
  for (const Bicluster& b : biclusters) keys.push_back(&b.rows);
  std::sort(keys.begin(), keys.end(), [](const IndexSet* a, const IndexSet* b) { return *a < *b; });
  for (std::size_t p = 1; p < keys.size(); ++p)
    if (*keys[p] == *keys[p - 1] && (report.duplicate_rowsets.empty() || report.duplicate_rowsets.back() != *keys[p]))
      report.duplicate_rowsets.push_back(*keys[p]);

  if (run_oracle && mat.rows() <= max_rows) {
    report.oracle_run = true;
    BiclusterSolution expected = brute_force(mat, params, max_rows);
    std::vector<Bicluster> got(biclusters.begin(), biclusters.end());
    std::sort(got.begin(), got.end());
    got.erase(std::unique(got.begin(), got.end()), got.end());
    std::vector<Bicluster> want = expected.biclusters();
    std::set_difference(want.begin(), want.end(), got.begin(), got.end(),
                        std::back_inserter(report.missing_from_solution));
    std::set_difference(got.begin(), got.end(), want.begin(), want.end(),
                        std::back_inserter(report.extra_in_solution));
  }
  return report;
}

inline VerificationReport verify(const Matrix& mat, const BiclusterSolution& sol, const EnumParams& params,
                                 bool run_oracle, std::size_t max_rows = kDefaultOracleRowCap) {
  auto all = sol.biclusters();
  return verify(mat, all, params, run_oracle, max_rows);
}

}  // namespace rinclose
