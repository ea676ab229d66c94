#pragma once

#include <rinclose/enumerator.hpp>
#include <rinclose/preprocess.hpp>

namespace rinclose {

/// A priori partitioning versus online partitioning on the same data.
struct CompareReport {
  BinningSpec binning;
  std::vector<double> eps;  // online eps, one per column
  BiclusterSolution apriori;
  BiclusterSolution online;
  EnumStats apriori_stats;
  EnumStats online_stats;
  std::size_t apriori_coverage = 0;
  std::size_t online_coverage = 0;
  /// A priori biclusters that are a sub-bicluster of some online bicluster.
  std::size_t contained = 0;
  /// A priori biclusters that appear unchanged in the online solution.
  std::size_t already_maximal = 0;
  /// Online biclusters that contain no a priori bicluster.
  std::size_t missed = 0;
  std::vector<Bicluster> not_contained;

  bool full_containment() const noexcept { return not_contained.empty(); }
};

namespace detail {

inline bool sub_bicluster(const Bicluster& a, const Bicluster& b) {
  return std::includes(b.rows.begin(), b.rows.end(), a.rows.begin(), a.rows.end()) &&
         std::includes(b.cols.begin(), b.cols.end(), a.cols.begin(), a.cols.end());
}

}  // namespace detail

/// Pipeline A bins the matrix with `rule` and mines perfect biclusters of the
/// partition; pipeline B mines the raw matrix with eps equal to each bin width
/// (0 for categorical columns). Biclusters of A keep their row and column
/// indices, so they are compared with B directly. min_row, min_col and the
/// budget fields come from `params`; its eps is ignored.
inline CompareReport run_compare(const Matrix& mat, const BinningRule& rule, const EnumParams& params) {
  CompareReport rep;
  rep.binning = fit_binning(mat, rule);
  rep.eps = eps_from_binning(rep.binning);
  Matrix part = partition(mat, rep.binning);

  EnumParams pa = params;
  pa.eps.assign(mat.cols(), 0.0);
  auto a = enumerate_cvcp(part, pa);
  EnumParams pb = params;
  pb.eps = rep.eps;
  auto b = enumerate_cvc3(mat, pb);

  rep.apriori = std::move(a.solution);
  rep.apriori_stats = a.stats;
  rep.online = std::move(b.solution);
  rep.online_stats = b.stats;
  rep.apriori_coverage = coverage(rep.apriori);
  rep.online_coverage = coverage(rep.online);

  const auto as = rep.apriori.biclusters();
  const auto bs = rep.online.biclusters();
  for (const Bicluster& x : as) {
    if (rep.online.contains(x)) ++rep.already_maximal;
    bool inside = std::any_of(bs.begin(), bs.end(), [&](const Bicluster& y) { return detail::sub_bicluster(x, y); });
    if (inside)
      ++rep.contained;
    else
      rep.not_contained.push_back(x);
  }
  for (const Bicluster& y : bs)
    if (std::none_of(as.begin(), as.end(), [&](const Bicluster& x) { return detail::sub_bicluster(x, y); }))
      ++rep.missed;
  return rep;
}

}  // namespace rinclose
