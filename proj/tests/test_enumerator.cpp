#include "support.hpp"

#include <rinclose/enumerator.hpp>
#include <rinclose/oracle.hpp>

#include <gtest/gtest.h>

using namespace rinclose;
using testing_support::collect;
using testing_support::two_parent_matrix;
using testing_support::idx;

namespace {

Matrix b1a() { return testing_support::load_matrix("appendix_b/b1a.csv"); }

EnumParams b1a_params() { return EnumParams::uniform(4, 5.0, 2, 1); }

BiclusterSolution two_parent_expected() {
  BiclusterSolution s;
  s.insert({idx({1, 2, 3, 4, 5}), idx({1})});
  s.insert({idx({3, 4, 5, 6, 7}), idx({1})});
  s.insert({idx({3, 4, 5}), idx({1, 2})});
  s.insert({idx({1, 7}), idx({2})});
  s.insert({idx({2, 6}), idx({2})});
  return s;
}

}  // namespace

TEST(CandidateRowSets, FixtureColumnOne) {
  auto m = b1a();
  auto c = candidate_row_sets(m, idx({1, 2, 3, 4, 5, 6, 7, 8}), 0, 5.0);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0], idx({3, 6, 7}));
  EXPECT_EQ(c[1], idx({5, 7, 8}));
  EXPECT_EQ(c[2], idx({1, 2, 4, 5, 8}));
}

TEST(CandidateRowSets, ConstantAndMissingColumns) {
  Matrix m(4, 2, 2.5);
  for (std::size_t i = 0; i < 4; ++i) m.set_missing(i, 1);
  auto all = idx({1, 2, 3, 4});
  auto c = candidate_row_sets(m, all, 0, 0.0);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0], all);
  EXPECT_TRUE(candidate_row_sets(m, all, 1, 10.0).empty());
}

TEST(CandidateRowSets, WindowsAreMaximalAndDistinct) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> val(0, 12);
  for (int t = 0; t < 200; ++t) {
    Matrix m(9, 1);
    for (std::size_t i = 0; i < 9; ++i) {
      if (rng() % 7 == 0)
        m.set_missing(i, 0);
      else
        m.set(i, 0, val(rng));
    }
    IndexSet rows;
    for (Index i = 0; i < 9; ++i)
      if (rng() % 3) rows.push_back(i);
    if (rows.empty()) continue;
    const double eps = static_cast<double>(rng() % 4);
    auto cands = candidate_row_sets(m, rows, 0, eps);

    // Independent check: every fitting subset that cannot grow within rows.
    std::set<IndexSet> expected;
    for (Index a : rows) {
      if (m.missing(a, 0)) continue;
      IndexSet window;
      for (Index i : rows)
        if (!m.missing(i, 0) && m.value(i, 0) >= m.value(a, 0) && m.value(i, 0) <= m.value(a, 0) + eps)
          window.push_back(i);
      bool grows = false;
      for (Index x : rows)
        if (!m.missing(x, 0) && !std::binary_search(window.begin(), window.end(), x)) {
          IndexSet w2 = window;
          w2.insert(std::lower_bound(w2.begin(), w2.end(), x), x);
          if (*column_residue(m, w2, 0) <= eps) grows = true;
        }
      if (!grows) expected.insert(window);
    }
    std::set<IndexSet> got(cands.begin(), cands.end());
    EXPECT_EQ(got.size(), cands.size());
    EXPECT_EQ(got, expected);
  }
}

TEST(ColumnCanonicityTest, Examples) {
  auto m = b1a();
  std::vector<double> eps(4, 5.0);
  EXPECT_TRUE(column_canonicity(m, idx({3, 6, 7}), IndexSet{}, 0, eps).canonical());
  auto r = column_canonicity(m, idx({5, 7, 8}), IndexSet{}, 2, eps);
  ASSERT_FALSE(r.canonical());
  EXPECT_EQ(*r.failed_at, 0u);
  // Column 1 already in the intent: the next fitting earlier column is reported.
  auto r2 = column_canonicity(m, idx({5, 7}), idx({1}), 3, eps);
  ASSERT_FALSE(r2.canonical());
  EXPECT_EQ(*r2.failed_at, 1u);
}

TEST(ColumnCanonicityTest, MissingEarlierColumnsAreCanonical) {
  Matrix m(3, 3, 1.0);
  m.set_missing(0, 0);
  m.set_missing(1, 1);
  std::vector<double> eps(3, 10.0);
  EXPECT_TRUE(column_canonicity(m, idx({1, 2}), IndexSet{}, 2, eps).canonical());
}

TEST(RowCanonicityTest, SmallerParentCreatesCandidate) {
  auto m = two_parent_matrix();
  std::vector<double> eps{1, 1};
  auto ok = row_canonicity(m, idx({3, 4, 5}), idx({6, 7}), idx({1, 2, 3, 4, 5}), idx({1}), 1, eps);
  EXPECT_TRUE(ok.ok());

  auto p2 = row_canonicity(m, idx({3, 4, 5}), idx({1, 2}), idx({3, 4, 5, 6, 7}), idx({1}), 1, eps);
  EXPECT_EQ(p2.outcome, RowCanonicity::Outcome::rejected_part2);
  EXPECT_EQ(p2.row, 0u);
}

TEST(RowCanonicityTest, LaterRowExtendsCandidate) {
  auto m = two_parent_matrix(true);
  std::vector<double> eps{1, 1};
  auto r = row_canonicity(m, idx({3, 4, 5}), idx({6, 7}), idx({1, 2, 3, 4, 5}), idx({1}), 1, eps);
  EXPECT_EQ(r.outcome, RowCanonicity::Outcome::rejected_part1);
  EXPECT_EQ(r.row, 5u);
}

TEST(RowCanonicityTest, MissingCellDisqualifiesRow) {
  auto m = two_parent_matrix(true);
  m.set_missing(5, 1);
  std::vector<double> eps{1, 1};
  auto r = row_canonicity(m, idx({3, 4, 5}), idx({6}), idx({1, 2, 3, 4, 5}), idx({1}), 1, eps);
  EXPECT_TRUE(r.ok());
}

TEST(ComputeGamma, PivotWindow) {
  // Rows 1..6 form G; rows 7..10 hold -1, 0, 8, 9.
  Matrix m(10, 1);
  std::vector<double> v{3, 3, 4, 4.5, 5, 6, -1, 0, 8, 9};
  for (std::size_t i = 0; i < v.size(); ++i) m.set(i, 0, v[i]);
  auto g = idx({1, 2, 3, 4, 5, 6});
  auto all = idx({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  auto gamma = compute_gamma(m, g, 0, IndexSet{}, all, 2, 3.0);
  EXPECT_EQ(gamma, idx({8, 9}));
}

TEST(ComputeGamma, TwoParentAndInheritance) {
  auto m = two_parent_matrix();
  auto all = idx({1, 2, 3, 4, 5, 6, 7});
  EXPECT_EQ(compute_gamma(m, idx({1, 2, 3, 4, 5}), 0, IndexSet{}, all, 2, 1.0), idx({6, 7}));
  EXPECT_EQ(compute_gamma(m, idx({1, 2}), 0, idx({5}), idx({1, 2}), 2, 1.0), idx({5}));
  EXPECT_THROW(compute_gamma(m, idx({1}), 0, IndexSet{}, all, 2, 1.0), std::invalid_argument);
}

TEST(ComputeGamma, SkipsMissingRows) {
  auto m = two_parent_matrix();
  m.set_missing(5, 0);
  auto all = idx({1, 2, 3, 4, 5, 6, 7});
  EXPECT_EQ(compute_gamma(m, idx({1, 2, 3, 4, 5}), 0, IndexSet{}, all, 2, 1.0), idx({7}));
}

TEST(Enumerate, FixtureMatchesGoldenAllVariants) {
  auto m = b1a();
  auto golden = testing_support::as_solution(testing_support::load_golden("appendix_b/b4.txt"));
  ASSERT_EQ(golden.size(), 30u);
  auto p = b1a_params();
  EXPECT_EQ(enumerate_cvc3(m, p).solution, golden);
  EXPECT_EQ(enumerate_cvc_legacy(m, p).solution, golden);
  p.pn_inheritance = false;
  EXPECT_EQ(enumerate_cvc3(m, p).solution, golden);
}

TEST(Enumerate, TwoParentAllVariants) {
  auto m = two_parent_matrix();
  auto p = EnumParams::uniform(2, 1.0, 2, 1);
  auto expected = two_parent_expected();
  EXPECT_EQ(enumerate_cvc3(m, p).solution, expected);
  EXPECT_EQ(enumerate_cvc_legacy(m, p).solution, expected);
  EXPECT_EQ(brute_force(m, p), expected);
}

TEST(Enumerate, TwoParentEmitsEachBiclusterOnce) {
  EnumStats stats;
  auto out = collect(two_parent_matrix(), EnumParams::uniform(2, 1.0, 2, 1), &stats);
  EXPECT_EQ(out.size(), 5u);
  EXPECT_EQ(stats.bicluster_count, 5u);
  EXPECT_GT(stats.row_canonicity_failures, 0u);
}

TEST(Enumerate, TrivialCases) {
  Matrix c(4, 3, 1.5);
  auto r = enumerate_cvc3(c, EnumParams::uniform(3, 0.0));
  ASSERT_EQ(r.solution.size(), 1u);
  EXPECT_EQ(r.solution.biclusters()[0].rows, idx({1, 2, 3, 4}));
  EXPECT_EQ(r.solution.biclusters()[0].cols, idx({1, 2, 3}));

  auto m = b1a();
  auto p = EnumParams::uniform(4, 5.0, 9, 1);
  EXPECT_TRUE(enumerate_cvc3(m, p).solution.empty());
  EXPECT_TRUE(enumerate_cvc_legacy(m, p).solution.empty());
  EXPECT_TRUE(enumerate_cvcp(m, p).solution.empty());
}

TEST(Enumerate, MinColFilters) {
  auto m = b1a();
  auto p = b1a_params();
  p.min_col = 3;
  auto golden = testing_support::load_golden("appendix_b/b4.txt");
  BiclusterSolution expected;
  for (const auto& b : golden)
    if (b.cols.size() >= 3) expected.insert(b);
  EXPECT_EQ(enumerate_cvc3(m, p).solution, expected);
  p.min_col_pruning = false;
  EXPECT_EQ(enumerate_cvc3(m, p).solution, expected);
  EXPECT_EQ(enumerate_cvc_legacy(m, p).solution, expected);
}

TEST(Enumerate, CvcpIgnoresEpsAndMatchesCvc3AtZero) {
  auto m = testing_support::load_matrix("appendix_b/b1b.csv");
  auto golden = testing_support::as_solution(testing_support::load_golden("appendix_b/b2.txt"));
  auto p = EnumParams::uniform(m.cols(), 7.0, 2, 1);
  EXPECT_EQ(enumerate_cvcp(m, p).solution, golden);
  EXPECT_EQ(enumerate_cvc3(m, EnumParams::uniform(m.cols(), 0.0, 2, 1)).solution, golden);
}

TEST(Enumerate, StopsAtBiclusterCap) {
  auto p = b1a_params();
  p.max_biclusters = 4;
  auto r = enumerate_cvc3(b1a(), p);
  EXPECT_EQ(r.solution.size(), 4u);
  EXPECT_TRUE(r.stats.truncated);
}

TEST(Enumerate, LegacyUsesSymbolTable) {
  auto r = enumerate_cvc_legacy(b1a(), b1a_params());
  EXPECT_GE(r.stats.symbol_table_entries, 30u);
  EXPECT_GT(r.stats.peak_tracked_bytes, 0u);
  auto r3 = enumerate_cvc3(b1a(), b1a_params());
  EXPECT_EQ(r3.stats.symbol_table_entries, 0u);
}

TEST(Enumerate, DeepChainDoesNotOverflow) {
  // Nested staircase: row i is 0 on columns < i and distinct elsewhere,
  // producing one nested bicluster per column.
  const std::size_t n = 200;
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.set(i, j, j >= i ? 0.0 : static_cast<double>(i + 1));
  auto r = enumerate_cvc3(m, EnumParams::uniform(n, 0.0, 1, 1));
  for (const auto& b : r.solution.biclusters()) EXPECT_TRUE(is_maximal(m, b, std::vector<double>(n, 0.0)));
  EXPECT_GE(r.solution.size(), n);
}
