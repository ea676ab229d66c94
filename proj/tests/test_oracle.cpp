#include "property_checks.hpp"
#include "support.hpp"

#include <rinclose/oracle.hpp>

#include <gtest/gtest.h>

using namespace rinclose;
using testing_support::idx;

namespace {

Matrix b1a() { return testing_support::load_matrix("appendix_b/b1a.csv"); }

EnumParams b1a_params() { return EnumParams::uniform(4, 5.0, 2, 1); }

}  // namespace

TEST(BruteForce, FixtureGolden) {
  auto golden = testing_support::as_solution(testing_support::load_golden("appendix_b/b4.txt"));
  EXPECT_EQ(brute_force(b1a(), b1a_params()), golden);
}

TEST(BruteForce, EmptyWhenMinRowExceedsRows) {
  EXPECT_TRUE(brute_force(b1a(), EnumParams::uniform(4, 5.0, 9, 1)).empty());
}

TEST(BruteForce, RowCap) {
  Matrix big(17, 2);
  EXPECT_THROW(brute_force(big, EnumParams::uniform(2, 0.0)), ConfigError);
  EXPECT_NO_THROW(brute_force(b1a(), b1a_params(), 8));
  EXPECT_THROW(brute_force(b1a(), b1a_params(), 7), ConfigError);
}

TEST(Verify, GoldenPasses) {
  auto golden = testing_support::load_golden("appendix_b/b4.txt");
  auto report = verify(b1a(), golden, b1a_params(), true);
  EXPECT_TRUE(report.passes());
  EXPECT_TRUE(report.oracle_run);
  EXPECT_EQ(report.correct_count, 30u);
}

TEST(Verify, DetectsMissingBicluster) {
  auto golden = testing_support::load_golden("appendix_b/b4.txt");
  Bicluster dropped = golden[7];
  golden.erase(golden.begin() + 7);
  auto report = verify(b1a(), golden, b1a_params(), true);
  EXPECT_FALSE(report.passes());
  ASSERT_EQ(report.missing_from_solution.size(), 1u);
  EXPECT_EQ(report.missing_from_solution[0], dropped);
  EXPECT_TRUE(report.extra_in_solution.empty());
}

TEST(Verify, FlagsNonMaximalWithAddableRow) {
  std::vector<Bicluster> sol{{idx({1, 2, 4}), idx({1, 2})}};
  auto report = verify(b1a(), sol, b1a_params(), false);
  EXPECT_FALSE(report.oracle_run);
  ASSERT_EQ(report.non_maximal.size(), 1u);
  EXPECT_TRUE(report.non_maximal[0].by_row);
  EXPECT_EQ(report.non_maximal[0].witness, 4u);
}

TEST(Verify, FlagsIncorrectAndDuplicates) {
  std::vector<Bicluster> sol{{idx({1, 3}), idx({1})}, {idx({5, 7}), idx({1, 2, 3, 4})}, {idx({5, 7}), idx({1, 2, 3})}};
  auto report = verify(b1a(), sol, b1a_params(), false);
  ASSERT_EQ(report.incorrect.size(), 1u);
  EXPECT_EQ(report.incorrect[0].column, 0u);
  ASSERT_EQ(report.duplicate_rowsets.size(), 1u);
  EXPECT_EQ(report.duplicate_rowsets[0], idx({5, 7}));
  ASSERT_EQ(report.non_maximal.size(), 1u);
  EXPECT_FALSE(report.non_maximal[0].by_row);
  EXPECT_EQ(report.non_maximal[0].witness, 3u);
}

TEST(Verify, SkipsOracleAboveCap) {
  auto golden = testing_support::load_golden("appendix_b/b4.txt");
  auto report = verify(b1a(), golden, b1a_params(), true, 4);
  EXPECT_FALSE(report.oracle_run);
  EXPECT_TRUE(report.passes());
}

TEST(BruteForce, SelfConsistent) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 100; ++t) {
    auto c = property_checks::random_case(rng, 8, 5, 4, 0.1);
    auto sol = brute_force(c.matrix, c.params);
    EXPECT_TRUE(verify(c.matrix, sol, c.params, false).passes());
  }
}

TEST(BruteForce, RowPermutationInvariant) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 100; ++t) {
    auto c = property_checks::random_case(rng, 8, 5, 4, 0.1);
    const std::size_t n = c.matrix.rows();
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    // Row i of the permuted matrix is row perm[i] of the original.
    Matrix p(n, c.matrix.cols());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c.matrix.cols(); ++j) {
        if (c.matrix.missing(perm[i], j))
          p.set_missing(i, j);
        else
          p.set(i, j, c.matrix.value(perm[i], j));
      }
    BiclusterSolution mapped;
    for (const auto& b : brute_force(p, c.params).biclusters()) {
      IndexSet rows;
      for (Index i : b.rows) rows.push_back(perm[i]);
      std::sort(rows.begin(), rows.end());
      mapped.insert({rows, b.cols});
    }
    EXPECT_EQ(mapped, brute_force(c.matrix, c.params));
  }
}
