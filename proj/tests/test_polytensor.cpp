#include <gtest/gtest.h>

#include <numeric>
#include <stdexcept>

#include "opinfer/polytensor.hpp"
#include "oracles.hpp"

using namespace opinfer;

namespace {

std::vector<std::vector<Index>> tuples(const std::vector<MultisetIndex>& ms) {
  std::vector<std::vector<Index>> out;
  for (const auto& m : ms) out.push_back(m.entries);
  return out;
}

}  // namespace

TEST(CompressedDim, SmallValues) {
  EXPECT_EQ(compressed_dim(3, 2), 6);
  EXPECT_EQ(compressed_dim(7, 1), 7);
  EXPECT_EQ(compressed_dim(128, 2), 8256);
  EXPECT_EQ(compressed_dim(10, 3), 220);
}

TEST(CompressedDim, RejectsBadArguments) {
  EXPECT_THROW(compressed_dim(0, 2), std::invalid_argument);
  EXPECT_THROW(compressed_dim(3, 0), std::invalid_argument);
}

TEST(CompressedDim, OverflowIsReported) {
  EXPECT_THROW(compressed_dim(Index{1} << 40, 4), std::overflow_error);
}

TEST(EnumerateMultisets, Examples) {
  using V = std::vector<std::vector<Index>>;
  EXPECT_EQ(tuples(enumerate_multisets(2, 2)), (V{{0, 0}, {0, 1}, {1, 1}}));
  EXPECT_EQ(tuples(enumerate_multisets(3, 1)), (V{{0}, {1}, {2}}));
  EXPECT_EQ(tuples(enumerate_multisets(2, 3)), (V{{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}}));
}

TEST(EnumerateMultisets, SortedDistinctAndCounted) {
  for (Index N = 1; N <= 6; ++N) {
    for (int i = 1; i <= 4; ++i) {
      const auto ms = enumerate_multisets(N, i);
      ASSERT_EQ(static_cast<Index>(ms.size()), compressed_dim(N, i));
      for (std::size_t r = 0; r < ms.size(); ++r) {
        EXPECT_TRUE(std::is_sorted(ms[r].entries.begin(), ms[r].entries.end()));
        EXPECT_LT(ms[r].entries.back(), N);
        if (r > 0) {
          EXPECT_LT(ms[r - 1].entries, ms[r].entries);
        }
      }
    }
  }
}

TEST(EnumerateMultisets, RankUnrankRoundTrip) {
  for (Index N = 1; N <= 7; ++N) {
    for (int i = 1; i <= 4; ++i) {
      const auto ms = enumerate_multisets(N, i);
      for (std::size_t r = 0; r < ms.size(); ++r) {
        EXPECT_EQ(multiset_rank(ms[r], N), static_cast<Index>(r));
        EXPECT_EQ(multiset_unrank(static_cast<Index>(r), N, i), ms[r]);
      }
    }
  }
}

TEST(EnumerateMultisets, NextMultisetStopsAtLast) {
  MultisetIndex a{{1, 1}};
  EXPECT_FALSE(next_multiset(a, 2));
  EXPECT_EQ(a.entries, (std::vector<Index>{1, 1}));
  MultisetIndex b{{0, 1}};
  EXPECT_TRUE(next_multiset(b, 2));
  EXPECT_EQ(b.entries, (std::vector<Index>{1, 1}));
}

TEST(CompressedPower, Examples) {
  EXPECT_TRUE(compressed_power(Eigen::Vector2d(1, 2), 2).values.isApprox(Eigen::Vector3d(1, 2, 4)));
  Eigen::VectorXd expected(6);
  expected << 1, 0, 2, 0, 0, 4;
  EXPECT_EQ(compressed_power(Eigen::Vector3d(1, 0, 2), 2).values, expected);
  Eigen::VectorXd a(1);
  a << 1.5;
  EXPECT_DOUBLE_EQ(compressed_power(a, 3).values[0], 1.5 * 1.5 * 1.5);
  const Eigen::VectorXd x = Eigen::VectorXd::Random(5);
  EXPECT_EQ(compressed_power(x, 1).values, x);
}

TEST(CompressedPower, MatchesBruteForceMonomials) {
  std::srand(3);
  for (Index N = 1; N <= 6; ++N) {
    for (int i = 1; i <= 4; ++i) {
      const Eigen::VectorXd x = Eigen::VectorXd::Random(N);
      const auto cp = compressed_power(x, i);
      EXPECT_EQ(cp.degree, i);
      EXPECT_EQ(cp.base_dim, N);
      const Eigen::VectorXd ref = oracle::brute_compressed_power(x, i);
      ASSERT_EQ(cp.values.size(), ref.size());
      EXPECT_LE((cp.values - ref).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(CompressedPower, ColumnsAndInPlaceAgree) {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 7);
  const Eigen::MatrixXd P = compressed_power_columns(X, 3);
  Eigen::VectorXd out, scratch;
  for (Index k = 0; k < X.cols(); ++k) {
    compressed_power_into(X.col(k), 3, out, scratch);
    EXPECT_EQ(out, P.col(k));
    EXPECT_EQ(out, compressed_power(X.col(k), 3).values);
  }
}

TEST(CompressedPower, Homogeneity) {
  const Eigen::VectorXd x = Eigen::VectorXd::Random(5);
  const double c = -1.7;
  for (int i = 1; i <= 4; ++i) {
    const Eigen::VectorXd lhs = compressed_power(c * x, i).values;
    const Eigen::VectorXd rhs = std::pow(c, i) * compressed_power(x, i).values;
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Multiplicity, Examples) {
  EXPECT_EQ(multiplicity(MultisetIndex{{0, 0}}), 1);
  EXPECT_EQ(multiplicity(MultisetIndex{{0, 1}}), 2);
  EXPECT_EQ(multiplicity(MultisetIndex{{0, 0, 1}}), 3);
  EXPECT_EQ(multiplicity(MultisetIndex{{0, 1, 2}}), 6);
  EXPECT_EQ(multiplicity(MultisetIndex{{2, 2, 2, 2}}), 1);
}

TEST(Multiplicity, SumsToFullKroneckerSize) {
  for (Index N = 1; N <= 6; ++N) {
    for (int i = 1; i <= 4; ++i) {
      Index total = 0;
      for (const auto& m : enumerate_multisets(N, i)) total += multiplicity(m);
      EXPECT_EQ(total, oracle::ipow(N, i));
    }
  }
}

TEST(SelectionMatrix, TwoByTwoPicksCanonicalPositions) {
  const Eigen::MatrixXd S(selection_matrix(2, 2));
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 4);
  expected(0, 0) = expected(1, 1) = expected(2, 3) = 1;
  EXPECT_EQ(S, expected);
}

TEST(DuplicationMatrix, TwoByTwoRows) {
  const Eigen::MatrixXd D(duplication_matrix(2, 2));
  Eigen::MatrixXd expected(4, 3);
  expected << 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1;
  EXPECT_EQ(D, expected);
  const Eigen::VectorXd k = D * compressed_power(Eigen::Vector2d(1, 2), 2).values;
  EXPECT_EQ(k, Eigen::Vector4d(1, 2, 2, 4));
}

TEST(SelectionDuplication, IdentitiesAgainstDenseKronecker) {
  std::srand(11);
  for (Index N = 1; N <= 8; ++N) {
    for (int i = 1; i <= 4; ++i) {
      if (oracle::ipow(N, i) > 5000) continue;
      const Eigen::MatrixXd S(selection_matrix(N, i));
      const Eigen::MatrixXd D(duplication_matrix(N, i));
      EXPECT_EQ(S * D, Eigen::MatrixXd::Identity(compressed_dim(N, i), compressed_dim(N, i)));
      for (Index c = 0; c < D.cols(); ++c) {
        EXPECT_EQ(D.col(c).sum(), static_cast<double>(multiplicity(multiset_unrank(c, N, i))));
      }
      const Eigen::VectorXd x = Eigen::VectorXd::Random(N);
      const Eigen::VectorXd full = oracle::kron_power(x, i);
      // Both sides multiply the same factors left to right, so no rounding
      // difference is allowed.
      EXPECT_TRUE(((S * full).array() == compressed_power(x, i).values.array()).all());
      EXPECT_LE((D * compressed_power(x, i).values - full).cwiseAbs().maxCoeff(), 4e-16 * i * full.cwiseAbs().maxCoeff());
    }
  }
}

TEST(SelectionMatrix, SizeGuard) {
  EXPECT_THROW(selection_matrix(100, 4), std::length_error);
  EXPECT_THROW(duplication_matrix(100, 4), std::length_error);
}
