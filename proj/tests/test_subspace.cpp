#include <gtest/gtest.h>

#include <sstream>

#include "opinfer/subspace.hpp"
#include "oracles.hpp"

using namespace opinfer;

namespace {

Eigen::MatrixXd random_matrix(Index r, Index c, unsigned seed) {
  std::srand(seed);
  return Eigen::MatrixXd::Random(r, c);
}

}  // namespace

TEST(Pod, DominantDirectionWithSign) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(3, 2);
  S(0, 0) = 2;
  S(1, 1) = 1;
  const Basis V = pod_basis(S, 1);
  EXPECT_LE((V.matrix().col(0) - Eigen::Vector3d(1, 0, 0)).norm(), 1e-15);
  EXPECT_NEAR(V.singular_values()[0], 2, 1e-15);
  EXPECT_NEAR(V.singular_values()[1], 1, 1e-15);
  EXPECT_LE(pod_basis(-S, 1).matrix().col(0).minCoeff(), 1e-15);
}

TEST(Pod, FullRankReconstruction) {
  const Eigen::MatrixXd S = random_matrix(8, 5, 1);
  const Basis V = pod_basis(S, 5);
  EXPECT_LE((V.matrix() * V.matrix().transpose() * S - S).norm(), 1e-12 * S.norm());
}

TEST(Pod, EckartYoungAgainstFullSvd) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd S = random_matrix(20, 50, seed);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
    const Eigen::VectorXd sigma = svd.singularValues();
    for (Index n : {1, 5, 12}) {
      const Basis V = pod_basis(S, n);
      const double err = (S - V.matrix() * V.matrix().transpose() * S).squaredNorm();
      const double tail = sigma.tail(sigma.size() - n).squaredNorm();
      EXPECT_NEAR(err, tail, 1e-10 * tail);
      EXPECT_LE((V.matrix().transpose() * V.matrix() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((V.singular_values() - sigma).cwiseAbs().maxCoeff(), 1e-12 * sigma[0]);
    }
  }
}

TEST(Pod, LeadingColumnsConsistent) {
  const Eigen::MatrixXd S = random_matrix(15, 30, 4);
  const Basis big = pod_basis(S, 9);
  for (Index n = 1; n < 9; ++n) {
    EXPECT_LE((pod_basis(S, n).matrix() - big.matrix().leftCols(n)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(big.leading(n).matrix(), big.matrix().leftCols(n));
  }
}

TEST(Pod, RejectsRankDeficientRequest) {
  const Eigen::MatrixXd low = random_matrix(10, 2, 5) * random_matrix(2, 20, 6);
  EXPECT_NO_THROW(pod_basis(low, 2));
  EXPECT_THROW(pod_basis(low, 3), std::invalid_argument);
  EXPECT_THROW(pod_basis(low, 0), std::invalid_argument);
  EXPECT_THROW(pod_basis(low, 11), std::invalid_argument);
}

TEST(SnapshotAccumulator, MatchesBatchPod) {
  const Eigen::MatrixXd S = random_matrix(12, 300, 7);
  SnapshotAccumulator acc(12, 16);
  for (Index c = 0; c < 300; c += 37) acc.add(S.middleCols(c, std::min<Index>(37, 300 - c)));
  EXPECT_EQ(acc.snapshot_count(), 300);
  const Basis a = acc.basis(6), b = pod_basis(S, 6);
  EXPECT_LE((a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((a.singular_values() - b.singular_values()).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(SnapshotAccumulator, FewerSnapshotsThanStates) {
  const Eigen::MatrixXd S = random_matrix(20, 4, 8);
  SnapshotAccumulator acc(20, 3);
  acc.add(S.leftCols(1));
  acc.add(S.rightCols(3));
  EXPECT_LE((acc.basis(4).matrix() - pod_basis(S, 4).matrix()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(acc.basis(5), std::invalid_argument);
}

TEST(ProjectLift, SpanRoundTrip) {
  const Eigen::MatrixXd Q = oracle::random_orthonormal(10, 3, 9);
  const Basis V = Basis::from_orthonormal(Q);
  const Eigen::MatrixXd X = Q * random_matrix(3, 6, 10);
  EXPECT_LE((lift(V, project(V, X)) - X).norm(), 1e-12 * X.norm());
  const Eigen::MatrixXd Z = random_matrix(3, 6, 11);
  EXPECT_LE((project(V, lift(V, Z)) - Z).norm(), 1e-12 * Z.norm());
}

TEST(ProjectLift, IdentityBasis) {
  const Basis V = Basis::from_orthonormal(Eigen::MatrixXd::Identity(5, 5));
  const Eigen::MatrixXd X = random_matrix(5, 4, 12);
  EXPECT_EQ(project(V, X), X);
  EXPECT_EQ(lift(V, X), X);
}

TEST(ProjectLift, AgainstNaiveMultiply) {
  const Eigen::MatrixXd Q = oracle::random_orthonormal(9, 4, 13);
  const Basis V = Basis::from_orthonormal(Q);
  const Eigen::MatrixXd X = random_matrix(9, 7, 14), Z = random_matrix(4, 7, 15);
  EXPECT_LE((project(V, X) - oracle::naive_multiply(Q.transpose(), X)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((lift(V, Z) - oracle::naive_multiply(Q, Z)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ProjectLift, Adjoint) {
  const Basis V = Basis::from_orthonormal(oracle::random_orthonormal(11, 3, 16));
  const Eigen::VectorXd a = random_matrix(3, 1, 17), b = random_matrix(11, 1, 18);
  EXPECT_NEAR(lift(V, a).col(0).dot(b), a.dot(project(V, b).col(0)), 1e-12);
}

TEST(ProjectLift, DimensionMismatch) {
  const Basis V = Basis::from_orthonormal(Eigen::MatrixXd::Identity(5, 2));
  EXPECT_THROW(project(V, Eigen::MatrixXd::Zero(4, 3)), std::invalid_argument);
  EXPECT_THROW(lift(V, Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
}

TEST(BasisCsv, RoundTripIsExact) {
  const Eigen::MatrixXd S = random_matrix(6, 10, 19);
  const Basis V = pod_basis(S, 3);
  std::stringstream ss;
  write_basis_csv(ss, V);
  const Basis W = read_basis_csv(ss);
  EXPECT_EQ(W.matrix(), V.matrix());
  EXPECT_EQ(W.singular_values(), V.singular_values());
}

TEST(BasisCsv, RejectsMalformed) {
  std::stringstream ss("sigma,1,2\nv0,1,0\nv1,0\n");
  EXPECT_THROW(read_basis_csv(ss), std::runtime_error);
}
