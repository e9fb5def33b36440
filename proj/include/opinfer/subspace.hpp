#pragma once

// POD bases and the maps between R^N and reduced coordinates.

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

namespace opinfer {

using Index = Eigen::Index;

/// Orthonormal N x n basis, columns ordered by descending singular value,
/// together with the full singular spectrum of the snapshots it came from.
class Basis {
 public:
  Basis() = default;
  Basis(Eigen::MatrixXd vectors, Eigen::VectorXd singular_values);

  /// Basis with orthonormal columns given directly (e.g. unit vectors).
  static Basis from_orthonormal(Eigen::MatrixXd vectors);

  const Eigen::MatrixXd& matrix() const { return V_; }
  const Eigen::VectorXd& singular_values() const { return sigma_; }
  Index full_dim() const { return V_.rows(); }
  Index dim() const { return V_.cols(); }

  /// First n columns; the singular spectrum is kept.
  Basis leading(Index n) const;

 private:
  Eigen::MatrixXd V_;
  Eigen::VectorXd sigma_;
};

/// Relative tolerance below which singular values count as zero.
inline constexpr double kPodRankTolerance = 1e-13;

/// Leading n left singular vectors of the N x M snapshot matrix, each column
/// signed so that its largest-magnitude entry is positive. Throws
/// std::invalid_argument if n exceeds the numerical rank.
Basis pod_basis(const Eigen::MatrixXd& snapshots, Index n);

/// Streaming POD: snapshot blocks are folded into the triangular factor of a
/// QR decomposition of the transposed snapshot matrix, so memory stays
/// O(N^2) however many snapshots arrive. Produces the same basis as
/// pod_basis on the concatenated blocks (up to rounding).
class SnapshotAccumulator {
 public:
  explicit SnapshotAccumulator(Index state_dim, Index block_cols = 4096);

  void add(const Eigen::MatrixXd& block);
  Index snapshot_count() const { return count_; }
  Basis basis(Index n);

 private:
  void flush();

  Index N_;
  Index block_cols_;
  Index count_ = 0;
  Eigen::MatrixXd R_;        // N x N triangular factor so far (rows beyond count stay zero)
  Eigen::MatrixXd pending_;  // buffered snapshots, columns [0, pending_cols_)
  Index pending_cols_ = 0;
};

/// V^T X.
Eigen::MatrixXd project(const Basis& V, const Eigen::MatrixXd& X);
/// V Z.
Eigen::MatrixXd lift(const Basis& V, const Eigen::MatrixXd& Z);

/// Basis file: a row tagged `sigma` with the singular values, then one row
/// per basis vector tagged `v<j>` holding its N entries (column-major).
void write_basis_csv(std::ostream& os, const Basis& V);
Basis read_basis_csv(std::istream& is);

}  // namespace opinfer
