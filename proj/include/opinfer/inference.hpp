#pragma once

// Operator inference: data matrices, least-squares fitting of reduced
// operators, re-projected sampling and the recovery certificate.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opinfer/fom.hpp"
#include "opinfer/rom.hpp"
#include "opinfer/subspace.hpp"

namespace opinfer {

enum class DataSource { projected, reprojected };

/// D = [X; X^2; ...; X^l; U], one column per time step.
struct DataMatrix {
  Eigen::MatrixXd D;
  Index reduced_dim = 0;
  int degree = 0;
  Index input_dim = 0;
  DataSource source = DataSource::projected;

  Index rows() const { return D.rows(); }
  Index cols() const { return D.cols(); }
};

/// p + sum_i compressed_dim(n, i).
Index data_row_count(Index n, int degree, Index p);

DataMatrix assemble_data_matrix(const Eigen::MatrixXd& states, const Eigen::MatrixXd& inputs, int degree,
                                DataSource source = DataSource::projected);

inline constexpr double kRankTolerance = 1e-12;

/// Rank is judged on the row-equilibrated data matrix (every row scaled to
/// unit norm): exact rank is unaffected by row scaling, while the raw
/// spectrum mostly reflects the magnitude spread between monomials.
/// `condition` is cond_2(D^T D) of the unscaled matrix.
struct RecoveryCertificate {
  Index K = 0;
  Index required = 0;
  Index numerical_rank = 0;
  double condition = 0.0;
  bool satisfied = false;
  Eigen::VectorXd singular_values;               // of D, descending
  Eigen::VectorXd equilibrated_singular_values;  // of diag(1/||row||) D
};

/// Certificate for a data matrix with `required` rows and K columns, given
/// the singular values of D and of its row-equilibrated version.
RecoveryCertificate certificate_from_singular_values(const Eigen::VectorXd& sigma, const Eigen::VectorXd& scaled_sigma,
                                                     Index K, Index required);

RecoveryCertificate certify(const DataMatrix& D);

/// State pairs (x_k, x_{k+1}) with the inputs u_k that produced them.
/// Columns of states, next_states and inputs correspond one to one.
struct TrajectoryPiece {
  Eigen::MatrixXd states;
  Eigen::MatrixXd next_states;
  Eigen::MatrixXd inputs;
  std::optional<Index> diverged_at;

  Index cols() const { return states.cols(); }
};

/// Splits a trajectory with K+1 stored states into K transition pairs.
TrajectoryPiece piece_from_trajectory(const Eigen::MatrixXd& states, const Eigen::MatrixXd& inputs);

/// Horizontal concatenation; pairs never cross piece boundaries.
TrajectoryPiece concat_trajectories(const std::vector<TrajectoryPiece>& pieces);

/// Re-projected sampling: xbar_0 = V^T x0, xbar_{k+1} = V^T f(V xbar_k, u_k).
/// Requires x0 in span(V) to 1e-10 relative. On divergence the piece holds
/// the pairs computed so far and diverged_at is set.
TrajectoryPiece reproject_sample(const FullOrderModel& fom, const Basis& V, const Eigen::VectorXd& x0,
                                 const Eigen::MatrixXd& U, Index K);

inline constexpr double kSpanTolerance = 1e-10;

/// Streaming least squares min ||D^T O^T - Y^T||_F. Transposed data rows are
/// folded into the triangular factor of [D^T | Y^T], so memory does not grow
/// with the number of time steps.
class LeastSquaresAccumulator {
 public:
  LeastSquaresAccumulator(Index reduced_dim, int degree, Index input_dim, Index block_cols = 2048);

  /// Adds transition pairs; states/next_states are n x k, inputs p x k.
  void add(const Eigen::MatrixXd& states, const Eigen::MatrixXd& next_states, const Eigen::MatrixXd& inputs);
  void add(const TrajectoryPiece& piece) { add(piece.states, piece.next_states, piece.inputs); }
  /// Adds precomputed data columns.
  void add_data(const Eigen::MatrixXd& D, const Eigen::MatrixXd& Y);

  Index column_count() const { return count_; }
  Index required() const { return d_; }

  struct Solution {
    Eigen::MatrixXd O;  // n x (sum n_i + p)
    double residual = 0.0;
    RecoveryCertificate certificate;
  };
  Solution solve();

 private:
  void flush();

  Index n_, p_, d_;
  int degree_;
  Index block_cols_;
  Index count_ = 0;
  Eigen::MatrixXd R_;
  Eigen::MatrixXd pending_;
  Index pending_rows_ = 0;
  Eigen::VectorXd power_, scratch_;
};

struct InferenceResult {
  PolynomialModel model;
  double residual = 0.0;
  RecoveryCertificate certificate;
};

/// Least-squares fit of [A_1, ..., A_l, B] to Y. Rank-deficient data yields
/// the minimum-norm solution and an unsatisfied certificate.
InferenceResult infer_operators(const DataMatrix& D, const Eigen::MatrixXd& Y,
                                Provenance provenance = Provenance::inferred_plain);

InferenceResult infer_from_pieces(const std::vector<TrajectoryPiece>& pieces, int degree, Provenance provenance);

using FomFactory = std::function<std::shared_ptr<const FullOrderModel>(double mu)>;

struct ReprojectionSetup {
  std::vector<double> params;
  std::vector<Eigen::VectorXd> x0;                 // one per parameter
  std::vector<std::vector<Eigen::MatrixXd>> inputs;  // m' input trajectories per parameter
  Index K = 0;
  Index nbar = 0;
  std::optional<Index> horizon;  // re-projection length; defaults to K
  int threads = 1;
};

struct ReprojectionResult {
  Basis basis;
  std::vector<std::optional<PolynomialModel>> models;
  std::vector<RecoveryCertificate> certificates;
  std::vector<double> residuals;
  std::vector<std::string> errors;  // empty string when the parameter succeeded
};

/// Simulates every (parameter, input) pair, builds the POD basis of
/// dimension nbar from all snapshots, re-projects each pair and infers one
/// model per parameter. Failures are reported per parameter.
ReprojectionResult learn_with_reprojection(const FomFactory& factory, const ReprojectionSetup& setup);

/// Runs fn(0..count-1) on up to `threads` threads. Each index is handled by
/// exactly one call; callers write results into index-addressed slots.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace opinfer
