#pragma once

// Error metrics, closure error, conditioning and the Mori-Zwanzig split of
// projected linear dynamics.

#include <vector>

#include <Eigen/Dense>

#include "opinfer/fom.hpp"
#include "opinfer/inference.hpp"
#include "opinfer/subspace.hpp"

namespace opinfer {

/// ||Xp - Xr||_F.
double closure_error(const Eigen::MatrixXd& projected, const Eigen::MatrixXd& reduced);
/// ||xp_k - xr_k||_2 for every column k.
Eigen::VectorXd closure_error_per_step(const Eigen::MatrixXd& projected, const Eigen::MatrixXd& reduced);

/// Mean of per-pair relative errors over pairs that did not diverge.
struct ErrorSummary {
  double mean = 0.0;            // NaN when every pair diverged
  Index diverged = 0;
  std::vector<double> per_pair;  // NaN for diverged pairs
};

/// ||V Z - X||_F / ||X||_F.
double relative_state_error(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, const Basis& V);

/// (1/m) sum_i ||V Z_i - X_i||_F / ||X_i||_F over non-diverged Z_i.
ErrorSummary avg_rel_state_error(const std::vector<Eigen::MatrixXd>& full, const std::vector<Trajectory>& reduced,
                                 const Basis& V);

/// ||Z - Xt||_F / ||Xt||_F.
double relative_difference(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& reference);

/// (1/m) sum_i ||Z_i - Xt_i||_F / ||Xt_i||_F; a pair counts as diverged when
/// either trajectory did.
ErrorSummary rel_trajectory_difference(const std::vector<Trajectory>& reduced, const std::vector<Trajectory>& reference);

/// Full trajectory compressed against a basis of dimension nbar: P = V^T X,
/// ||X - V V^T X||_F^2 and ||X||_F^2. Enough to evaluate the state error of
/// any reduced trajectory of dimension n <= nbar without keeping X.
struct ProjectedReference {
  Eigen::MatrixXd projected;
  double orth_sq = 0.0;
  double full_sq = 0.0;

  void append(const Eigen::MatrixXd& X, const Basis& V);
};

/// Relative state error of the n-dimensional trajectory Z (n <= nbar).
double relative_state_error(const ProjectedReference& ref, const Eigen::MatrixXd& Z);

struct MZDecomposition {
  Eigen::MatrixXd markovian;  // column k: A_pp xp_k
  Eigen::MatrixXd memory;     // column k: A_po sum_{i<k} A_oo^{k-1-i} A_op xp_i
  Eigen::MatrixXd initial;    // column k: A_po A_oo^k xo_0
  Eigen::MatrixXd projected;  // xp_0 .. xp_K
  Eigen::MatrixXd A_pp, A_po, A_op, A_oo;
};

/// Splits the projected dynamics of x_{k+1} = A x_k into Markovian, memory
/// and initial-condition contributions; markovian + memory + initial column k
/// equals projected column k + 1.
MZDecomposition mori_zwanzig_decompose(const Eigen::MatrixXd& A, const Basis& V, const Eigen::VectorXd& x0, Index K);

/// cond_2(D^T D) from the singular values of D; +inf when D^T D is singular.
double condition_number(const DataMatrix& D);

}  // namespace opinfer
