#include "opinfer/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/QR>

namespace opinfer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void summarize(ErrorSummary& s) {
  double sum = 0.0;
  Index used = 0;
  for (double v : s.per_pair) {
    if (std::isnan(v)) {
      ++s.diverged;
    } else {
      sum += v;
      ++used;
    }
  }
  s.mean = used > 0 ? sum / static_cast<double>(used) : kNaN;
}

double safe_ratio(double num, double den, const char* who) {
  if (!(den > 0.0)) throw std::invalid_argument(std::string(who) + ": reference has zero norm");
  return num / den;
}

}  // namespace

double closure_error(const Eigen::MatrixXd& projected, const Eigen::MatrixXd& reduced) {
  if (projected.rows() != reduced.rows() || projected.cols() != reduced.cols()) {
    throw std::invalid_argument("closure_error: shape mismatch");
  }
  return (projected - reduced).norm();
}

Eigen::VectorXd closure_error_per_step(const Eigen::MatrixXd& projected, const Eigen::MatrixXd& reduced) {
  if (projected.rows() != reduced.rows() || projected.cols() != reduced.cols()) {
    throw std::invalid_argument("closure_error_per_step: shape mismatch");
  }
  return (projected - reduced).colwise().norm().transpose();
}

double relative_state_error(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, const Basis& V) {
  if (X.rows() != V.full_dim() || Z.rows() != V.dim() || X.cols() != Z.cols()) {
    throw std::invalid_argument("relative_state_error: shape mismatch");
  }
  return safe_ratio((V.matrix() * Z - X).norm(), X.norm(), "relative_state_error");
}

ErrorSummary avg_rel_state_error(const std::vector<Eigen::MatrixXd>& full, const std::vector<Trajectory>& reduced,
                                 const Basis& V) {
  if (full.empty()) throw std::invalid_argument("avg_rel_state_error: empty list");
  if (full.size() != reduced.size()) throw std::invalid_argument("avg_rel_state_error: list lengths differ");
  ErrorSummary s;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (reduced[i].diverged()) {
      s.per_pair.push_back(kNaN);
      continue;
    }
    s.per_pair.push_back(relative_state_error(full[i], reduced[i].states, V));
  }
  summarize(s);
  return s;
}

double relative_difference(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& reference) {
  if (Z.rows() != reference.rows() || Z.cols() != reference.cols()) {
    throw std::invalid_argument("relative_difference: shape mismatch");
  }
  return safe_ratio((Z - reference).norm(), reference.norm(), "relative_difference");
}

ErrorSummary rel_trajectory_difference(const std::vector<Trajectory>& reduced, const std::vector<Trajectory>& reference) {
  if (reduced.empty()) throw std::invalid_argument("rel_trajectory_difference: empty list");
  if (reduced.size() != reference.size()) throw std::invalid_argument("rel_trajectory_difference: list lengths differ");
  ErrorSummary s;
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    if (reduced[i].diverged() || reference[i].diverged()) {
      s.per_pair.push_back(kNaN);
      continue;
    }
    s.per_pair.push_back(relative_difference(reduced[i].states, reference[i].states));
  }
  summarize(s);
  return s;
}

void ProjectedReference::append(const Eigen::MatrixXd& X, const Basis& V) {
  if (X.rows() != V.full_dim()) throw std::invalid_argument("ProjectedReference: dimension mismatch");
  if (projected.cols() > 0 && projected.rows() != V.dim()) {
    throw std::invalid_argument("ProjectedReference: basis dimension changed");
  }
  const Eigen::MatrixXd P = V.matrix().transpose() * X;
  orth_sq += (X - V.matrix() * P).squaredNorm();
  full_sq += X.squaredNorm();
  const Index old = projected.cols();
  projected.conservativeResize(V.dim(), old + X.cols());
  projected.rightCols(X.cols()) = P;
}

double relative_state_error(const ProjectedReference& ref, const Eigen::MatrixXd& Z) {
  const Index n = Z.rows();
  if (n > ref.projected.rows() || Z.cols() != ref.projected.cols()) {
    throw std::invalid_argument("relative_state_error: reduced trajectory does not match reference");
  }
  // ||V_n Z - X||^2 = ||Z - P_n||^2 + ||P_{n..nbar}||^2 + ||X - V V^T X||^2
  const double err_sq = (Z - ref.projected.topRows(n)).squaredNorm() +
                        ref.projected.bottomRows(ref.projected.rows() - n).squaredNorm() + ref.orth_sq;
  return safe_ratio(std::sqrt(err_sq), std::sqrt(ref.full_sq), "relative_state_error");
}

MZDecomposition mori_zwanzig_decompose(const Eigen::MatrixXd& A, const Basis& V, const Eigen::VectorXd& x0, Index K) {
  const Index N = A.rows();
  if (A.cols() != N) throw std::invalid_argument("mori_zwanzig_decompose: operator is not square");
  if (V.full_dim() != N || x0.size() != N) throw std::invalid_argument("mori_zwanzig_decompose: dimension mismatch");
  if (K < 0) throw std::invalid_argument("mori_zwanzig_decompose: negative K");
  const Index n = V.dim();
  const Eigen::MatrixXd& Vp = V.matrix();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Vp);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, N);
  const Eigen::MatrixXd Vo = Q.rightCols(N - n);

  MZDecomposition mz;
  mz.A_pp = Vp.transpose() * A * Vp;
  mz.A_po = Vp.transpose() * A * Vo;
  mz.A_op = Vo.transpose() * A * Vp;
  mz.A_oo = Vo.transpose() * A * Vo;

  mz.projected.resize(n, K + 1);
  Eigen::VectorXd x = x0;
  mz.projected.col(0) = Vp.transpose() * x;
  for (Index k = 0; k < K; ++k) {
    x = A * x;
    mz.projected.col(k + 1) = Vp.transpose() * x;
  }

  mz.markovian.resize(n, K);
  mz.memory.resize(n, K);
  mz.initial.resize(n, K);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(N - n);
  Eigen::VectorXd g = Vo.transpose() * x0;
  for (Index k = 0; k < K; ++k) {
    const auto xp = mz.projected.col(k);
    mz.markovian.col(k) = mz.A_pp * xp;
    mz.memory.col(k) = mz.A_po * h;
    mz.initial.col(k) = mz.A_po * g;
    h = mz.A_oo * h + mz.A_op * xp;
    g = mz.A_oo * g;
  }
  return mz;
}

double condition_number(const DataMatrix& D) {
  if (D.rows() == 0 || D.cols() == 0 || D.D.isZero(0.0)) throw std::invalid_argument("condition_number: zero data matrix");
  return certify(D).condition;
}

}  // namespace opinfer
