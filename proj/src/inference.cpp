#include "opinfer/inference.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "opinfer/polytensor.hpp"

namespace opinfer {

Index data_row_count(Index n, int degree, Index p) {
  Index rows = p;
  for (int i = 1; i <= degree; ++i) rows += compressed_dim(n, i);
  return rows;
}

DataMatrix assemble_data_matrix(const Eigen::MatrixXd& states, const Eigen::MatrixXd& inputs, int degree,
                                DataSource source) {
  if (degree < 1) throw std::invalid_argument("assemble_data_matrix: degree must be positive");
  const Index n = states.rows();
  const Index K = states.cols();
  const Index p = inputs.size() == 0 ? 0 : inputs.rows();
  if (p > 0 && inputs.cols() != K) throw std::invalid_argument("assemble_data_matrix: states and inputs differ in length");
  if (!states.allFinite() || !inputs.allFinite()) throw std::invalid_argument("assemble_data_matrix: non-finite data");
  DataMatrix out;
  out.reduced_dim = n;
  out.degree = degree;
  out.input_dim = p;
  out.source = source;
  out.D.resize(data_row_count(n, degree, p), K);
  Index row = 0;
  for (int i = 1; i <= degree; ++i) {
    const Index ni = compressed_dim(n, i);
    out.D.middleRows(row, ni) = compressed_power_columns(states, i);
    row += ni;
  }
  if (p > 0) out.D.bottomRows(p) = inputs;
  return out;
}

namespace {

Index numerical_rank(const Eigen::VectorXd& sigma) {
  const double s1 = sigma.size() > 0 ? sigma[0] : 0.0;
  Index r = 0;
  for (Index j = 0; j < sigma.size(); ++j) {
    if (s1 > 0.0 && sigma[j] > kRankTolerance * s1) ++r;
  }
  return r;
}

// 1 / row norm, or 1 for zero rows.
Eigen::VectorXd equilibration(const Eigen::VectorXd& row_norms) {
  Eigen::VectorXd s(row_norms.size());
  for (Index j = 0; j < s.size(); ++j) s[j] = row_norms[j] > 0.0 ? 1.0 / row_norms[j] : 1.0;
  return s;
}

}  // namespace

RecoveryCertificate certificate_from_singular_values(const Eigen::VectorXd& sigma, const Eigen::VectorXd& scaled_sigma,
                                                     Index K, Index required) {
  RecoveryCertificate c;
  c.K = K;
  c.required = required;
  c.singular_values = sigma;
  c.equilibrated_singular_values = scaled_sigma;
  c.numerical_rank = numerical_rank(scaled_sigma);
  const double s1 = sigma.size() > 0 ? sigma[0] : 0.0;
  // cond(D^T D) uses the smallest of the `required` singular values; missing
  // ones (K < required) are zero.
  const double smin = sigma.size() >= required && required > 0 ? sigma[required - 1] : 0.0;
  if (!(s1 > 0.0) || smin < std::numeric_limits<double>::min()) {
    c.condition = std::numeric_limits<double>::infinity();
  } else {
    const double ratio = s1 / smin;
    c.condition = ratio * ratio;
  }
  c.satisfied = K >= required && c.numerical_rank == required;
  return c;
}

RecoveryCertificate certify(const DataMatrix& D) {
  Eigen::VectorXd sigma, scaled;
  if (D.cols() > 0) {
    sigma = Eigen::BDCSVD<Eigen::MatrixXd>(D.D).singularValues();
    const Eigen::VectorXd s = equilibration(D.D.rowwise().norm());
    scaled = Eigen::BDCSVD<Eigen::MatrixXd>(s.asDiagonal() * D.D).singularValues();
  }
  return certificate_from_singular_values(sigma, scaled, D.cols(), D.rows());
}

TrajectoryPiece piece_from_trajectory(const Eigen::MatrixXd& states, const Eigen::MatrixXd& inputs) {
  TrajectoryPiece piece;
  const Index K = std::max<Index>(states.cols() - 1, 0);
  piece.states = states.leftCols(K);
  piece.next_states = states.middleCols(states.cols() > 0 ? 1 : 0, K);
  if (inputs.rows() > 0 && inputs.cols() < K) throw std::invalid_argument("piece_from_trajectory: too few inputs");
  piece.inputs = inputs.rows() > 0 ? Eigen::MatrixXd(inputs.leftCols(K)) : Eigen::MatrixXd(0, K);
  return piece;
}

TrajectoryPiece concat_trajectories(const std::vector<TrajectoryPiece>& pieces) {
  if (pieces.empty()) throw std::invalid_argument("concat_trajectories: no pieces");
  const Index n = pieces.front().states.rows();
  const Index p = pieces.front().inputs.rows();
  Index K = 0;
  for (const auto& piece : pieces) {
    if (piece.states.rows() != n || piece.next_states.rows() != n || piece.inputs.rows() != p) {
      throw std::invalid_argument("concat_trajectories: inconsistent dimensions");
    }
    if (piece.next_states.cols() != piece.cols() || piece.inputs.cols() != piece.cols()) {
      throw std::invalid_argument("concat_trajectories: piece columns do not pair up");
    }
    K += piece.cols();
  }
  TrajectoryPiece out;
  out.states.resize(n, K);
  out.next_states.resize(n, K);
  out.inputs.resize(p, K);
  Index offset = 0;
  for (const auto& piece : pieces) {
    out.states.middleCols(offset, piece.cols()) = piece.states;
    out.next_states.middleCols(offset, piece.cols()) = piece.next_states;
    out.inputs.middleCols(offset, piece.cols()) = piece.inputs;
    offset += piece.cols();
  }
  return out;
}

TrajectoryPiece reproject_sample(const FullOrderModel& fom, const Basis& V, const Eigen::VectorXd& x0,
                                 const Eigen::MatrixXd& U, Index K) {
  if (fom.state_dim() != V.full_dim()) throw std::invalid_argument("reproject_sample: basis rows != state dimension");
  check_simulation_args(fom.state_dim(), fom.input_dim(), x0, U, K);
  const Eigen::MatrixXd& Vm = V.matrix();
  Eigen::VectorXd zbar = Vm.transpose() * x0;
  const double off = (x0 - Vm * zbar).norm();
  if (!(off <= kSpanTolerance * x0.norm())) {
    throw std::invalid_argument("reproject_sample: initial condition is not in the span of the basis");
  }
  const Index n = V.dim();
  const Index p = fom.input_dim();
  TrajectoryPiece piece;
  piece.states.resize(n, K);
  piece.next_states.resize(n, K);
  piece.inputs = p > 0 ? Eigen::MatrixXd(U.leftCols(K)) : Eigen::MatrixXd(0, K);
  Eigen::VectorXd x(fom.state_dim()), fx(fom.state_dim()), u(p), next(n);
  for (Index k = 0; k < K; ++k) {
    x.noalias() = Vm * zbar;
    if (p > 0) u = U.col(k);
    fom.step_into(x, u, fx);
    next.noalias() = Vm.transpose() * fx;
    if (!next.allFinite()) {
      piece.diverged_at = k + 1;
      piece.states.conservativeResize(Eigen::NoChange, k);
      piece.next_states.conservativeResize(Eigen::NoChange, k);
      piece.inputs.conservativeResize(Eigen::NoChange, k);
      return piece;
    }
    piece.states.col(k) = zbar;
    piece.next_states.col(k) = next;
    zbar = next;
  }
  return piece;
}

LeastSquaresAccumulator::LeastSquaresAccumulator(Index reduced_dim, int degree, Index input_dim, Index block_cols)
    : n_(reduced_dim), p_(input_dim), degree_(degree) {
  if (reduced_dim < 1 || degree < 1 || input_dim < 0) throw std::invalid_argument("LeastSquaresAccumulator: bad shape");
  d_ = data_row_count(n_, degree_, p_);
  block_cols_ = std::max(block_cols, d_ + n_);
  R_ = Eigen::MatrixXd::Zero(d_ + n_, d_ + n_);
  pending_.resize(block_cols_, d_ + n_);
}

void LeastSquaresAccumulator::add(const Eigen::MatrixXd& states, const Eigen::MatrixXd& next_states,
                                  const Eigen::MatrixXd& inputs) {
  const Index K = states.cols();
  if (states.rows() != n_ || next_states.rows() != n_ || next_states.cols() != K) {
    throw std::invalid_argument("LeastSquaresAccumulator: state blocks have wrong shape");
  }
  if (inputs.rows() != p_ || (p_ > 0 && inputs.cols() != K)) {
    throw std::invalid_argument("LeastSquaresAccumulator: input block has wrong shape");
  }
  if (!states.allFinite() || !next_states.allFinite() || !inputs.allFinite()) {
    throw std::invalid_argument("LeastSquaresAccumulator: non-finite data");
  }
  Eigen::VectorXd z;
  for (Index k = 0; k < K; ++k) {
    z = states.col(k);
    auto row = pending_.row(pending_rows_);
    Index offset = 0;
    row.segment(0, n_) = z.transpose();
    offset = n_;
    for (int i = 2; i <= degree_; ++i) {
      compressed_power_into(z, i, power_, scratch_);
      row.segment(offset, power_.size()) = power_.transpose();
      offset += power_.size();
    }
    if (p_ > 0) row.segment(offset, p_) = inputs.col(k).transpose();
    row.segment(d_, n_) = next_states.col(k).transpose();
    if (++pending_rows_ == block_cols_) flush();
  }
  count_ += K;
}

void LeastSquaresAccumulator::add_data(const Eigen::MatrixXd& D, const Eigen::MatrixXd& Y) {
  if (D.rows() != d_ || Y.rows() != n_ || Y.cols() != D.cols()) {
    throw std::invalid_argument("LeastSquaresAccumulator: data blocks have wrong shape");
  }
  if (!D.allFinite() || !Y.allFinite()) throw std::invalid_argument("LeastSquaresAccumulator: non-finite data");
  for (Index k = 0; k < D.cols(); ++k) {
    pending_.row(pending_rows_).head(d_) = D.col(k).transpose();
    pending_.row(pending_rows_).tail(n_) = Y.col(k).transpose();
    if (++pending_rows_ == block_cols_) flush();
  }
  count_ += D.cols();
}

void LeastSquaresAccumulator::flush() {
  if (pending_rows_ == 0) return;
  const Index w = d_ + n_;
  Eigen::MatrixXd stacked(w + pending_rows_, w);
  stacked.topRows(w) = R_;
  stacked.bottomRows(pending_rows_) = pending_.topRows(pending_rows_);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(std::move(stacked));
  R_ = qr.matrixQR().topRows(w).triangularView<Eigen::Upper>();
  pending_rows_ = 0;
}

LeastSquaresAccumulator::Solution LeastSquaresAccumulator::solve() {
  flush();
  const Eigen::MatrixXd R11 = R_.topLeftCorner(d_, d_);
  const Eigen::MatrixXd R12 = R_.topRightCorner(d_, n_);
  const Eigen::MatrixXd R22 = R_.bottomRightCorner(n_, n_);
  // Column j of R11 has the norm of row j of D, so scaling its columns
  // equilibrates the rows of D.
  const Eigen::VectorXd s = equilibration(R11.colwise().norm().transpose());
  const Eigen::MatrixXd R11s = R11 * s.asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(R11s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Solution sol;
  sol.certificate = certificate_from_singular_values(Eigen::BDCSVD<Eigen::MatrixXd>(R11).singularValues(),
                                                    svd.singularValues(), count_, d_);
  Eigen::MatrixXd W;
  if (sol.certificate.satisfied) {
    W = s.asDiagonal() * R11s.triangularView<Eigen::Upper>().solve(R12);
  } else {
    // Minimum norm in the equilibrated variables.
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cut = sv.size() > 0 ? kRankTolerance * sv[0] : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Index j = 0; j < sv.size(); ++j) {
      if (sv[j] > cut && sv[j] > 0.0) inv[j] = 1.0 / sv[j];
    }
    W = s.asDiagonal() * (svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * R12));
  }
  sol.residual = std::sqrt(R22.squaredNorm() + (R11 * W - R12).squaredNorm());
  sol.O = W.transpose();
  return sol;
}

InferenceResult infer_operators(const DataMatrix& D, const Eigen::MatrixXd& Y, Provenance provenance) {
  if (D.cols() < 1) throw std::invalid_argument("infer_operators: need at least one data column");
  if (Y.rows() != D.reduced_dim || Y.cols() != D.cols()) throw std::invalid_argument("infer_operators: Y has wrong shape");
  LeastSquaresAccumulator acc(D.reduced_dim, D.degree, D.input_dim);
  acc.add_data(D.D, Y);
  auto sol = acc.solve();
  return {PolynomialModel::from_operator_matrix(sol.O, D.degree, D.input_dim, provenance), sol.residual,
          std::move(sol.certificate)};
}

InferenceResult infer_from_pieces(const std::vector<TrajectoryPiece>& pieces, int degree, Provenance provenance) {
  if (pieces.empty()) throw std::invalid_argument("infer_from_pieces: no pieces");
  const Index n = pieces.front().states.rows();
  const Index p = pieces.front().inputs.rows();
  LeastSquaresAccumulator acc(n, degree, p);
  for (const auto& piece : pieces) acc.add(piece);
  if (acc.column_count() < 1) throw std::invalid_argument("infer_from_pieces: no data columns");
  auto sol = acc.solve();
  return {PolynomialModel::from_operator_matrix(sol.O, degree, p, provenance), sol.residual,
          std::move(sol.certificate)};
}

ReprojectionResult learn_with_reprojection(const FomFactory& factory, const ReprojectionSetup& setup) {
  const std::size_t m = setup.params.size();
  if (m == 0) throw std::invalid_argument("learn_with_reprojection: no parameters");
  if (setup.x0.size() != m || setup.inputs.size() != m) {
    throw std::invalid_argument("learn_with_reprojection: x0/inputs must have one entry per parameter");
  }
  if (setup.K < 1 || setup.nbar < 1) throw std::invalid_argument("learn_with_reprojection: K and nbar must be positive");
  const Index horizon = setup.horizon.value_or(setup.K);
  if (horizon < 1 || horizon > setup.K) throw std::invalid_argument("learn_with_reprojection: bad horizon");

  std::vector<std::shared_ptr<const FullOrderModel>> foms(m);
  for (std::size_t j = 0; j < m; ++j) foms[j] = factory(setup.params[j]);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t j = 0; j < m; ++j) {
    if (setup.inputs[j].empty()) throw std::invalid_argument("learn_with_reprojection: parameter without inputs");
    for (std::size_t l = 0; l < setup.inputs[j].size(); ++l) pairs.emplace_back(j, l);
  }
  std::vector<Trajectory> trajs(pairs.size());
  parallel_for(pairs.size(), setup.threads, [&](std::size_t t) {
    const auto [j, l] = pairs[t];
    trajs[t] = simulate(*foms[j], setup.x0[j], setup.inputs[j][l], setup.K);
  });
  SnapshotAccumulator snapshots(foms.front()->state_dim());
  for (const auto& traj : trajs) {
    if (traj.diverged()) throw std::runtime_error("learn_with_reprojection: full model diverged on training input");
    snapshots.add(traj.states.leftCols(setup.K));
  }
  trajs.clear();

  ReprojectionResult result;
  result.basis = snapshots.basis(setup.nbar);
  result.models.resize(m);
  result.certificates.resize(m);
  result.residuals.assign(m, 0.0);
  result.errors.assign(m, "");
  parallel_for(m, setup.threads, [&](std::size_t j) {
    try {
      std::vector<TrajectoryPiece> pieces;
      for (const auto& U : setup.inputs[j]) {
        pieces.push_back(reproject_sample(*foms[j], result.basis, setup.x0[j], U, horizon));
        if (pieces.back().diverged_at) throw std::runtime_error("re-projected sampling diverged");
      }
      auto fit = infer_from_pieces(pieces, foms[j]->degree(), Provenance::inferred_reprojected);
      result.certificates[j] = fit.certificate;
      result.residuals[j] = fit.residual;
      result.models[j] = std::move(fit.model);
    } catch (const std::exception& e) {
      result.errors[j] = e.what();
    }
  });
  return result;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::size_t failed_index = count;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace opinfer
