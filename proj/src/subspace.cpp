#include "opinfer/subspace.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "opinfer/csv.hpp"

namespace opinfer {

namespace {

void fix_signs(Eigen::MatrixXd& V) {
  for (Index j = 0; j < V.cols(); ++j) {
    Index arg = 0;
    V.col(j).cwiseAbs().maxCoeff(&arg);
    if (V(arg, j) < 0.0) V.col(j) *= -1.0;
  }
}

// Left singular vectors of S from the triangular factor of S^T = Q R:
// S = R^T Q^T, so S and R^T share left singular vectors and singular values.
Basis basis_from_factor(const Eigen::MatrixXd& Rt, Index n, Index snapshot_count) {
  const Index N = Rt.rows();
  if (n < 1 || n > N) throw std::invalid_argument("pod_basis: requested dimension out of range");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Rt, Eigen::ComputeThinU);
  const Eigen::VectorXd sigma = svd.singularValues().head(std::min(N, snapshot_count));
  if (sigma.size() < n || !(sigma[0] > 0.0) || sigma[n - 1] <= kPodRankTolerance * sigma[0]) {
    throw std::invalid_argument("pod_basis: n = " + std::to_string(n) + " exceeds the numerical rank of the snapshots");
  }
  Eigen::MatrixXd V = svd.matrixU().leftCols(n);
  fix_signs(V);
  return Basis(std::move(V), sigma);
}

}  // namespace

Basis::Basis(Eigen::MatrixXd vectors, Eigen::VectorXd singular_values)
    : V_(std::move(vectors)), sigma_(std::move(singular_values)) {
  if (V_.cols() > V_.rows()) throw std::invalid_argument("Basis: more columns than rows");
  const double err = (V_.transpose() * V_ - Eigen::MatrixXd::Identity(V_.cols(), V_.cols())).cwiseAbs().maxCoeff();
  if (V_.cols() > 0 && !(err <= 1e-10)) throw std::invalid_argument("Basis: columns are not orthonormal");
}

Basis Basis::from_orthonormal(Eigen::MatrixXd vectors) { return Basis(std::move(vectors), Eigen::VectorXd{}); }

Basis Basis::leading(Index n) const {
  if (n < 1 || n > dim()) throw std::invalid_argument("Basis::leading: n out of range");
  return Basis(V_.leftCols(n), sigma_);
}

Basis pod_basis(const Eigen::MatrixXd& snapshots, Index n) {
  if (!snapshots.allFinite()) throw std::invalid_argument("pod_basis: snapshots contain non-finite values");
  if (snapshots.cols() == 0) throw std::invalid_argument("pod_basis: empty snapshot matrix");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(snapshots.transpose());
  const Index r = std::min(snapshots.rows(), snapshots.cols());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(snapshots.rows(), snapshots.rows());
  R.topRows(r) = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  return basis_from_factor(R.transpose(), n, snapshots.cols());
}

SnapshotAccumulator::SnapshotAccumulator(Index state_dim, Index block_cols)
    : N_(state_dim), block_cols_(std::max<Index>(block_cols, state_dim)) {
  if (state_dim < 1) throw std::invalid_argument("SnapshotAccumulator: state dimension must be positive");
  R_ = Eigen::MatrixXd::Zero(N_, N_);
  pending_.resize(N_, block_cols_);
}

void SnapshotAccumulator::add(const Eigen::MatrixXd& block) {
  if (block.rows() != N_) throw std::invalid_argument("SnapshotAccumulator: block has wrong row count");
  if (!block.allFinite()) throw std::invalid_argument("SnapshotAccumulator: snapshots contain non-finite values");
  Index offset = 0;
  while (offset < block.cols()) {
    const Index take = std::min(block.cols() - offset, block_cols_ - pending_cols_);
    pending_.middleCols(pending_cols_, take) = block.middleCols(offset, take);
    pending_cols_ += take;
    offset += take;
    if (pending_cols_ == block_cols_) flush();
  }
  count_ += block.cols();
}

void SnapshotAccumulator::flush() {
  if (pending_cols_ == 0) return;
  Eigen::MatrixXd stacked(N_ + pending_cols_, N_);
  stacked.topRows(N_) = R_;
  stacked.bottomRows(pending_cols_) = pending_.leftCols(pending_cols_).transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(std::move(stacked));
  R_ = qr.matrixQR().topRows(N_).triangularView<Eigen::Upper>();
  pending_cols_ = 0;
}

Basis SnapshotAccumulator::basis(Index n) {
  if (count_ == 0) throw std::invalid_argument("SnapshotAccumulator: no snapshots added");
  flush();
  return basis_from_factor(R_.transpose(), n, count_);
}

Eigen::MatrixXd project(const Basis& V, const Eigen::MatrixXd& X) {
  if (X.rows() != V.full_dim()) throw std::invalid_argument("project: dimension mismatch");
  return V.matrix().transpose() * X;
}

Eigen::MatrixXd lift(const Basis& V, const Eigen::MatrixXd& Z) {
  if (Z.rows() != V.dim()) throw std::invalid_argument("lift: dimension mismatch");
  return V.matrix() * Z;
}

void write_basis_csv(std::ostream& os, const Basis& V) {
  os << "sigma";
  for (Index j = 0; j < V.singular_values().size(); ++j) os << ',' << format_double(V.singular_values()[j]);
  os << '\n';
  for (Index j = 0; j < V.dim(); ++j) {
    os << 'v' << j;
    for (Index i = 0; i < V.full_dim(); ++i) os << ',' << format_double(V.matrix()(i, j));
    os << '\n';
  }
}

Basis read_basis_csv(std::istream& is) {
  std::string line;
  std::vector<double> sigma;
  std::vector<std::vector<double>> columns;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    std::vector<double> values;
    for (std::size_t k = 1; k < fields.size(); ++k) values.push_back(std::stod(fields[k]));
    if (fields[0] == "sigma") {
      sigma = std::move(values);
    } else if (!fields[0].empty() && fields[0][0] == 'v') {
      if (std::stoul(fields[0].substr(1)) != columns.size()) throw std::runtime_error("read_basis_csv: columns out of order");
      columns.push_back(std::move(values));
    } else {
      throw std::runtime_error("read_basis_csv: unknown row tag '" + fields[0] + "'");
    }
  }
  if (columns.empty()) throw std::runtime_error("read_basis_csv: no basis vectors");
  const auto N = static_cast<Index>(columns.front().size());
  Eigen::MatrixXd V(N, static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (static_cast<Index>(columns[j].size()) != N) throw std::runtime_error("read_basis_csv: ragged basis vectors");
    V.col(static_cast<Index>(j)) = Eigen::Map<const Eigen::VectorXd>(columns[j].data(), N);
  }
  return Basis(std::move(V), Eigen::Map<const Eigen::VectorXd>(sigma.data(), static_cast<Index>(sigma.size())));
}

}  // namespace opinfer
