#include "opinfer/fom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "opinfer/csv.hpp"
#include "opinfer/polytensor.hpp"
#include "opinfer/random.hpp"

namespace opinfer {

Eigen::VectorXd FullOrderModel::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  Eigen::VectorXd next;
  step_into(x, u, next);
  return next;
}

Eigen::VectorXd FullOrderModel::step_via_forms(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  check_step_args(x, u);
  Eigen::VectorXd out = input_dim() > 0 ? input_action(u) : Eigen::VectorXd::Zero(state_dim());
  for (int i = 1; i <= degree(); ++i) {
    std::vector<Eigen::VectorXd> args(static_cast<std::size_t>(i), x);
    out += multilinear(i, args);
  }
  return out;
}

Eigen::MatrixXd FullOrderModel::input_matrix() const {
  Eigen::MatrixXd B(state_dim(), input_dim());
  for (Index j = 0; j < input_dim(); ++j) B.col(j) = input_action(Eigen::VectorXd::Unit(input_dim(), j));
  return B;
}

void FullOrderModel::check_step_args(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  if (x.size() != state_dim()) throw std::invalid_argument(name() + ": state has wrong length");
  if (u.size() != input_dim()) throw std::invalid_argument(name() + ": input has wrong length");
}

void FullOrderModel::check_form_args(int i, std::span<const Eigen::VectorXd> args) const {
  if (i < 1 || i > degree()) throw std::invalid_argument(name() + ": multilinear degree out of range");
  if (static_cast<int>(args.size()) != i) throw std::invalid_argument(name() + ": wrong number of form arguments");
  for (const auto& w : args) {
    if (w.size() != state_dim()) throw std::invalid_argument(name() + ": form argument has wrong length");
  }
}

void check_simulation_args(Index state_dim, Index input_dim, const Eigen::VectorXd& x0, const Eigen::MatrixXd& U,
                           Index K) {
  if (K < 0) throw std::invalid_argument("simulate: K must be non-negative");
  if (x0.size() != state_dim) throw std::invalid_argument("simulate: initial state has wrong length");
  if (input_dim > 0) {
    if (U.rows() != input_dim) throw std::invalid_argument("simulate: input matrix has wrong row count");
    if (U.cols() < K) throw std::invalid_argument("simulate: fewer input columns than time steps");
  }
}

Eigen::VectorXd input_column(const Eigen::MatrixXd& U, Index k) {
  if (U.rows() == 0) return {};
  return U.col(k);
}

Trajectory simulate(const FullOrderModel& model, const Eigen::VectorXd& x0, const Eigen::MatrixXd& U, Index K) {
  check_simulation_args(model.state_dim(), model.input_dim(), x0, U, K);
  Trajectory traj;
  if (!x0.allFinite()) {
    traj.states.resize(model.state_dim(), 0);
    traj.diverged_at = 0;
    return traj;
  }
  traj.states.resize(model.state_dim(), K + 1);
  traj.states.col(0) = x0;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd next;
  Eigen::VectorXd u(model.input_dim());
  for (Index k = 0; k < K; ++k) {
    if (u.size() > 0) u = U.col(k);
    model.step_into(x, u, next);
    if (!next.allFinite()) {
      traj.diverged_at = k + 1;
      traj.states.conservativeResize(Eigen::NoChange, k + 1);
      return traj;
    }
    traj.states.col(k + 1) = next;
    x.swap(next);
  }
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << 'k';
  for (Index i = 0; i < traj.states.rows(); ++i) os << ",x" << i;
  os << '\n';
  for (Index k = 0; k < traj.states.cols(); ++k) {
    os << k;
    for (Index i = 0; i < traj.states.rows(); ++i) os << ',' << format_double(traj.states(i, k));
    os << '\n';
  }
}

DensePolynomialFom::DensePolynomialFom(std::vector<Eigen::MatrixXd> operators, Eigen::MatrixXd input_operator,
                                       Eigen::VectorXd parameter, std::string name)
    : A_(std::move(operators)), B_(std::move(input_operator)), mu_(std::move(parameter)), name_(std::move(name)) {
  if (A_.empty()) throw std::invalid_argument("DensePolynomialFom: need at least a linear operator");
  state_dim_ = A_.front().rows();
  for (std::size_t k = 0; k < A_.size(); ++k) {
    const int i = static_cast<int>(k) + 1;
    if (A_[k].rows() != state_dim_ || A_[k].cols() != compressed_dim(state_dim_, i)) {
      throw std::invalid_argument("DensePolynomialFom: operator " + std::to_string(i) + " has wrong shape");
    }
  }
  if (B_.size() == 0) B_.resize(state_dim_, 0);
  if (B_.rows() != state_dim_) throw std::invalid_argument("DensePolynomialFom: input operator has wrong row count");
}

void DensePolynomialFom::step_into(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::VectorXd& next) const {
  check_step_args(x, u);
  next.noalias() = A_.front() * x;
  Eigen::VectorXd power, scratch;
  for (std::size_t k = 1; k < A_.size(); ++k) {
    compressed_power_into(x, static_cast<int>(k) + 1, power, scratch);
    next.noalias() += A_[k] * power;
  }
  if (B_.cols() > 0) next.noalias() += B_ * u;
}

Eigen::VectorXd DensePolynomialFom::multilinear(int i, std::span<const Eigen::VectorXd> args) const {
  check_form_args(i, args);
  if (i == 1) return A_.front() * args[0];
  // Symmetrized monomials: s_alpha = (1/i!) sum over permutations of prod_j w_sigma(j)[alpha_j].
  const auto multisets = enumerate_multisets(state_dim_, i);
  Eigen::VectorXd s(static_cast<Index>(multisets.size()));
  std::vector<int> perm(static_cast<std::size_t>(i));
  double factorial = 1.0;
  for (int j = 2; j <= i; ++j) factorial *= j;
  for (std::size_t c = 0; c < multisets.size(); ++c) {
    const auto& alpha = multisets[c].entries;
    std::iota(perm.begin(), perm.end(), 0);
    double sum = 0.0;
    do {
      double prod = 1.0;
      for (int j = 0; j < i; ++j) prod *= args[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])][alpha[static_cast<std::size_t>(j)]];
      sum += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    s[static_cast<Index>(c)] = sum / factorial;
  }
  return A_[static_cast<std::size_t>(i - 1)] * s;
}

Eigen::VectorXd DensePolynomialFom::input_action(const Eigen::VectorXd& u) const {
  if (u.size() != B_.cols()) throw std::invalid_argument(name_ + ": input has wrong length");
  return B_ * u;
}

namespace {

Eigen::MatrixXd uniform_matrix(Rng& rng, Index rows, Index cols, double low, double high) {
  Eigen::MatrixXd M(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) M(r, c) = rng.uniform(low, high);
  return M;
}

}  // namespace

std::shared_ptr<DensePolynomialFom> make_toy_linear(Index N, std::uint64_t seed, double radius) {
  if (N < 1) throw std::invalid_argument("make_toy_linear: N must be positive");
  if (!(radius > 0.0 && radius < 1.0)) throw std::invalid_argument("make_toy_linear: radius must lie in (0, 1)");
  Rng rng(seed);
  Eigen::MatrixXd A = uniform_matrix(rng, N, N, 0.0, 1.0);
  const double rho = Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().cwiseAbs().maxCoeff();
  A *= radius / rho;
  return std::make_shared<DensePolynomialFom>(std::vector<Eigen::MatrixXd>{A}, Eigen::MatrixXd(N, 0),
                                              Eigen::VectorXd{}, "toy");
}

std::shared_ptr<DensePolynomialFom> make_random_polynomial(Index N, int degree, Index p, std::uint64_t seed,
                                                           double linear_norm, double nonlinear_scale) {
  if (N < 1 || degree < 1 || p < 0) throw std::invalid_argument("make_random_polynomial: bad dimensions");
  Rng rng(seed);
  std::vector<Eigen::MatrixXd> ops;
  Eigen::MatrixXd A1 = uniform_matrix(rng, N, N, -1.0, 1.0);
  A1 *= linear_norm / Eigen::JacobiSVD<Eigen::MatrixXd>(A1).singularValues()(0);
  ops.push_back(std::move(A1));
  for (int i = 2; i <= degree; ++i) {
    const Index cols = compressed_dim(N, i);
    ops.push_back(uniform_matrix(rng, N, cols, -1.0, 1.0) * (nonlinear_scale / std::sqrt(static_cast<double>(cols))));
  }
  Eigen::MatrixXd B = uniform_matrix(rng, N, p, -1.0, 1.0);
  return std::make_shared<DensePolynomialFom>(std::move(ops), std::move(B), Eigen::VectorXd{}, "random");
}

}  // namespace opinfer
