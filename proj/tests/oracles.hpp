#pragma once

// Independent reference computations used by the tests.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "opinfer/fom.hpp"
#include "opinfer/polytensor.hpp"
#include "opinfer/rom.hpp"

namespace oracle {

using opinfer::Index;

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  }
  return K;
}

inline Eigen::MatrixXd kron_power(const Eigen::MatrixXd& A, int i) {
  Eigen::MatrixXd K = A;
  for (int d = 1; d < i; ++d) K = kron(A, K);
  return K;
}

inline Index ipow(Index base, int e) {
  Index r = 1;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

// Digits of a full Kronecker position, most significant first.
inline std::vector<Index> digits(Index pos, Index N, int i) {
  std::vector<Index> d(static_cast<std::size_t>(i));
  for (int k = i - 1; k >= 0; --k) {
    d[static_cast<std::size_t>(k)] = pos % N;
    pos /= N;
  }
  return d;
}

// Full N x N^i operator with column (j1..ji) = L_i(e_j1, ..., e_ji).
inline Eigen::MatrixXd full_operator(const opinfer::FullOrderModel& fom, int i) {
  const Index N = fom.state_dim();
  Eigen::MatrixXd A(N, ipow(N, i));
  std::vector<Eigen::VectorXd> args(static_cast<std::size_t>(i));
  for (Index c = 0; c < A.cols(); ++c) {
    const auto d = digits(c, N, i);
    for (int k = 0; k < i; ++k) args[static_cast<std::size_t>(k)] = Eigen::VectorXd::Unit(N, d[static_cast<std::size_t>(k)]);
    A.col(c) = fom.multilinear(i, args);
  }
  return A;
}

// Reduced operator in compressed coordinates: V^T A_i (V kron ... kron V) Dup_n.
inline Eigen::MatrixXd kronecker_galerkin(const opinfer::FullOrderModel& fom, const Eigen::MatrixXd& V, int i) {
  const Eigen::MatrixXd Dup = Eigen::MatrixXd(opinfer::duplication_matrix(V.cols(), i));
  return V.transpose() * full_operator(fom, i) * kron_power(V, i) * Dup;
}

// Monomials of x for every non-decreasing tuple, enumerated by nested loops.
inline Eigen::VectorXd brute_compressed_power(const Eigen::VectorXd& x, int i) {
  std::vector<double> out;
  std::vector<Index> t(static_cast<std::size_t>(i), 0);
  const Index N = x.size();
  while (true) {
    double v = 1.0;
    for (Index a : t) v *= x[a];
    out.push_back(v);
    int k = i - 1;
    while (k >= 0 && t[static_cast<std::size_t>(k)] == N - 1) --k;
    if (k < 0) break;
    const Index next = t[static_cast<std::size_t>(k)] + 1;
    for (int r = k; r < i; ++r) t[static_cast<std::size_t>(r)] = next;
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Index>(out.size()));
}

inline Eigen::MatrixXd naive_multiply(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(A.rows(), B.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < B.cols(); ++j)
      for (Index k = 0; k < A.cols(); ++k) C(i, j) += A(i, k) * B(k, j);
  return C;
}

inline double rel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const double d = B.norm();
  return d > 0 ? (A - B).norm() / d : (A - B).norm();
}

// Random orthonormal N x n matrix.
inline Eigen::MatrixXd random_orthonormal(Index N, Index n, std::uint64_t seed) {
  std::srand(static_cast<unsigned>(seed));
  Eigen::MatrixXd G = Eigen::MatrixXd::Random(N, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  return qr.householderQ() * Eigen::MatrixXd::Identity(N, n);
}

inline Eigen::MatrixXd random_matrix(Index r, Index c, unsigned seed) {
  std::srand(seed);
  return Eigen::MatrixXd::Random(r, c);
}

// Full model whose dynamics map span(V) into itself and act there as `reduced`.
inline std::shared_ptr<opinfer::DensePolynomialFom> span_preserving_fom(const Eigen::MatrixXd& V,
                                                                        const opinfer::PolynomialModel& reduced,
                                                                        unsigned seed) {
  const Index N = V.rows(), n = V.cols();
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(N, N) - V * V.transpose();
  std::vector<Eigen::MatrixXd> ops;
  for (int i = 1; i <= reduced.degree(); ++i) {
    const Eigen::MatrixXd Sel_n(opinfer::selection_matrix(n, i));
    const Eigen::MatrixXd Dup_N(opinfer::duplication_matrix(N, i));
    Eigen::MatrixXd full = V * reduced.op(i) * Sel_n * kron_power(V.transpose(), i);
    // Extra dynamics on the orthogonal complement only.
    if (i == 1) full += 0.3 * P * random_matrix(N, N, seed) * P;
    ops.push_back(full * Dup_N);
  }
  return std::make_shared<opinfer::DensePolynomialFom>(ops, V * reduced.input_operator());
}

}  // namespace oracle
