#pragma once

// Compressed Kronecker powers.
//
// The i-th compressed power of x in R^N keeps one entry per multiset of i
// mode indices, i.e. binomial(N+i-1, i) monomials instead of N^i. Multisets
// are stored as non-decreasing index tuples and ordered graded-lexicographically
// (lexicographic within a fixed degree). Every operator matrix in the library
// uses this ordering for its columns.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace opinfer {

using Index = Eigen::Index;

/// Non-decreasing tuple of mode indices; its size is the degree.
struct MultisetIndex {
  std::vector<Index> entries;

  int degree() const { return static_cast<int>(entries.size()); }
  bool operator==(const MultisetIndex&) const = default;
};

/// Values of a compressed power, one per multiset in canonical order.
struct CompressedPower {
  int degree = 0;
  Index base_dim = 0;
  Eigen::VectorXd values;
};

/// binomial(N + i - 1, i). Throws std::overflow_error instead of wrapping and
/// std::invalid_argument for N < 1 or i < 1.
Index compressed_dim(Index N, int i);

/// Number of multisets of size i over N symbols, with the convention that
/// the empty multiset (i = 0) counts once. Used for offsets and rank math.
Index multiset_count(Index N, int i);

std::vector<MultisetIndex> enumerate_multisets(Index N, int i);

/// Advances alpha to its lexicographic successor over N symbols. Returns
/// false (leaving alpha untouched) when alpha is the last multiset.
bool next_multiset(MultisetIndex& alpha, Index N);

/// Position of alpha in enumerate_multisets(N, alpha.degree()).
Index multiset_rank(const MultisetIndex& alpha, Index N);
MultisetIndex multiset_unrank(Index rank, Index N, int i);

/// i! / prod(repetition counts!): the number of distinct orderings of alpha.
Index multiplicity(const MultisetIndex& alpha);

CompressedPower compressed_power(const Eigen::VectorXd& x, int i);

/// Column-wise compressed power of every column of X (n x K -> n_i x K).
Eigen::MatrixXd compressed_power_columns(const Eigen::MatrixXd& X, int i);

/// Writes the compressed power of x into out (length compressed_dim(N, i))
/// using scratch as workspace; no allocation once buffers are sized.
void compressed_power_into(const Eigen::VectorXd& x, int i, Eigen::VectorXd& out,
                           Eigen::VectorXd& scratch);

/// Largest N^i that selection_matrix / duplication_matrix will materialize.
inline constexpr std::int64_t kMaxKroneckerSize = std::int64_t{1} << 22;

/// Sparse N_i x N^i matrix with compressed_power(x, i) = Sel * (x kron ... kron x).
/// Row alpha picks the full-Kronecker position of the sorted tuple of alpha.
Eigen::SparseMatrix<double> selection_matrix(Index N, int i);

/// Sparse N^i x N_i matrix with (x kron ... kron x) = Dup * compressed_power(x, i).
Eigen::SparseMatrix<double> duplication_matrix(Index N, int i);

}  // namespace opinfer
