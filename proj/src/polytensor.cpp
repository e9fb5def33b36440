#include "opinfer/polytensor.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace opinfer {

namespace {

Index checked_binomial(Index n, Index k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  using wide = unsigned __int128;
  constexpr auto limit = static_cast<wide>(std::numeric_limits<Index>::max());
  wide c = 1;
  for (Index j = 1; j <= k; ++j) {
    c = c * static_cast<wide>(n - k + j) / static_cast<wide>(j);
    if (c > limit) {
      throw std::overflow_error("binomial(" + std::to_string(n) + ", " + std::to_string(k) +
                                ") does not fit in a signed 64-bit index");
    }
  }
  return static_cast<Index>(c);
}

std::int64_t checked_pow(Index base, int exponent) {
  std::int64_t result = 1;
  for (int e = 0; e < exponent; ++e) {
    if (result > kMaxKroneckerSize / std::max<Index>(base, 1)) {
      throw std::length_error("Kronecker power " + std::to_string(base) + "^" +
                              std::to_string(exponent) + " exceeds the materialization guard");
    }
    result *= base;
  }
  if (result > kMaxKroneckerSize) {
    throw std::length_error("Kronecker power exceeds the materialization guard");
  }
  return result;
}

void require_positive(Index N, int i) {
  if (N < 1) throw std::invalid_argument("compressed power: base dimension must be >= 1");
  if (i < 1) throw std::invalid_argument("compressed power: degree must be >= 1");
}

// Offset of the first degree-d multiset whose smallest entry is >= a.
Index suffix_offset(Index N, int d, Index a) { return multiset_count(N, d) - multiset_count(N - a, d); }

}  // namespace

Index multiset_count(Index N, int i) {
  if (i == 0) return 1;
  if (N <= 0) return 0;
  return checked_binomial(N + i - 1, i);
}

Index compressed_dim(Index N, int i) {
  require_positive(N, i);
  return multiset_count(N, i);
}

bool next_multiset(MultisetIndex& alpha, Index N) {
  auto& e = alpha.entries;
  for (auto j = static_cast<std::ptrdiff_t>(e.size()) - 1; j >= 0; --j) {
    if (e[j] < N - 1) {
      const Index v = e[j] + 1;
      std::fill(e.begin() + j, e.end(), v);
      return true;
    }
  }
  return false;
}

std::vector<MultisetIndex> enumerate_multisets(Index N, int i) {
  const Index count = compressed_dim(N, i);
  std::vector<MultisetIndex> out;
  out.reserve(static_cast<std::size_t>(count));
  MultisetIndex alpha{std::vector<Index>(static_cast<std::size_t>(i), 0)};
  do {
    out.push_back(alpha);
  } while (next_multiset(alpha, N));
  return out;
}

Index multiset_rank(const MultisetIndex& alpha, Index N) {
  const int i = alpha.degree();
  Index rank = 0;
  Index prev = 0;
  for (int j = 0; j < i; ++j) {
    const Index a = alpha.entries[static_cast<std::size_t>(j)];
    if (a < prev || a >= N) throw std::invalid_argument("multiset_rank: tuple not sorted or out of range");
    for (Index v = prev; v < a; ++v) rank += multiset_count(N - v, i - j - 1);
    prev = a;
  }
  return rank;
}

MultisetIndex multiset_unrank(Index rank, Index N, int i) {
  if (rank < 0 || rank >= compressed_dim(N, i)) throw std::out_of_range("multiset_unrank: rank out of range");
  MultisetIndex alpha{std::vector<Index>(static_cast<std::size_t>(i), 0)};
  Index v = 0;
  for (int j = 0; j < i; ++j) {
    while (rank >= multiset_count(N - v, i - j - 1)) {
      rank -= multiset_count(N - v, i - j - 1);
      ++v;
    }
    alpha.entries[static_cast<std::size_t>(j)] = v;
  }
  return alpha;
}

Index multiplicity(const MultisetIndex& alpha) {
  // Multinomial coefficient as a product of binomials over runs of equal entries.
  Index result = 1;
  Index placed = 0;
  const auto& e = alpha.entries;
  for (std::size_t j = 0; j < e.size();) {
    std::size_t run = 1;
    while (j + run < e.size() && e[j + run] == e[j]) ++run;
    placed += static_cast<Index>(run);
    result *= checked_binomial(placed, static_cast<Index>(run));
    j += run;
  }
  return result;
}

void compressed_power_into(const Eigen::VectorXd& x, int i, Eigen::VectorXd& out, Eigen::VectorXd& scratch) {
  const Index N = x.size();
  require_positive(N, i);
  const Index total = compressed_dim(N, i);
  out.resize(total);
  scratch.resize(total);
  if (i == 1) {
    out = x;
    return;
  }
  // Ping-pong between the two buffers so that degree i lands in `out`.
  Eigen::VectorXd* src = (i % 2 == 0) ? &scratch : &out;
  Eigen::VectorXd* dst = (i % 2 == 0) ? &out : &scratch;
  src->head(N) = x;
  for (int d = 2; d <= i; ++d) {
    for (Index a = 0; a < N; ++a) {
      const Index len = multiset_count(N - a, d - 1);
      dst->segment(suffix_offset(N, d, a), len) = x[a] * src->segment(suffix_offset(N, d - 1, a), len);
    }
    std::swap(src, dst);
  }
}

CompressedPower compressed_power(const Eigen::VectorXd& x, int i) {
  CompressedPower p;
  p.degree = i;
  p.base_dim = x.size();
  Eigen::VectorXd scratch;
  compressed_power_into(x, i, p.values, scratch);
  return p;
}

Eigen::MatrixXd compressed_power_columns(const Eigen::MatrixXd& X, int i) {
  const Index N = X.rows();
  require_positive(N, i);
  Eigen::MatrixXd level = X;
  for (int d = 2; d <= i; ++d) {
    Eigen::MatrixXd next(multiset_count(N, d), X.cols());
    for (Index a = 0; a < N; ++a) {
      const Index len = multiset_count(N - a, d - 1);
      next.middleRows(suffix_offset(N, d, a), len) =
          level.middleRows(suffix_offset(N, d - 1, a), len).array().rowwise() * X.row(a).array();
    }
    level = std::move(next);
  }
  return level;
}

Eigen::SparseMatrix<double> selection_matrix(Index N, int i) {
  require_positive(N, i);
  const std::int64_t full = checked_pow(N, i);
  const Index rows = compressed_dim(N, i);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(rows));
  Index r = 0;
  for (const auto& alpha : enumerate_multisets(N, i)) {
    Index pos = 0;
    for (Index a : alpha.entries) pos = pos * N + a;
    triplets.emplace_back(r++, pos, 1.0);
  }
  Eigen::SparseMatrix<double> sel(rows, full);
  sel.setFromTriplets(triplets.begin(), triplets.end());
  return sel;
}

Eigen::SparseMatrix<double> duplication_matrix(Index N, int i) {
  require_positive(N, i);
  const std::int64_t full = checked_pow(N, i);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(full));
  MultisetIndex alpha{std::vector<Index>(static_cast<std::size_t>(i), 0)};
  for (std::int64_t t = 0; t < full; ++t) {
    std::int64_t rem = t;
    for (int j = i - 1; j >= 0; --j) {
      alpha.entries[static_cast<std::size_t>(j)] = rem % N;
      rem /= N;
    }
    std::sort(alpha.entries.begin(), alpha.entries.end());
    triplets.emplace_back(t, multiset_rank(alpha, N), 1.0);
  }
  Eigen::SparseMatrix<double> dup(full, compressed_dim(N, i));
  dup.setFromTriplets(triplets.begin(), triplets.end());
  return dup;
}

}  // namespace opinfer
