#pragma once

// Reduced polynomial models
//
//   z_{k+1} = sum_{i=1}^{l} A_i z_k^i + B u_k,   A_i in R^{n x n_i},
//
// whether built intrusively by Galerkin projection, learned from data, or
// interpolated over a parameter grid. Columns of A_i follow the multiset
// ordering of polytensor.hpp.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opinfer/fom.hpp"
#include "opinfer/subspace.hpp"

namespace opinfer {

enum class Provenance { intrusive, inferred_reprojected, inferred_plain, interpolated };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

class PolynomialModel {
 public:
  PolynomialModel(std::vector<Eigen::MatrixXd> operators, Eigen::MatrixXd input_operator, Provenance provenance);

  /// Splits O = [A_1, ..., A_l, B] into blocks.
  static PolynomialModel from_operator_matrix(const Eigen::MatrixXd& O, int degree, Index input_dim,
                                              Provenance provenance);

  int degree() const { return static_cast<int>(A_.size()); }
  Index reduced_dim() const { return B_.rows(); }
  Index input_dim() const { return B_.cols(); }
  Provenance provenance() const { return provenance_; }

  /// A_i for 1 <= i <= degree().
  const Eigen::MatrixXd& op(int i) const { return A_.at(static_cast<std::size_t>(i - 1)); }
  const std::vector<Eigen::MatrixXd>& ops() const { return A_; }
  const Eigen::MatrixXd& input_operator() const { return B_; }

  /// [A_1, ..., A_l, B].
  Eigen::MatrixXd operator_matrix() const;

  PolynomialModel with_provenance(Provenance p) const;

  /// f~(z, u).
  Eigen::VectorXd step(const Eigen::VectorXd& z, const Eigen::VectorXd& u) const;

 private:
  std::vector<Eigen::MatrixXd> A_;
  Eigen::MatrixXd B_;
  Provenance provenance_;
};

/// Column alpha of A~_i is multiplicity(alpha) * V^T L_i(v_{a_1}, ..., v_{a_i});
/// B~ = V^T B. Costs n_i applications of each multilinear form.
PolynomialModel galerkin_project(const FullOrderModel& fom, const Basis& V);

/// Time steps the reduced model K times; same divergence rule as simulate().
Trajectory reduced_simulate(const PolynomialModel& model, const Eigen::VectorXd& z0, const Eigen::MatrixXd& U,
                            Index K);

/// Keeps the leading n' rows, the columns whose multisets only use modes
/// below n', and the leading n' rows of B.
PolynomialModel truncate(const PolynomialModel& model, Index n_prime);

/// Per-node weights w_j(mu*) of the natural cubic spline through the
/// parameter grid (linear for two nodes); value(mu*) = sum_j w_j y_j.
/// `params` must be strictly increasing.
Eigen::VectorXd natural_spline_weights(const std::vector<double>& params, double mu_star);

/// Entry-wise natural cubic spline interpolation of operators over a scalar
/// parameter grid. Rejects extrapolation and mismatched shapes.
PolynomialModel interpolate(const std::vector<double>& params, const std::vector<PolynomialModel>& models,
                            double mu_star);

/// Metadata stored next to a serialized model.
struct ModelMetadata {
  std::optional<double> mu;
  std::optional<std::uint64_t> seed;
};

inline constexpr const char* kOrderingConvention = "grlex-sorted-tuples-v1";

/// Writes A1.csv .. A<l>.csv, B.csv and manifest.json into `directory`
/// (created if missing).
void write_model_bundle(const std::string& directory, const PolynomialModel& model, const ModelMetadata& meta = {});
PolynomialModel read_model_bundle(const std::string& directory, ModelMetadata* meta = nullptr);

}  // namespace opinfer
