#pragma once

// Full-order polynomial dynamical systems
//
//   x_{k+1} = f(x_k, u_k; mu) = sum_{i=1}^{l} A_i(mu) x_k^i + B(mu) u_k,
//
// exposed through the step map and, per degree, the symmetric multilinear
// form L_i with L_i(x, ..., x) = A_i x^i. Operators are never required in
// assembled form; the Galerkin projection only needs L_i on basis vectors.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace opinfer {

using Index = Eigen::Index;

class FullOrderModel {
 public:
  virtual ~FullOrderModel() = default;

  virtual Index state_dim() const = 0;
  virtual Index input_dim() const = 0;
  virtual int degree() const = 0;
  virtual std::string name() const = 0;

  /// Parameter mu the model was built for (empty for parameter-free models).
  virtual Eigen::VectorXd parameter() const { return {}; }

  /// next = f(x, u). next is resized as needed and must not alias x.
  virtual void step_into(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::VectorXd& next) const = 0;

  /// L_i(w_1, ..., w_i); args.size() must equal i, 1 <= i <= degree().
  virtual Eigen::VectorXd multilinear(int i, std::span<const Eigen::VectorXd> args) const = 0;

  /// B u.
  virtual Eigen::VectorXd input_action(const Eigen::VectorXd& u) const = 0;

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

  /// sum_i L_i(x, ..., x) + B u, evaluated through the multilinear forms.
  Eigen::VectorXd step_via_forms(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

  /// Dense N x p input matrix assembled column by column from input_action.
  Eigen::MatrixXd input_matrix() const;

 protected:
  void check_step_args(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
  void check_form_args(int i, std::span<const Eigen::VectorXd> args) const;
};

/// States x_0, x_1, ... stored column-wise. When a non-finite state appears
/// at index k, diverged_at = k and only columns 0..k-1 are kept.
struct Trajectory {
  Eigen::MatrixXd states;
  std::optional<Index> diverged_at;

  bool diverged() const { return diverged_at.has_value(); }
  Index steps() const { return states.cols(); }
};

/// Time steps K times from x0 using columns 0..K-1 of U. The result holds
/// K + 1 columns unless the state diverged.
Trajectory simulate(const FullOrderModel& model, const Eigen::VectorXd& x0, const Eigen::MatrixXd& U, Index K);

/// Checks shared by every simulator: x0 length, U rows, U columns >= K.
void check_simulation_args(Index state_dim, Index input_dim, const Eigen::VectorXd& x0,
                           const Eigen::MatrixXd& U, Index K);

/// Column k of U, or an empty vector when the model has no inputs.
Eigen::VectorXd input_column(const Eigen::MatrixXd& U, Index k);

/// CSV with header `k,x0,...,x{N-1}`, one row per stored state.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Polynomial system given by explicit compressed operators A_i (N x N_i)
/// and B (N x p). Used for the linear toy system and for randomly drawn
/// test systems; cost scales with N_i, so keep N small.
class DensePolynomialFom final : public FullOrderModel {
 public:
  DensePolynomialFom(std::vector<Eigen::MatrixXd> operators, Eigen::MatrixXd input_operator,
                     Eigen::VectorXd parameter = {}, std::string name = "dense");

  Index state_dim() const override { return state_dim_; }
  Index input_dim() const override { return B_.cols(); }
  int degree() const override { return static_cast<int>(A_.size()); }
  std::string name() const override { return name_; }
  Eigen::VectorXd parameter() const override { return mu_; }

  void step_into(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::VectorXd& next) const override;
  Eigen::VectorXd multilinear(int i, std::span<const Eigen::VectorXd> args) const override;
  Eigen::VectorXd input_action(const Eigen::VectorXd& u) const override;

  const Eigen::MatrixXd& op(int i) const { return A_.at(static_cast<std::size_t>(i - 1)); }
  const Eigen::MatrixXd& input_operator() const { return B_; }

 private:
  Index state_dim_;
  std::vector<Eigen::MatrixXd> A_;
  Eigen::MatrixXd B_;
  Eigen::VectorXd mu_;
  std::string name_;
};

/// Autonomous linear system x_{k+1} = A_1 x_k with A_1 drawn uniformly in
/// [0, 1] and rescaled to spectral radius `radius` (< 1).
std::shared_ptr<DensePolynomialFom> make_toy_linear(Index N, std::uint64_t seed, double radius = 0.95);

/// Random degree-`degree` system with p inputs. The linear part is scaled to
/// spectral norm `linear_norm`; higher-degree columns are scaled by
/// `nonlinear_scale`. Intended for property tests on small N.
std::shared_ptr<DensePolynomialFom> make_random_polynomial(Index N, int degree, Index p, std::uint64_t seed,
                                                           double linear_norm = 0.9,
                                                           double nonlinear_scale = 0.1);

}  // namespace opinfer
