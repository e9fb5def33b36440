#pragma once

// Finite-difference benchmark systems, all discretized in time with forward
// Euler so that each step map is exactly polynomial in the state.

#include <array>
#include <memory>

#include "opinfer/fom.hpp"

namespace opinfer {

/// Viscous Burgers' equation on (-1, 1) with x(-1, t) = u(t), x(1, t) = -u(t).
///
/// The grid has `nodes` equidistant points including both boundary points;
/// the boundary values are states whose update is x_{k+1} = +/- u_k, so the
/// stencil rows next to the boundary stay polynomial in the state alone.
/// Convection uses central differences x_j (x_{j+1} - x_{j-1}) / (2h).
/// Degree 2, one input; A_2 and B do not depend on mu.
class BurgersFom final : public FullOrderModel {
 public:
  BurgersFom(Index nodes, double mu, double dt);

  Index state_dim() const override { return nodes_; }
  Index input_dim() const override { return 1; }
  int degree() const override { return 2; }
  std::string name() const override { return "burgers"; }
  Eigen::VectorXd parameter() const override { return Eigen::VectorXd::Constant(1, mu_); }

  void step_into(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::VectorXd& next) const override;
  Eigen::VectorXd multilinear(int i, std::span<const Eigen::VectorXd> args) const override;
  Eigen::VectorXd input_action(const Eigen::VectorXd& u) const override;

  double mesh_width() const { return h_; }
  double mu() const { return mu_; }
  double dt() const { return dt_; }

 private:
  void linear_into(const Eigen::VectorXd& w, Eigen::VectorXd& out) const;

  Index nodes_;
  double mu_;
  double dt_;
  double h_;
};

inline constexpr double kBurgersMuMin = 0.1;
inline constexpr double kBurgersMuMax = 1.0;

std::shared_ptr<BurgersFom> make_burgers(double mu, Index nodes = 128, double dt = 1e-4);

/// Chafee-Infante equation x_t = x_xx + x - x^3 on (0, 1), x(0, t) = u(t),
/// x_xi(1, t) = 0. Unknowns sit at xi_j = j h, j = 1..N, h = 1/N; the
/// Dirichlet value is eliminated into B and the Neumann end uses a mirrored
/// ghost node. Degree 3; the quadratic form is identically zero.
class ChafeeInfanteFom final : public FullOrderModel {
 public:
  ChafeeInfanteFom(Index unknowns, double dt);

  Index state_dim() const override { return n_; }
  Index input_dim() const override { return 1; }
  int degree() const override { return 3; }
  std::string name() const override { return "chafee"; }

  void step_into(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::VectorXd& next) const override;
  Eigen::VectorXd multilinear(int i, std::span<const Eigen::VectorXd> args) const override;
  Eigen::VectorXd input_action(const Eigen::VectorXd& u) const override;

  double mesh_width() const { return h_; }
  double dt() const { return dt_; }

 private:
  void linear_into(const Eigen::VectorXd& w, Eigen::VectorXd& out) const;

  Index n_;
  double dt_;
  double h_;
};

std::shared_ptr<ChafeeInfanteFom> make_chafee_infante(Index unknowns = 128, double dt = 1e-5);

/// u_k = 25 (sin(pi t_k) + 1), t_k = k dt, as a 1 x K input matrix.
Eigen::MatrixXd chafee_test_input(Index K, double dt);

/// Coefficients g_0..g_3 of the Taylor expansion about 0 of
/// g(x) = -(a sin(mu) + 2) exp(-mu^2 b) exp(mu c x), a = 0.1, b = 2.7, c = 1.8.
std::array<double, 4> reaction_taylor_coefficients(double mu);

/// Two-dimensional diffusion-reaction equation on (0, 1)^2 with homogeneous
/// Neumann conditions (mirrored ghost nodes), source
/// s(xi) = 0.1 sin(2 pi xi_1) sin(2 pi xi_2) driven by the input, and the
/// reaction replaced by its Taylor polynomial of degree `reaction_degree`
/// (2 or 3). The constant Taylor term enters through a second input channel
/// that callers hold at 1, so p = 2 and the model stays in the polynomial
/// class without an affine term.
class DiffusionReaction2DFom final : public FullOrderModel {
 public:
  DiffusionReaction2DFom(Index grid_points_per_dim, double mu, double dt, int reaction_degree, double diffusivity);

  Index state_dim() const override { return g_ * g_; }
  Index input_dim() const override { return 2; }
  int degree() const override { return degree_; }
  std::string name() const override { return "reaction2d"; }
  Eigen::VectorXd parameter() const override { return Eigen::VectorXd::Constant(1, mu_); }

  void step_into(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::VectorXd& next) const override;
  Eigen::VectorXd multilinear(int i, std::span<const Eigen::VectorXd> args) const override;
  Eigen::VectorXd input_action(const Eigen::VectorXd& u) const override;

  const Eigen::VectorXd& source() const { return source_; }
  const std::array<double, 4>& taylor() const { return taylor_; }
  double mesh_width() const { return h_; }

 private:
  void laplacian_into(const Eigen::VectorXd& w, Eigen::VectorXd& out) const;

  Index g_;
  double mu_;
  double dt_;
  int degree_;
  double kappa_;
  double h_;
  std::array<double, 4> taylor_;
  Eigen::VectorXd source_;
};

inline constexpr double kReactionMuMin = 1.0;
inline constexpr double kReactionMuMax = 1.5;
inline constexpr double kReactionDefaultDiffusivity = 1e-3;

std::shared_ptr<DiffusionReaction2DFom> make_diffusion_reaction_2d(Index grid_points_per_dim, double mu,
                                                                   double dt = 1e-2, int reaction_degree = 3,
                                                                   double diffusivity = kReactionDefaultDiffusivity);

/// Appends the constant-one channel to a 1 x K physical input for the
/// diffusion-reaction model.
Eigen::MatrixXd with_constant_channel(const Eigen::MatrixXd& physical);

}  // namespace opinfer
