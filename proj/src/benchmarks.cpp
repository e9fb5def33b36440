#include "opinfer/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace opinfer {

// ---------------------------------------------------------------- Burgers

BurgersFom::BurgersFom(Index nodes, double mu, double dt) : nodes_(nodes), mu_(mu), dt_(dt) {
  if (nodes < 3) throw std::invalid_argument("burgers: need at least 3 grid nodes");
  if (!(mu >= kBurgersMuMin && mu <= kBurgersMuMax)) {
    throw std::invalid_argument("burgers: mu = " + std::to_string(mu) + " outside [0.1, 1]");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("burgers: time step must be positive");
  h_ = 2.0 / static_cast<double>(nodes - 1);
}

void BurgersFom::linear_into(const Eigen::VectorXd& w, Eigen::VectorXd& out) const {
  const double c = dt_ * mu_ / (h_ * h_);
  out.setZero(nodes_);
  for (Index j = 1; j + 1 < nodes_; ++j) out[j] = w[j] + c * (w[j + 1] - 2.0 * w[j] + w[j - 1]);
}

void BurgersFom::step_into(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::VectorXd& next) const {
  check_step_args(x, u);
  const double c = dt_ * mu_ / (h_ * h_);
  const double a = dt_ / (2.0 * h_);
  next.resize(nodes_);
  next[0] = u[0];
  next[nodes_ - 1] = -u[0];
  for (Index j = 1; j + 1 < nodes_; ++j) {
    next[j] = x[j] + c * (x[j + 1] - 2.0 * x[j] + x[j - 1]) - a * x[j] * (x[j + 1] - x[j - 1]);
  }
}

Eigen::VectorXd BurgersFom::multilinear(int i, std::span<const Eigen::VectorXd> args) const {
  check_form_args(i, args);
  Eigen::VectorXd out;
  if (i == 1) {
    linear_into(args[0], out);
    return out;
  }
  const auto& v = args[0];
  const auto& w = args[1];
  const double a = dt_ / (4.0 * h_);
  out.setZero(nodes_);
  for (Index j = 1; j + 1 < nodes_; ++j) out[j] = -a * (v[j] * (w[j + 1] - w[j - 1]) + w[j] * (v[j + 1] - v[j - 1]));
  return out;
}

Eigen::VectorXd BurgersFom::input_action(const Eigen::VectorXd& u) const {
  if (u.size() != 1) throw std::invalid_argument("burgers: input has wrong length");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nodes_);
  out[0] = u[0];
  out[nodes_ - 1] = -u[0];
  return out;
}

std::shared_ptr<BurgersFom> make_burgers(double mu, Index nodes, double dt) {
  return std::make_shared<BurgersFom>(nodes, mu, dt);
}

// --------------------------------------------------------- Chafee-Infante

ChafeeInfanteFom::ChafeeInfanteFom(Index unknowns, double dt) : n_(unknowns), dt_(dt) {
  if (unknowns < 2) throw std::invalid_argument("chafee: need at least 2 unknowns");
  if (!(dt > 0.0)) throw std::invalid_argument("chafee: time step must be positive");
  h_ = 1.0 / static_cast<double>(unknowns);
}

void ChafeeInfanteFom::linear_into(const Eigen::VectorXd& w, Eigen::VectorXd& out) const {
  const double c = dt_ / (h_ * h_);
  out.resize(n_);
  out[0] = w[0] + c * (w[1] - 2.0 * w[0]) + dt_ * w[0];
  for (Index j = 1; j + 1 < n_; ++j) out[j] = w[j] + c * (w[j + 1] - 2.0 * w[j] + w[j - 1]) + dt_ * w[j];
  out[n_ - 1] = w[n_ - 1] + c * (2.0 * w[n_ - 2] - 2.0 * w[n_ - 1]) + dt_ * w[n_ - 1];
}

void ChafeeInfanteFom::step_into(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::VectorXd& next) const {
  check_step_args(x, u);
  linear_into(x, next);
  next.array() -= dt_ * x.array().cube();
  next[0] += dt_ / (h_ * h_) * u[0];
}

Eigen::VectorXd ChafeeInfanteFom::multilinear(int i, std::span<const Eigen::VectorXd> args) const {
  check_form_args(i, args);
  Eigen::VectorXd out;
  switch (i) {
    case 1:
      linear_into(args[0], out);
      return out;
    case 2:
      return Eigen::VectorXd::Zero(n_);
    default:
      return -dt_ * (args[0].array() * args[1].array() * args[2].array()).matrix();
  }
}

Eigen::VectorXd ChafeeInfanteFom::input_action(const Eigen::VectorXd& u) const {
  if (u.size() != 1) throw std::invalid_argument("chafee: input has wrong length");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
  out[0] = dt_ / (h_ * h_) * u[0];
  return out;
}

std::shared_ptr<ChafeeInfanteFom> make_chafee_infante(Index unknowns, double dt) {
  return std::make_shared<ChafeeInfanteFom>(unknowns, dt);
}

Eigen::MatrixXd chafee_test_input(Index K, double dt) {
  Eigen::MatrixXd U(1, K);
  for (Index k = 0; k < K; ++k) U(0, k) = 25.0 * (std::sin(std::numbers::pi * static_cast<double>(k) * dt) + 1.0);
  return U;
}

// ------------------------------------------------------ diffusion-reaction

std::array<double, 4> reaction_taylor_coefficients(double mu) {
  constexpr double a = 0.1, b = 2.7, c = 1.8;
  const double scale = -(a * std::sin(mu) + 2.0) * std::exp(-mu * mu * b);
  const double r = mu * c;
  return {scale, scale * r, scale * r * r / 2.0, scale * r * r * r / 6.0};
}

DiffusionReaction2DFom::DiffusionReaction2DFom(Index grid_points_per_dim, double mu, double dt, int reaction_degree,
                                               double diffusivity)
    : g_(grid_points_per_dim), mu_(mu), dt_(dt), degree_(reaction_degree), kappa_(diffusivity) {
  if (grid_points_per_dim < 3) throw std::invalid_argument("reaction2d: need at least 3 grid points per dimension");
  if (!(mu >= kReactionMuMin && mu <= kReactionMuMax)) {
    throw std::invalid_argument("reaction2d: mu = " + std::to_string(mu) + " outside [1, 1.5]");
  }
  if (reaction_degree != 2 && reaction_degree != 3) throw std::invalid_argument("reaction2d: degree must be 2 or 3");
  if (!(dt > 0.0) || !(diffusivity >= 0.0)) throw std::invalid_argument("reaction2d: bad time step or diffusivity");
  h_ = 1.0 / static_cast<double>(g_ - 1);
  taylor_ = reaction_taylor_coefficients(mu);
  source_.resize(g_ * g_);
  const double two_pi = 2.0 * std::numbers::pi;
  for (Index i = 0; i < g_; ++i) {
    for (Index j = 0; j < g_; ++j) {
      source_[i * g_ + j] =
          0.1 * std::sin(two_pi * static_cast<double>(i) * h_) * std::sin(two_pi * static_cast<double>(j) * h_);
    }
  }
}

void DiffusionReaction2DFom::laplacian_into(const Eigen::VectorXd& w, Eigen::VectorXd& out) const {
  const double inv_h2 = 1.0 / (h_ * h_);
  out.resize(g_ * g_);
  for (Index i = 0; i < g_; ++i) {
    const Index im = i == 0 ? 1 : i - 1;
    const Index ip = i == g_ - 1 ? g_ - 2 : i + 1;
    for (Index j = 0; j < g_; ++j) {
      const Index jm = j == 0 ? 1 : j - 1;
      const Index jp = j == g_ - 1 ? g_ - 2 : j + 1;
      out[i * g_ + j] =
          inv_h2 * (w[im * g_ + j] + w[ip * g_ + j] + w[i * g_ + jm] + w[i * g_ + jp] - 4.0 * w[i * g_ + j]);
    }
  }
}

void DiffusionReaction2DFom::step_into(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                       Eigen::VectorXd& next) const {
  check_step_args(x, u);
  laplacian_into(x, next);
  const auto xa = x.array();
  auto reaction = (taylor_[1] + taylor_[2] * xa) * xa;
  if (degree_ == 3) {
    next = (xa + dt_ * (kappa_ * next.array() + reaction + taylor_[3] * xa.cube() + source_.array() * u[0] +
                        taylor_[0] * u[1]))
               .matrix();
  } else {
    next = (xa + dt_ * (kappa_ * next.array() + reaction + source_.array() * u[0] + taylor_[0] * u[1])).matrix();
  }
}

Eigen::VectorXd DiffusionReaction2DFom::multilinear(int i, std::span<const Eigen::VectorXd> args) const {
  check_form_args(i, args);
  Eigen::VectorXd out;
  switch (i) {
    case 1:
      laplacian_into(args[0], out);
      return (args[0].array() + dt_ * (kappa_ * out.array() + taylor_[1] * args[0].array())).matrix();
    case 2:
      return (dt_ * taylor_[2] * args[0].array() * args[1].array()).matrix();
    default:
      return (dt_ * taylor_[3] * args[0].array() * args[1].array() * args[2].array()).matrix();
  }
}

Eigen::VectorXd DiffusionReaction2DFom::input_action(const Eigen::VectorXd& u) const {
  if (u.size() != 2) throw std::invalid_argument("reaction2d: input has wrong length");
  return (dt_ * (source_.array() * u[0] + taylor_[0] * u[1])).matrix();
}

std::shared_ptr<DiffusionReaction2DFom> make_diffusion_reaction_2d(Index grid_points_per_dim, double mu, double dt,
                                                                   int reaction_degree, double diffusivity) {
  return std::make_shared<DiffusionReaction2DFom>(grid_points_per_dim, mu, dt, reaction_degree, diffusivity);
}

Eigen::MatrixXd with_constant_channel(const Eigen::MatrixXd& physical) {
  if (physical.rows() != 1) throw std::invalid_argument("with_constant_channel: expected a 1 x K physical input");
  Eigen::MatrixXd U(2, physical.cols());
  U.row(0) = physical.row(0);
  U.row(1).setOnes();
  return U;
}

}  // namespace opinfer
