#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>
#include <sstream>

#include "opinfer/benchmarks.hpp"
#include "opinfer/fom.hpp"
#include "opinfer/random.hpp"

using namespace opinfer;

namespace {

double spectral_radius(const Eigen::MatrixXd& A) { return A.eigenvalues().cwiseAbs().maxCoeff(); }

std::vector<std::shared_ptr<const FullOrderModel>> small_benchmarks() {
  return {make_burgers(0.37, 16), make_chafee_infante(12), make_diffusion_reaction_2d(5, 1.2),
          make_diffusion_reaction_2d(5, 1.4, 1e-2, 2), make_random_polynomial(6, 3, 2, 5), make_toy_linear(10, 1)};
}

Eigen::VectorXd forms_sum(const FullOrderModel& m, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  Eigen::VectorXd out = m.input_matrix() * u;
  for (int i = 1; i <= m.degree(); ++i) {
    std::vector<Eigen::VectorXd> args(static_cast<std::size_t>(i), x);
    out += m.multilinear(i, args);
  }
  return out;
}

// Identity map x -> x with no inputs.
class IdentityFom final : public FullOrderModel {
 public:
  explicit IdentityFom(Index N) : N_(N) {}
  Index state_dim() const override { return N_; }
  Index input_dim() const override { return 0; }
  int degree() const override { return 1; }
  std::string name() const override { return "identity"; }
  void step_into(const Eigen::VectorXd& x, const Eigen::VectorXd&, Eigen::VectorXd& next) const override { next = x; }
  Eigen::VectorXd multilinear(int, std::span<const Eigen::VectorXd> args) const override { return args[0]; }
  Eigen::VectorXd input_action(const Eigen::VectorXd&) const override { return Eigen::VectorXd::Zero(N_); }

 private:
  Index N_;
};

// Doubles the state, and turns a chosen entry into Inf at a given step.
class BlowupFom final : public FullOrderModel {
 public:
  explicit BlowupFom(Index at) : at_(at) {}
  Index state_dim() const override { return 2; }
  Index input_dim() const override { return 1; }
  int degree() const override { return 1; }
  std::string name() const override { return "blowup"; }
  void step_into(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::VectorXd& next) const override {
    next = 2.0 * x;
    if (u[0] == static_cast<double>(at_)) next[1] = std::numeric_limits<double>::infinity();
  }
  Eigen::VectorXd multilinear(int, std::span<const Eigen::VectorXd> args) const override { return 2.0 * args[0]; }
  Eigen::VectorXd input_action(const Eigen::VectorXd&) const override { return Eigen::VectorXd::Zero(2); }

 private:
  Index at_;
};

}  // namespace

TEST(Step, ToyAtOriginIsZero) {
  auto fom = make_toy_linear(10, 3);
  EXPECT_EQ(fom->step(Eigen::VectorXd::Zero(10), Eigen::VectorXd()), Eigen::VectorXd::Zero(10));
}

TEST(Step, BurgersAtZeroStateIsInputAction) {
  auto fom = make_burgers(0.5);
  const double c = 3.25;
  const Eigen::VectorXd next = fom->step(Eigen::VectorXd::Zero(128), Eigen::VectorXd::Constant(1, c));
  EXPECT_LE((next - fom->input_matrix() * Eigen::VectorXd::Constant(1, c)).norm(), 0.0);
  EXPECT_EQ(next[0], c);
}

TEST(Step, PolynomialConsistencyOnBenchmarks) {
  Rng rng(17);
  for (const auto& m : small_benchmarks()) {
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd x(m->state_dim()), u(m->input_dim());
      for (Index j = 0; j < x.size(); ++j) x[j] = rng.uniform(-1, 1);
      for (Index j = 0; j < u.size(); ++j) u[j] = rng.uniform(-1, 1);
      const Eigen::VectorXd f = m->step(x, u);
      EXPECT_LE((f - forms_sum(*m, x, u)).norm(), 1e-12 * (1 + f.norm())) << m->name();
      EXPECT_LE((f - m->step_via_forms(x, u)).norm(), 1e-12 * (1 + f.norm())) << m->name();
    }
  }
}

TEST(Multilinear, SymmetricUnderPermutation) {
  Rng rng(23);
  for (const auto& m : small_benchmarks()) {
    for (int i = 2; i <= m->degree(); ++i) {
      std::vector<Eigen::VectorXd> args;
      for (int a = 0; a < i; ++a) {
        Eigen::VectorXd w(m->state_dim());
        for (Index j = 0; j < w.size(); ++j) w[j] = rng.uniform(-1, 1);
        args.push_back(w);
      }
      const Eigen::VectorXd ref = m->multilinear(i, args);
      std::vector<int> perm(static_cast<std::size_t>(i));
      std::iota(perm.begin(), perm.end(), 0);
      while (std::next_permutation(perm.begin(), perm.end())) {
        std::vector<Eigen::VectorXd> p;
        for (int k : perm) p.push_back(args[static_cast<std::size_t>(k)]);
        EXPECT_LE((m->multilinear(i, p) - ref).norm(), 1e-14 * std::max(1.0, ref.norm())) << m->name();
      }
    }
  }
}

TEST(Multilinear, RejectsWrongArity) {
  auto fom = make_burgers(0.5, 8);
  std::vector<Eigen::VectorXd> args(3, Eigen::VectorXd::Zero(8));
  EXPECT_THROW(fom->multilinear(3, args), std::invalid_argument);
  EXPECT_THROW(fom->multilinear(2, std::span<const Eigen::VectorXd>(args.data(), 1)), std::invalid_argument);
}

TEST(Simulate, ZeroStepsKeepsInitialState) {
  auto fom = make_toy_linear(10, 1);
  const Eigen::VectorXd x0 = Eigen::VectorXd::LinSpaced(10, 0, 1);
  const auto t = simulate(*fom, x0, Eigen::MatrixXd(0, 0), 0);
  ASSERT_EQ(t.steps(), 1);
  EXPECT_EQ(t.states.col(0), x0);
  EXPECT_FALSE(t.diverged());
}

TEST(Simulate, ToyNormBoundedByPowerGrowth) {
  auto fom = make_toy_linear(10, 5);
  const Eigen::MatrixXd& A = fom->op(1);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(10);
  const Index K = 100;
  const auto t = simulate(*fom, x0, Eigen::MatrixXd(0, K), K);
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(10, 10);
  for (Index k = 0; k < K; ++k) P = A * P;
  EXPECT_LE(t.states.col(K).norm(), P.norm() * x0.norm() * (1 + 1e-12));
  EXPECT_LT(t.states.col(K).norm(), x0.norm());
}

TEST(Simulate, IdentityDynamicsConstant) {
  IdentityFom fom(4);
  const Eigen::VectorXd x0 = Eigen::Vector4d(1, -2, 3, 0.5);
  const auto t = simulate(fom, x0, Eigen::MatrixXd(0, 7), 7);
  for (Index k = 0; k < t.steps(); ++k) EXPECT_EQ(t.states.col(k), x0);
}

TEST(Simulate, DivergenceTruncatesAtFirstNonFinite) {
  BlowupFom fom(3);
  Eigen::MatrixXd U(1, 10);
  for (Index k = 0; k < 10; ++k) U(0, k) = static_cast<double>(k);
  const auto t = simulate(fom, Eigen::Vector2d(1, 1), U, 10);
  ASSERT_TRUE(t.diverged());
  EXPECT_EQ(*t.diverged_at, 4);
  EXPECT_EQ(t.steps(), 4);
  EXPECT_TRUE(t.states.allFinite());
}

TEST(Simulate, BitwiseDeterministic) {
  auto fom = make_burgers(0.2, 32);
  const Eigen::MatrixXd U = random_input_trajectory(200, 1, 0, 10, 9).inputs;
  const auto a = simulate(*fom, Eigen::VectorXd::Zero(32), U, 200);
  const auto b = simulate(*fom, Eigen::VectorXd::Zero(32), U, 200);
  EXPECT_TRUE((a.states.array() == b.states.array()).all());
}

TEST(Simulate, DimensionErrors) {
  auto fom = make_burgers(0.2, 8);
  EXPECT_THROW(simulate(*fom, Eigen::VectorXd::Zero(7), Eigen::MatrixXd::Zero(1, 5), 5), std::invalid_argument);
  EXPECT_THROW(simulate(*fom, Eigen::VectorXd::Zero(8), Eigen::MatrixXd::Zero(2, 5), 5), std::invalid_argument);
  EXPECT_THROW(simulate(*fom, Eigen::VectorXd::Zero(8), Eigen::MatrixXd::Zero(1, 4), 5), std::invalid_argument);
}

TEST(Simulate, TrajectoryCsvHeader) {
  auto fom = make_toy_linear(3, 1);
  const auto t = simulate(*fom, Eigen::Vector3d(1, 0, 0), Eigen::MatrixXd(0, 2), 2);
  std::ostringstream os;
  write_trajectory_csv(os, t);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "k,x0,x1,x2");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(ToyLinear, SpectralRadiusBelowOne) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto fom = make_toy_linear(10, seed);
    EXPECT_NEAR(spectral_radius(fom->op(1)), 0.95, 1e-12);
    EXPECT_EQ(fom->degree(), 1);
    EXPECT_EQ(fom->input_dim(), 0);
  }
}

TEST(ToyLinear, SameSeedSameOperator) {
  EXPECT_EQ(make_toy_linear(10, 42)->op(1), make_toy_linear(10, 42)->op(1));
  EXPECT_NE(make_toy_linear(10, 42)->op(1), make_toy_linear(10, 43)->op(1));
}

TEST(Burgers, Defaults) {
  auto fom = make_burgers(0.5);
  EXPECT_EQ(fom->state_dim(), 128);
  EXPECT_EQ(fom->dt(), 1e-4);
  EXPECT_EQ(fom->degree(), 2);
  EXPECT_EQ(fom->input_dim(), 1);
  EXPECT_THROW(make_burgers(0.05), std::invalid_argument);
  EXPECT_THROW(make_burgers(1.5), std::invalid_argument);
}

TEST(Burgers, QuadraticAndInputIndependentOfMu) {
  auto a = make_burgers(0.1, 16), b = make_burgers(0.9, 16);
  Rng rng(4);
  Eigen::VectorXd w1(16), w2(16);
  for (Index j = 0; j < 16; ++j) {
    w1[j] = rng.uniform(-1, 1);
    w2[j] = rng.uniform(-1, 1);
  }
  const std::vector<Eigen::VectorXd> args{w1, w2};
  EXPECT_EQ(a->multilinear(2, args), b->multilinear(2, args));
  EXPECT_EQ(a->input_matrix(), b->input_matrix());
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 0.7);
  const Eigen::VectorXd quad = a->step(w1, u) - a->multilinear(1, std::span<const Eigen::VectorXd>(&w1, 1)) -
                               a->input_matrix() * u;
  const std::vector<Eigen::VectorXd> sq{w1, w1};
  EXPECT_LE((quad - a->multilinear(2, sq)).norm(), 1e-13 * (1 + quad.norm()));
}

TEST(Chafee, DefaultsAndCubicTerm) {
  auto fom = make_chafee_infante();
  EXPECT_EQ(fom->state_dim(), 128);
  EXPECT_EQ(fom->dt(), 1e-5);
  EXPECT_EQ(fom->degree(), 3);
  Rng rng(8);
  Eigen::VectorXd w(128);
  for (Index j = 0; j < 128; ++j) w[j] = rng.uniform(-2, 2);
  const std::vector<Eigen::VectorXd> args(3, w);
  const Eigen::VectorXd cubic = fom->multilinear(3, args);
  for (Index j = 0; j < 128; ++j) EXPECT_NEAR(cubic[j], -fom->dt() * w[j] * w[j] * w[j], 1e-15);
  const std::vector<Eigen::VectorXd> sq(2, w);
  EXPECT_EQ(fom->multilinear(2, sq), Eigen::VectorXd::Zero(128));
}

TEST(Chafee, TestInputFormula) {
  const Eigen::MatrixXd U = chafee_test_input(1000, 1e-5);
  ASSERT_EQ(U.rows(), 1);
  ASSERT_EQ(U.cols(), 1000);
  for (Index k : {0, 1, 500, 999}) {
    const double t = static_cast<double>(k) * 1e-5;
    EXPECT_NEAR(U(0, k), 25.0 * (std::sin(std::numbers::pi * t) + 1.0), 1e-12);
  }
}

TEST(Reaction2D, TaylorCoefficientsMatchDerivatives) {
  for (double mu : {1.0, 1.25, 1.5}) {
    // g(x) = -(a sin mu + 2) exp(-b mu^2) exp(c mu x); derivatives at 0 by
    // repeated multiplication with c mu.
    const double g0 = -(0.1 * std::sin(mu) + 2.0) * std::exp(-2.7 * mu * mu);
    const double r = 1.8 * mu;
    const auto t = reaction_taylor_coefficients(mu);
    EXPECT_NEAR(t[0], g0, 1e-15);
    EXPECT_NEAR(t[1], g0 * r, 1e-15);
    EXPECT_NEAR(t[2], g0 * r * r / 2, 1e-15);
    EXPECT_NEAR(t[3], g0 * r * r * r / 6, 1e-15);
    // Finite-difference check of the second coefficient.
    const double h = 1e-3;
    auto g = [&](double x) { return g0 * std::exp(r * x); };
    EXPECT_NEAR((g(h) - 2 * g(0) + g(-h)) / (h * h) / 2, t[2], 1e-6);
  }
  EXPECT_NEAR(reaction_taylor_coefficients(1.0)[0], -(0.1 * std::sin(1.0) + 2) * std::exp(-2.7), 1e-15);
}

TEST(Reaction2D, ZeroStateDrivenByConstantChannel) {
  auto fom = make_diffusion_reaction_2d(8, 1.3);
  EXPECT_EQ(fom->state_dim(), 64);
  EXPECT_EQ(fom->input_dim(), 2);
  const Eigen::VectorXd next = fom->step(Eigen::VectorXd::Zero(64), Eigen::Vector2d(0, 1));
  EXPECT_LE((next - Eigen::VectorXd::Constant(64, 1e-2 * fom->taylor()[0])).norm(), 1e-16);
  EXPECT_THROW(make_diffusion_reaction_2d(8, 0.9), std::invalid_argument);
  EXPECT_THROW(make_diffusion_reaction_2d(8, 1.6), std::invalid_argument);
}

TEST(Reaction2D, PaperGridSize) {
  auto fom = make_diffusion_reaction_2d(64, 1.0);
  EXPECT_EQ(fom->state_dim(), 4096);
  EXPECT_EQ(fom->degree(), 3);
}

TEST(Reaction2D, ConstantChannel) {
  Eigen::MatrixXd u(1, 3);
  u << 5, 6, 7;
  const Eigen::MatrixXd w = with_constant_channel(u);
  ASSERT_EQ(w.rows(), 2);
  EXPECT_EQ(w.row(0), u.row(0));
  EXPECT_EQ(w.row(1), Eigen::RowVector3d::Ones());
}

TEST(RandomInputs, RangeAndReproducibility) {
  const auto a = random_input_trajectory(500, 3, -2, 5, 77);
  const auto b = random_input_trajectory(500, 3, -2, 5, 77);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.inputs.rows(), 3);
  EXPECT_EQ(a.inputs.cols(), 500);
  EXPECT_GE(a.inputs.minCoeff(), -2);
  EXPECT_LT(a.inputs.maxCoeff(), 5);
  EXPECT_EQ(*a.seed, 77u);
  EXPECT_NE(random_input_trajectory(500, 3, -2, 5, 78).inputs, a.inputs);
}

TEST(RandomInputs, LawOfLargeNumbers) {
  const auto a = random_input_trajectory(1000000, 1, 0, 10, 3);
  EXPECT_NEAR(a.inputs.mean(), 5.0, 0.05);
}

TEST(RandomInputs, RejectsEmptyRange) {
  EXPECT_THROW(random_input_trajectory(5, 1, 1, 1, 0), std::invalid_argument);
}
