#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>

#include "opinfer/benchmarks.hpp"
#include "opinfer/diagnostics.hpp"
#include "opinfer/experiments.hpp"
#include "opinfer/random.hpp"

namespace opinfer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kBasisStreams = 1'000'000;
constexpr std::uint64_t kTestStreams = 2'000'000;

const char* const kMethods[] = {"intrusive", "opinf-reproj", "opinf-plain"};
constexpr int kIntrusive = 0, kReproj = 1, kPlain = 2;

struct Problem {
  std::vector<std::optional<double>> train_mu;
  std::function<std::shared_ptr<const FullOrderModel>(std::optional<double>)> factory;
  std::function<Eigen::MatrixXd(Index K, std::uint64_t stream)> random_input;
  Eigen::VectorXd x0;
  int degree = 1;
  Index p = 0;
};

Problem make_problem(const ExperimentConfig& c) {
  Problem P;
  const double lo = c.input_low, hi = c.input_high;
  const std::uint64_t seed = c.seed;
  auto scalar_input = [lo, hi, seed](Index K, std::uint64_t stream) {
    return random_input_trajectory(K, 1, lo, hi, seed + stream).inputs;
  };
  if (c.benchmark == "burgers") {
    const Index nodes = c.N;
    const double dt = c.dt;
    P.factory = [nodes, dt](std::optional<double> mu) { return make_burgers(mu.value(), nodes, dt); };
    P.random_input = scalar_input;
    P.degree = 2;
    P.p = 1;
    P.x0 = Eigen::VectorXd::Zero(nodes);
  } else if (c.benchmark == "chafee") {
    auto fom = make_chafee_infante(c.N, c.dt);
    P.factory = [fom](std::optional<double>) { return fom; };
    P.random_input = scalar_input;
    P.degree = 3;
    P.p = 1;
    P.x0 = Eigen::VectorXd::Zero(c.N);
  } else if (c.benchmark == "reaction2d") {
    const Index g = c.N;
    const double dt = c.dt, kappa = c.diffusivity;
    const int degree = c.degree;
    P.factory = [g, dt, kappa, degree](std::optional<double> mu) {
      return make_diffusion_reaction_2d(g, mu.value(), dt, degree, kappa);
    };
    P.random_input = [scalar_input](Index K, std::uint64_t stream) {
      return with_constant_channel(scalar_input(K, stream));
    };
    P.degree = degree;
    P.p = 2;
    P.x0 = Eigen::VectorXd::Zero(g * g);
  } else if (c.benchmark == "custom") {
    if (c.inputs < 1) throw ConfigError("custom benchmark needs at least one input");
    auto fom = make_random_polynomial(c.N, c.degree, c.inputs, c.seed);
    const Index p = c.inputs;
    P.factory = [fom](std::optional<double>) { return fom; };
    P.random_input = [lo, hi, seed, p](Index K, std::uint64_t stream) {
      return random_input_trajectory(K, p, lo, hi, seed + stream).inputs;
    };
    P.degree = c.degree;
    P.p = p;
    P.x0 = Eigen::VectorXd::Zero(c.N);
  } else {
    throw ConfigError("run_benchmark: unsupported benchmark '" + c.benchmark + "'");
  }
  if (c.mu.empty()) {
    P.train_mu = {std::nullopt};
  } else {
    for (double mu : c.mu) P.train_mu.emplace_back(mu);
  }
  return P;
}

Eigen::MatrixXd test_input(const ExperimentConfig& c, const Problem& P, Index K, std::uint64_t stream) {
  switch (c.test_input) {
    case TestInput::random:
      return P.random_input(K, stream);
    case TestInput::sine: {
      Eigen::MatrixXd U = chafee_test_input(K, c.dt);
      return c.benchmark == "reaction2d" ? with_constant_channel(U) : Eigen::MatrixXd(U.replicate(P.p, 1));
    }
    case TestInput::constant:
    default: {
      Eigen::MatrixXd U = Eigen::MatrixXd::Constant(1, K, c.test_input_value);
      return c.benchmark == "reaction2d" ? with_constant_channel(U) : Eigen::MatrixXd(U.replicate(P.p, 1));
    }
  }
}

Trajectory simulate_checked(const FullOrderModel& fom, const Eigen::VectorXd& x0, const Eigen::MatrixXd& U, Index K) {
  Trajectory t = simulate(fom, x0, U, K);
  if (t.diverged()) throw NumericalFailure("full model diverged at step " + std::to_string(*t.diverged_at));
  return t;
}

std::vector<Index> dims_for(const ExperimentConfig& c, Index nbar) {
  std::vector<Index> dims;
  if (c.truncation.empty()) {
    for (Index n = 1; n <= nbar; ++n) dims.push_back(n);
  } else {
    for (Index n : c.truncation) {
      if (n <= nbar) dims.push_back(n);
    }
  }
  return dims;
}

struct Evaluation {
  Eigen::MatrixXd Z;
  bool diverged = false;
};

// Concatenated reduced trajectories for a list of inputs.
Evaluation evaluate(const PolynomialModel& model, const Eigen::VectorXd& z0, const std::vector<Eigen::MatrixXd>& inputs,
                    Index K) {
  Evaluation e;
  e.Z.resize(model.reduced_dim(), static_cast<Index>(inputs.size()) * (K + 1));
  for (std::size_t l = 0; l < inputs.size(); ++l) {
    Trajectory t = reduced_simulate(model, z0, inputs[l], K);
    if (t.diverged()) {
      e.diverged = true;
      return e;
    }
    e.Z.middleCols(static_cast<Index>(l) * (K + 1), K + 1) = t.states;
  }
  return e;
}

// Metric rows for the three methods on one (n, parameter) pair.
void score(std::vector<MetricRow>& rows, const MetricRow& base,
           const std::array<std::optional<PolynomialModel>, 3>& models,
           const std::array<std::optional<double>, 3>& residuals, const ProjectedReference& ref,
           const Eigen::VectorXd& z0, const std::vector<Eigen::MatrixXd>& inputs, Index K, Index n) {
  std::array<Evaluation, 3> evals;
  std::array<bool, 3> available{};
  for (int m = 0; m < 3; ++m) {
    if (!models[m]) continue;
    available[m] = true;
    evals[m] = evaluate(truncate(*models[m], n), z0.head(n), inputs, K);
  }
  for (int m = 0; m < 3; ++m) {
    MetricRow row = base;
    row.method = kMethods[m];
    row.residual = residuals[m];
    if (!available[m] || evals[m].diverged) {
      row.diverged = true;
      row.avg_rel_error = kNaN;
      row.traj_diff = kNaN;
    } else {
      row.avg_rel_error = relative_state_error(ref, evals[m].Z);
      if (m == kIntrusive) {
        row.traj_diff = 0.0;
      } else if (available[kIntrusive] && !evals[kIntrusive].diverged) {
        row.traj_diff = relative_difference(evals[m].Z, evals[kIntrusive].Z);
      } else {
        row.traj_diff = kNaN;
      }
    }
    rows.push_back(std::move(row));
  }
}

}  // namespace

ExperimentReport run_benchmark(const ExperimentConfig& cfg, bool certify_only) {
  validate(cfg);
  if (cfg.benchmark == "toy") return run_toy(cfg, certify_only);
  const auto start = std::chrono::steady_clock::now();
  const Problem P = make_problem(cfg);
  const std::size_t m = P.train_mu.size();
  const Index K = cfg.K;
  const Index H = cfg.reproj_horizon.value_or(K);
  const Index nbar_max = *std::max_element(cfg.nbar.begin(), cfg.nbar.end());
  const bool separate_basis = cfg.basis_inputs > 0;
  const auto m_prime = static_cast<std::size_t>(cfg.m_prime);
  const auto n_basis = separate_basis ? static_cast<std::size_t>(cfg.basis_inputs) : m_prime;

  ExperimentReport report;
  report.config = cfg;

  std::vector<std::shared_ptr<const FullOrderModel>> foms(m);
  std::vector<std::vector<Eigen::MatrixXd>> learn_U(m), basis_U(m);
  for (std::size_t j = 0; j < m; ++j) {
    foms[j] = P.factory(P.train_mu[j]);
    for (std::size_t l = 0; l < m_prime; ++l) learn_U[j].push_back(P.random_input(K, j * m_prime + l));
    if (separate_basis) {
      for (std::size_t l = 0; l < n_basis; ++l) basis_U[j].push_back(P.random_input(K, kBasisStreams + j * n_basis + l));
    } else {
      basis_U[j] = learn_U[j];
    }
  }

  // Basis from all training snapshots, added in a fixed order.
  SnapshotAccumulator snapshots(foms.front()->state_dim());
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<Trajectory> trajs(n_basis);
    parallel_for(n_basis, cfg.threads, [&](std::size_t l) { trajs[l] = simulate_checked(*foms[j], P.x0, basis_U[j][l], K); });
    for (const auto& t : trajs) snapshots.add(t.states);
  }
  Basis V;
  try {
    V = snapshots.basis(nbar_max);
  } catch (const std::invalid_argument& e) {
    throw NumericalFailure(e.what());
  }

  // Projected references for the training split and projected learning data.
  std::vector<ProjectedReference> train_ref(m);
  std::vector<std::vector<Eigen::MatrixXd>> learn_P(m, std::vector<Eigen::MatrixXd>(m_prime));
  parallel_for(m, cfg.threads, [&](std::size_t j) {
    for (std::size_t l = 0; l < n_basis; ++l) {
      if (certify_only) break;
      train_ref[j].append(simulate_checked(*foms[j], P.x0, basis_U[j][l], K).states, V);
    }
    for (std::size_t l = 0; l < m_prime; ++l) {
      if (certify_only) break;
      if (!separate_basis && H == K) {
        learn_P[j][l] = train_ref[j].projected.middleCols(static_cast<Index>(l) * (K + 1), K + 1);
      } else {
        learn_P[j][l] = project(V, simulate_checked(*foms[j], P.x0, learn_U[j][l], H).states);
      }
    }
  });

  // Test references.
  std::vector<std::optional<double>> test_mu;
  for (double mu : cfg.test_mu) test_mu.emplace_back(mu);
  if (cfg.test_mu.empty()) test_mu.push_back(P.train_mu.front());
  const Index test_K = cfg.test_K > 0 ? cfg.test_K : K;
  std::vector<std::vector<Eigen::MatrixXd>> test_U(test_mu.size());
  std::vector<ProjectedReference> test_ref(test_mu.size());
  if (!certify_only) {
    parallel_for(test_mu.size(), cfg.threads, [&](std::size_t t) {
      test_U[t] = {test_input(cfg, P, test_K, kTestStreams + t)};
      auto fom = cfg.test_mu.empty() ? foms.front() : P.factory(test_mu[t]);
      test_ref[t].append(simulate_checked(*fom, P.x0, test_U[t][0], test_K).states, V);
    });
  }

  std::vector<double> train_values;
  for (const auto& mu : P.train_mu) {
    if (mu) train_values.push_back(*mu);
  }

  for (Index nbar : cfg.nbar) {
    const Basis Vn = V.leading(nbar);
    const Eigen::VectorXd z0 = Vn.matrix().transpose() * P.x0;
    std::vector<std::array<std::optional<PolynomialModel>, 3>> models(m);
    std::vector<std::array<std::optional<double>, 3>> residuals(m);
    std::vector<std::optional<RecoveryCertificate>> certs(m);
    std::vector<std::string> errors(m);

    parallel_for(m, cfg.threads, [&](std::size_t j) {
      try {
        LeastSquaresAccumulator acc(nbar, P.degree, P.p);
        for (std::size_t l = 0; l < m_prime; ++l) {
          TrajectoryPiece piece = reproject_sample(*foms[j], Vn, P.x0, learn_U[j][l], H);
          if (piece.diverged_at) throw NumericalFailure("re-projected sampling diverged");
          acc.add(piece);
        }
        auto sol = acc.solve();
        certs[j] = sol.certificate;
        if (certify_only) return;
        models[j][kReproj] =
            PolynomialModel::from_operator_matrix(sol.O, P.degree, P.p, Provenance::inferred_reprojected);
        residuals[j][kReproj] = sol.residual;
      } catch (const std::exception& e) {
        errors[j] = std::string("opinf-reproj: ") + e.what();
      }
      if (certify_only) return;
      models[j][kIntrusive] = galerkin_project(*foms[j], Vn);
      try {
        LeastSquaresAccumulator acc(nbar, P.degree, P.p);
        for (std::size_t l = 0; l < m_prime; ++l) {
          acc.add(piece_from_trajectory(learn_P[j][l].topRows(nbar), learn_U[j][l]));
        }
        auto sol = acc.solve();
        models[j][kPlain] = PolynomialModel::from_operator_matrix(sol.O, P.degree, P.p, Provenance::inferred_plain);
        residuals[j][kPlain] = sol.residual;
      } catch (const std::exception& e) {
        errors[j] += std::string(errors[j].empty() ? "" : "; ") + "opinf-plain: " + e.what();
      }
    });

    for (std::size_t j = 0; j < m; ++j) {
      if (!errors[j].empty()) {
        report.failures.push_back("nbar=" + std::to_string(nbar) +
                                  (P.train_mu[j] ? " mu=" + std::to_string(*P.train_mu[j]) : std::string()) + ": " +
                                  errors[j]);
      }
      if (certs[j]) report.certificates.push_back({cfg.benchmark, nbar, P.train_mu[j], *certs[j]});
    }
    if (certify_only) continue;

    const auto dims = dims_for(cfg, nbar);
    MetricRow base;
    base.benchmark = cfg.benchmark;
    base.nbar = nbar;

    // Training split: per parameter, the basis-generating inputs over K steps.
    std::vector<std::vector<std::vector<MetricRow>>> train_rows(m, std::vector<std::vector<MetricRow>>(dims.size()));
    parallel_for(m, cfg.threads, [&](std::size_t j) {
      for (std::size_t d = 0; d < dims.size(); ++d) {
        MetricRow b = base;
        b.n = dims[d];
        b.mu = P.train_mu[j];
        b.split = "train";
        score(train_rows[j][d], b, models[j], residuals[j], train_ref[j], z0, basis_U[j], K, dims[d]);
      }
    });
    for (std::size_t d = 0; d < dims.size(); ++d) {
      for (std::size_t j = 0; j < m; ++j) {
        for (auto& r : train_rows[j][d]) report.metrics.push_back(std::move(r));
      }
    }

    // Test split: interpolated (or the single trained) models.
    std::vector<std::vector<std::vector<MetricRow>>> test_rows(test_mu.size(),
                                                               std::vector<std::vector<MetricRow>>(dims.size()));
    parallel_for(test_mu.size(), cfg.threads, [&](std::size_t t) {
      std::array<std::optional<PolynomialModel>, 3> at;
      for (int meth = 0; meth < 3; ++meth) {
        if (cfg.test_mu.empty()) {
          at[meth] = models[0][meth];
          continue;
        }
        std::vector<PolynomialModel> family;
        for (std::size_t j = 0; j < m; ++j) {
          if (models[j][meth]) family.push_back(*models[j][meth]);
        }
        if (family.size() == m) at[meth] = interpolate(train_values, family, *test_mu[t]);
      }
      for (std::size_t d = 0; d < dims.size(); ++d) {
        MetricRow b = base;
        b.n = dims[d];
        b.mu = test_mu[t];
        b.split = "test";
        score(test_rows[t][d], b, at, {}, test_ref[t], z0, test_U[t], test_K, dims[d]);
      }
    });
    for (std::size_t d = 0; d < dims.size(); ++d) {
      for (std::size_t t = 0; t < test_mu.size(); ++t) {
        for (auto& r : test_rows[t][d]) report.metrics.push_back(std::move(r));
      }
    }
  }

  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ExperimentReport run_certify(const ExperimentConfig& cfg) {
  return cfg.benchmark == "toy" ? run_toy(cfg, true) : run_benchmark(cfg, true);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  return cfg.benchmark == "toy" ? run_toy(cfg) : run_benchmark(cfg);
}

}  // namespace opinfer
