#include <chrono>
#include <cmath>
#include <limits>

#include "opinfer/diagnostics.hpp"
#include "opinfer/experiments.hpp"

namespace opinfer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double norm_at(const Trajectory& t, Index k) { return k < t.steps() ? t.states.col(k).norm() : kNaN; }

}  // namespace

ExperimentReport run_toy(const ExperimentConfig& cfg, bool certify_only) {
  validate(cfg);
  if (cfg.benchmark != "toy") throw ConfigError("run_toy: config is for benchmark '" + cfg.benchmark + "'");
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = cfg;

  const Index N = cfg.N, K = cfg.K;
  auto fom = make_toy_linear(N, cfg.seed);
  const Eigen::MatrixXd U(0, K);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Unit(N, 0);
  const Eigen::MatrixXd X = simulate(*fom, x0, U, K).states;

  std::vector<Index> sweep;
  for (Index Kc : {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000}) {
    if (Kc < K) sweep.push_back(Kc);
  }
  sweep.push_back(K);
  std::vector<std::array<double, 3>> cond_rows;

  for (std::size_t d = 0; d < cfg.toy_dims.size(); ++d) {
    const Index n = cfg.toy_dims[d];
    const Basis V = Basis::from_orthonormal(Eigen::MatrixXd::Identity(N, n));
    const TrajectoryPiece reproj = reproject_sample(*fom, V, x0, U, K);
    const auto reproj_fit = infer_from_pieces({reproj}, 1, Provenance::inferred_reprojected);
    report.certificates.push_back({"toy", n, std::nullopt, reproj_fit.certificate});
    for (Index Kc : sweep) {
      const DataMatrix D = assemble_data_matrix(reproj.states.leftCols(Kc), Eigen::MatrixXd(0, Kc), 1,
                                                DataSource::reprojected);
      cond_rows.push_back({static_cast<double>(n), static_cast<double>(Kc), condition_number(D)});
    }
    if (certify_only) continue;

    const Eigen::MatrixXd Xp = project(V, X);
    const auto plain_fit = infer_from_pieces({piece_from_trajectory(Xp, U)}, 1, Provenance::inferred_plain);
    const PolynomialModel intrusive = galerkin_project(*fom, V);
    const Eigen::VectorXd z0 = project(V, x0);
    const std::array<Trajectory, 3> Z = {reduced_simulate(intrusive, z0, U, K),
                                         reduced_simulate(reproj_fit.model, z0, U, K),
                                         reduced_simulate(plain_fit.model, z0, U, K)};
    const std::array<const char*, 3> names = {"intrusive", "opinf-reproj", "opinf-plain"};
    const std::array<std::optional<double>, 3> residuals = {std::nullopt, reproj_fit.residual, plain_fit.residual};
    for (int meth = 0; meth < 3; ++meth) {
      MetricRow row;
      row.benchmark = "toy";
      row.nbar = n;
      row.n = n;
      row.method = names[meth];
      row.split = "train";
      row.residual = residuals[meth];
      row.diverged = Z[meth].diverged();
      if (row.diverged) {
        row.avg_rel_error = kNaN;
        row.traj_diff = kNaN;
      } else {
        row.avg_rel_error = relative_state_error(X, Z[meth].states, V);
        row.traj_diff = Z[0].diverged() ? kNaN : relative_difference(Z[meth].states, Z[0].states);
      }
      report.metrics.push_back(std::move(row));
    }

    if (d == 0) {
      report.toy_trajectories.resize(K + 1, 6);
      for (Index k = 0; k <= K; ++k) {
        const double closure = k < Z[0].steps() ? (Xp.col(k) - Z[0].states.col(k)).norm() : kNaN;
        report.toy_trajectories.row(k) << static_cast<double>(k), closure, Xp.col(k).norm(), norm_at(Z[0], k),
            norm_at(Z[2], k), norm_at(Z[1], k);
      }
    }
  }

  report.toy_condition.resize(static_cast<Index>(cond_rows.size()), 3);
  for (std::size_t r = 0; r < cond_rows.size(); ++r) {
    for (Index c = 0; c < 3; ++c) report.toy_condition(static_cast<Index>(r), c) = cond_rows[r][static_cast<std::size_t>(c)];
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace opinfer
