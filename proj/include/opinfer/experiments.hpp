#pragma once

// Config-driven experiment runners behind the `opinfer` command.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "opinfer/inference.hpp"

namespace opinfer {

/// Invalid or inconsistent configuration (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested exact recovery could not be certified (exit code 3).
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TestInput { constant, random, sine };

struct ExperimentConfig {
  std::string benchmark;  // toy | burgers | chafee | reaction2d | custom
  std::string scale = "desk";
  Index N = 0;  // toy/custom: state dim, burgers: grid nodes, chafee: unknowns, reaction2d: points per dim
  Index K = 0;
  double dt = 0.0;
  std::vector<double> mu;       // training parameters; empty for parameter-free benchmarks
  std::vector<double> test_mu;  // empty: test on the single trained model
  Index m_prime = 1;
  Index basis_inputs = 0;  // 0: the basis is built from the learning trajectories
  double input_low = 0.0;
  double input_high = 1.0;
  std::vector<Index> nbar;
  std::vector<Index> truncation;  // empty: 1..nbar
  std::optional<Index> reproj_horizon;
  std::uint64_t seed = 1;
  std::string out = "out";
  int degree = 2;
  double diffusivity = 0.0;
  Index inputs = 1;  // custom benchmark input dimension
  TestInput test_input = TestInput::constant;
  double test_input_value = 1.0;
  Index test_K = 0;  // 0: same as K
  std::vector<Index> toy_dims;
  int threads = 1;
  bool require_exact_recovery = false;
};

/// Defaults for a benchmark at the given scale ("desk" or "paper").
ExperimentConfig preset(const std::string& benchmark, const std::string& scale);

/// Applies the fields of a JSON config (schema_version 1) on top of the
/// preset for its benchmark. Unknown keys are errors.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& scale,
                                  const std::string& forced_benchmark = "");
ExperimentConfig load_config(const std::string& path, const std::string& scale,
                             const std::string& forced_benchmark = "");
void validate(const ExperimentConfig& cfg);
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

/// Evenly spaced values a + (b - a) i / (count - 1), or cell midpoints
/// a + (b - a)(i + 1/2) / count.
std::vector<double> linspace(double a, double b, Index count);
std::vector<double> midpoints(double a, double b, Index count);

struct MetricRow {
  std::string benchmark;
  Index nbar = 0;
  Index n = 0;
  std::optional<double> mu;
  std::string method;  // intrusive | opinf-reproj | opinf-plain
  std::string split;   // train | test
  double avg_rel_error = 0.0;
  double traj_diff = 0.0;
  bool diverged = false;
  std::optional<double> residual;
};

struct CertificateRow {
  std::string benchmark;
  Index nbar = 0;
  std::optional<double> mu;
  RecoveryCertificate certificate;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<MetricRow> metrics;
  std::vector<CertificateRow> certificates;
  std::vector<std::string> failures;  // per-parameter problems that did not abort the run
  double wall_seconds = 0.0;
  // toy extras
  Eigen::MatrixXd toy_trajectories;  // columns: k, closure, norm_projected, norm_intrusive, norm_plain, norm_reproj
  Eigen::MatrixXd toy_condition;     // columns: n, K, cond
};

inline const char* const kMetricsHeader =
    "benchmark,nbar,n,mu,method,split,avg_rel_error,traj_diff,diverged,residual";
inline const char* const kSummaryHeader = "benchmark,nbar,n,method,split,avg_rel_error,traj_diff,diverged_count";
inline const char* const kCertifyHeader = "benchmark,mu,K,required,rank,cond,satisfied";

ExperimentReport run_toy(const ExperimentConfig& cfg, bool certify_only = false);
/// burgers, chafee, reaction2d and custom.
ExperimentReport run_benchmark(const ExperimentConfig& cfg, bool certify_only = false);
ExperimentReport run_certify(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

std::string metrics_csv(const ExperimentReport& r);
std::string summary_csv(const ExperimentReport& r);
std::string certify_csv(const ExperimentReport& r);
std::string toy_trajectories_csv(const ExperimentReport& r);
std::string toy_condition_csv(const ExperimentReport& r);

/// Writes the CSV files (and report.json) of a report into cfg.out.
void write_report(const ExperimentReport& r, bool certify_only = false);

}  // namespace opinfer
