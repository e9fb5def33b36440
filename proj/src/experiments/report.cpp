#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "opinfer/csv.hpp"
#include "opinfer/experiments.hpp"

namespace opinfer {

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

std::string matrix_rows(const Eigen::MatrixXd& M, const std::vector<bool>& integer_cols) {
  std::ostringstream os;
  for (Index r = 0; r < M.rows(); ++r) {
    for (Index c = 0; c < M.cols(); ++c) {
      if (c > 0) os << ',';
      if (integer_cols[static_cast<std::size_t>(c)]) {
        os << static_cast<long long>(M(r, c));
      } else {
        os << format_double(M(r, c));
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace

std::string metrics_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << kMetricsHeader << '\n';
  for (const auto& m : r.metrics) {
    os << m.benchmark << ',' << m.nbar << ',' << m.n << ',' << opt(m.mu) << ',' << m.method << ',' << m.split << ','
       << format_double(m.avg_rel_error) << ',' << format_double(m.traj_diff) << ',' << (m.diverged ? 1 : 0) << ','
       << opt(m.residual) << '\n';
  }
  return os.str();
}

std::string summary_csv(const ExperimentReport& r) {
  struct Acc {
    double err = 0.0, diff = 0.0;
    int err_n = 0, diff_n = 0, diverged = 0;
  };
  std::vector<std::tuple<Index, Index, std::string, std::string>> order;
  std::map<std::tuple<Index, Index, std::string, std::string>, Acc> acc;
  for (const auto& m : r.metrics) {
    auto key = std::make_tuple(m.nbar, m.n, m.method, m.split);
    if (!acc.count(key)) order.push_back(key);
    auto& a = acc[key];
    if (m.diverged) ++a.diverged;
    if (!std::isnan(m.avg_rel_error)) {
      a.err += m.avg_rel_error;
      ++a.err_n;
    }
    if (!std::isnan(m.traj_diff)) {
      a.diff += m.traj_diff;
      ++a.diff_n;
    }
  }
  std::ostringstream os;
  os << kSummaryHeader << '\n';
  const double nan = std::nan("");
  for (const auto& key : order) {
    const auto& a = acc[key];
    os << r.config.benchmark << ',' << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
       << std::get<3>(key) << ',' << format_double(a.err_n ? a.err / a.err_n : nan) << ','
       << format_double(a.diff_n ? a.diff / a.diff_n : nan) << ',' << a.diverged << '\n';
  }
  return os.str();
}

std::string certify_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << kCertifyHeader << '\n';
  for (const auto& c : r.certificates) {
    os << c.benchmark << ',' << opt(c.mu) << ',' << c.certificate.K << ',' << c.certificate.required << ','
       << c.certificate.numerical_rank << ',' << format_double(c.certificate.condition) << ','
       << (c.certificate.satisfied ? "true" : "false") << '\n';
  }
  return os.str();
}

std::string toy_trajectories_csv(const ExperimentReport& r) {
  return "k,closure,norm_projected,norm_intrusive,norm_plain,norm_reproj\n" +
         matrix_rows(r.toy_trajectories, {true, false, false, false, false, false});
}

std::string toy_condition_csv(const ExperimentReport& r) {
  return "n,K,cond\n" + matrix_rows(r.toy_condition, {true, true, false});
}

void write_report(const ExperimentReport& r, bool certify_only) {
  namespace fs = std::filesystem;
  const fs::path dir(r.config.out);
  fs::create_directories(dir);
  write_file(dir / "certify.csv", certify_csv(r));
  if (!certify_only) {
    write_file(dir / "metrics.csv", metrics_csv(r));
    write_file(dir / "summary.csv", summary_csv(r));
  }
  if (r.config.benchmark == "toy") {
    write_file(dir / "toy_condition.csv", toy_condition_csv(r));
    if (!certify_only) write_file(dir / "toy_trajectories.csv", toy_trajectories_csv(r));
  }
  nlohmann::ordered_json j;
  j["config"] = to_json(r.config);
  j["seed"] = r.config.seed;
  j["wall_seconds"] = r.wall_seconds;
  j["certificates_satisfied"] = std::all_of(r.certificates.begin(), r.certificates.end(),
                                            [](const CertificateRow& c) { return c.certificate.satisfied; });
  j["failures"] = r.failures;
  write_file(dir / "report.json", j.dump(2) + "\n");
}

}  // namespace opinfer
