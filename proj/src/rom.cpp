#include "opinfer/rom.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "opinfer/csv.hpp"
#include "opinfer/polytensor.hpp"

namespace opinfer {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::intrusive: return "intrusive";
    case Provenance::inferred_reprojected: return "inferred-reprojected";
    case Provenance::inferred_plain: return "inferred-plain";
    case Provenance::interpolated: return "interpolated";
  }
  return "unknown";
}

Provenance provenance_from_string(const std::string& s) {
  for (auto p : {Provenance::intrusive, Provenance::inferred_reprojected, Provenance::inferred_plain,
                 Provenance::interpolated}) {
    if (to_string(p) == s) return p;
  }
  throw std::invalid_argument("unknown provenance tag '" + s + "'");
}

PolynomialModel::PolynomialModel(std::vector<Eigen::MatrixXd> operators, Eigen::MatrixXd input_operator,
                                 Provenance provenance)
    : A_(std::move(operators)), B_(std::move(input_operator)), provenance_(provenance) {
  if (A_.empty()) throw std::invalid_argument("PolynomialModel: need at least a linear operator");
  const Index n = A_.front().rows();
  if (n < 1) throw std::invalid_argument("PolynomialModel: reduced dimension must be positive");
  for (std::size_t k = 0; k < A_.size(); ++k) {
    const int i = static_cast<int>(k) + 1;
    if (A_[k].rows() != n || A_[k].cols() != compressed_dim(n, i)) {
      throw std::invalid_argument("PolynomialModel: operator " + std::to_string(i) + " has wrong shape");
    }
    if (!A_[k].allFinite()) throw std::invalid_argument("PolynomialModel: operator has non-finite entries");
  }
  if (B_.size() == 0) B_.resize(n, B_.cols());
  if (B_.rows() != n) throw std::invalid_argument("PolynomialModel: input operator has wrong row count");
  if (!B_.allFinite()) throw std::invalid_argument("PolynomialModel: input operator has non-finite entries");
}

PolynomialModel PolynomialModel::from_operator_matrix(const Eigen::MatrixXd& O, int degree, Index input_dim,
                                                      Provenance provenance) {
  const Index n = O.rows();
  Index expected = input_dim;
  for (int i = 1; i <= degree; ++i) expected += compressed_dim(n, i);
  if (O.cols() != expected) throw std::invalid_argument("from_operator_matrix: column count does not match degree");
  std::vector<Eigen::MatrixXd> ops;
  Index offset = 0;
  for (int i = 1; i <= degree; ++i) {
    const Index cols = compressed_dim(n, i);
    ops.emplace_back(O.middleCols(offset, cols));
    offset += cols;
  }
  return PolynomialModel(std::move(ops), O.rightCols(input_dim), provenance);
}

Eigen::MatrixXd PolynomialModel::operator_matrix() const {
  Index cols = input_dim();
  for (const auto& A : A_) cols += A.cols();
  Eigen::MatrixXd O(reduced_dim(), cols);
  Index offset = 0;
  for (const auto& A : A_) {
    O.middleCols(offset, A.cols()) = A;
    offset += A.cols();
  }
  O.rightCols(input_dim()) = B_;
  return O;
}

PolynomialModel PolynomialModel::with_provenance(Provenance p) const {
  PolynomialModel copy = *this;
  copy.provenance_ = p;
  return copy;
}

namespace {

struct StepBuffers {
  Eigen::VectorXd power;
  Eigen::VectorXd scratch;
};

void step_into(const PolynomialModel& model, const Eigen::VectorXd& z, const Eigen::VectorXd& u,
               Eigen::VectorXd& next, StepBuffers& buf) {
  next.noalias() = model.op(1) * z;
  for (int i = 2; i <= model.degree(); ++i) {
    compressed_power_into(z, i, buf.power, buf.scratch);
    next.noalias() += model.op(i) * buf.power;
  }
  if (model.input_dim() > 0) next.noalias() += model.input_operator() * u;
}

}  // namespace

Eigen::VectorXd PolynomialModel::step(const Eigen::VectorXd& z, const Eigen::VectorXd& u) const {
  if (z.size() != reduced_dim() || u.size() != input_dim()) {
    throw std::invalid_argument("PolynomialModel::step: dimension mismatch");
  }
  Eigen::VectorXd next;
  StepBuffers buf;
  step_into(*this, z, u, next, buf);
  return next;
}

PolynomialModel galerkin_project(const FullOrderModel& fom, const Basis& V) {
  if (fom.state_dim() != V.full_dim()) throw std::invalid_argument("galerkin_project: basis rows != state dimension");
  const Index n = V.dim();
  const Eigen::MatrixXd& Vm = V.matrix();
  std::vector<Eigen::MatrixXd> ops;
  for (int i = 1; i <= fom.degree(); ++i) {
    const auto multisets = enumerate_multisets(n, i);
    Eigen::MatrixXd A(n, static_cast<Index>(multisets.size()));
    std::vector<Eigen::VectorXd> args(static_cast<std::size_t>(i));
    for (std::size_t c = 0; c < multisets.size(); ++c) {
      for (int j = 0; j < i; ++j) args[static_cast<std::size_t>(j)] = Vm.col(multisets[c].entries[static_cast<std::size_t>(j)]);
      A.col(static_cast<Index>(c)) =
          static_cast<double>(multiplicity(multisets[c])) * (Vm.transpose() * fom.multilinear(i, args));
    }
    ops.push_back(std::move(A));
  }
  Eigen::MatrixXd B = Vm.transpose() * fom.input_matrix();
  return PolynomialModel(std::move(ops), std::move(B), Provenance::intrusive);
}

Trajectory reduced_simulate(const PolynomialModel& model, const Eigen::VectorXd& z0, const Eigen::MatrixXd& U,
                            Index K) {
  check_simulation_args(model.reduced_dim(), model.input_dim(), z0, U, K);
  Trajectory traj;
  if (!z0.allFinite()) {
    traj.states.resize(model.reduced_dim(), 0);
    traj.diverged_at = 0;
    return traj;
  }
  traj.states.resize(model.reduced_dim(), K + 1);
  traj.states.col(0) = z0;
  Eigen::VectorXd z = z0;
  Eigen::VectorXd next(model.reduced_dim());
  Eigen::VectorXd u(model.input_dim());
  StepBuffers buf;
  for (Index k = 0; k < K; ++k) {
    if (u.size() > 0) u = U.col(k);
    step_into(model, z, u, next, buf);
    if (!next.allFinite()) {
      traj.diverged_at = k + 1;
      traj.states.conservativeResize(Eigen::NoChange, k + 1);
      return traj;
    }
    traj.states.col(k + 1) = next;
    z.swap(next);
  }
  return traj;
}

PolynomialModel truncate(const PolynomialModel& model, Index n_prime) {
  const Index n = model.reduced_dim();
  if (n_prime < 1) throw std::invalid_argument("truncate: target dimension must be positive");
  if (n_prime > n) throw std::invalid_argument("truncate: target dimension exceeds model dimension");
  std::vector<Eigen::MatrixXd> ops;
  for (int i = 1; i <= model.degree(); ++i) {
    const auto kept = enumerate_multisets(n_prime, i);
    Eigen::MatrixXd A(n_prime, static_cast<Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
      A.col(static_cast<Index>(c)) = model.op(i).col(multiset_rank(kept[c], n)).head(n_prime);
    }
    ops.push_back(std::move(A));
  }
  return PolynomialModel(std::move(ops), model.input_operator().topRows(n_prime), model.provenance());
}

Eigen::VectorXd natural_spline_weights(const std::vector<double>& x, double mu_star) {
  const auto m = static_cast<Index>(x.size());
  if (m < 2) throw std::invalid_argument("spline: need at least two nodes");
  for (Index j = 1; j < m; ++j) {
    if (!(x[static_cast<std::size_t>(j)] > x[static_cast<std::size_t>(j - 1)])) {
      throw std::invalid_argument("spline: nodes must be strictly increasing");
    }
  }
  if (!(mu_star >= x.front() && mu_star <= x.back())) throw std::invalid_argument("spline: extrapolation requested");
  auto at = [&](Index j) { return x[static_cast<std::size_t>(j)]; };

  // Second derivatives M = G y with natural end conditions M_0 = M_{m-1} = 0.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  if (m > 2) {
    const Index q = m - 2;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(q, q);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(q, m);
    for (Index r = 0; r < q; ++r) {
      const Index i = r + 1;
      const double hl = at(i) - at(i - 1);
      const double hr = at(i + 1) - at(i);
      T(r, r) = (hl + hr) / 3.0;
      if (r > 0) T(r, r - 1) = hl / 6.0;
      if (r + 1 < q) T(r, r + 1) = hr / 6.0;
      R(r, i + 1) += 1.0 / hr;
      R(r, i) -= 1.0 / hr + 1.0 / hl;
      R(r, i - 1) += 1.0 / hl;
    }
    G.middleRows(1, q) = T.partialPivLu().solve(R);
  }

  Index k = 0;
  while (k + 2 < m && mu_star > at(k + 1)) ++k;
  const double h = at(k + 1) - at(k);
  const double a = (at(k + 1) - mu_star) / h;
  const double b = 1.0 - a;
  const double c = (a * a * a - a) * h * h / 6.0;
  const double d = (b * b * b - b) * h * h / 6.0;
  Eigen::VectorXd w = c * G.row(k).transpose() + d * G.row(k + 1).transpose();
  w[k] += a;
  w[k + 1] += b;
  return w;
}

PolynomialModel interpolate(const std::vector<double>& params, const std::vector<PolynomialModel>& models,
                            double mu_star) {
  if (params.size() != models.size()) throw std::invalid_argument("interpolate: parameter/model count mismatch");
  if (params.size() < 2) throw std::invalid_argument("interpolate: need at least two parameters");
  const auto& ref = models.front();
  for (const auto& m : models) {
    if (m.degree() != ref.degree() || m.reduced_dim() != ref.reduced_dim() || m.input_dim() != ref.input_dim()) {
      throw std::invalid_argument("interpolate: models have inconsistent shapes");
    }
  }
  std::vector<std::size_t> order(params.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return params[a] < params[b]; });
  std::vector<double> sorted;
  for (auto j : order) sorted.push_back(params[j]);
  const Eigen::VectorXd w = natural_spline_weights(sorted, mu_star);

  std::vector<Eigen::MatrixXd> ops;
  for (int i = 1; i <= ref.degree(); ++i) ops.push_back(Eigen::MatrixXd::Zero(ref.op(i).rows(), ref.op(i).cols()));
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(ref.reduced_dim(), ref.input_dim());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const double wr = w[static_cast<Index>(r)];
    if (wr == 0.0) continue;
    const auto& m = models[order[r]];
    for (int i = 1; i <= ref.degree(); ++i) ops[static_cast<std::size_t>(i - 1)] += wr * m.op(i);
    B += wr * m.input_operator();
  }
  return PolynomialModel(std::move(ops), std::move(B), Provenance::interpolated);
}

void write_model_bundle(const std::string& directory, const PolynomialModel& model, const ModelMetadata& meta) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);
  for (int i = 1; i <= model.degree(); ++i) {
    write_matrix_csv_file((dir / ("A" + std::to_string(i) + ".csv")).string(), model.op(i));
  }
  write_matrix_csv_file((dir / "B.csv").string(), model.input_operator());
  nlohmann::ordered_json manifest;
  manifest["schema_version"] = 1;
  manifest["degree"] = model.degree();
  manifest["reduced_dim"] = model.reduced_dim();
  manifest["input_dim"] = model.input_dim();
  manifest["provenance"] = to_string(model.provenance());
  manifest["mu"] = meta.mu ? nlohmann::ordered_json(*meta.mu) : nlohmann::ordered_json(nullptr);
  manifest["seed"] = meta.seed ? nlohmann::ordered_json(*meta.seed) : nlohmann::ordered_json(nullptr);
  manifest["ordering"] = kOrderingConvention;
  std::ofstream os(dir / "manifest.json");
  os << manifest.dump(2) << '\n';
}

PolynomialModel read_model_bundle(const std::string& directory, ModelMetadata* meta) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  std::ifstream is(dir / "manifest.json");
  if (!is) throw std::runtime_error("read_model_bundle: missing manifest in " + directory);
  const auto manifest = nlohmann::json::parse(is);
  if (manifest.at("ordering").get<std::string>() != kOrderingConvention) {
    throw std::runtime_error("read_model_bundle: unsupported monomial ordering");
  }
  const int degree = manifest.at("degree").get<int>();
  const Index n = manifest.at("reduced_dim").get<Index>();
  const Index p = manifest.at("input_dim").get<Index>();
  std::vector<Eigen::MatrixXd> ops;
  for (int i = 1; i <= degree; ++i) ops.push_back(read_matrix_csv_file((dir / ("A" + std::to_string(i) + ".csv")).string()));
  Eigen::MatrixXd B = p > 0 ? read_matrix_csv_file((dir / "B.csv").string()) : Eigen::MatrixXd(n, 0);
  if (meta) {
    meta->mu = manifest.at("mu").is_null() ? std::nullopt : std::optional<double>(manifest["mu"].get<double>());
    meta->seed = manifest.at("seed").is_null() ? std::nullopt
                                               : std::optional<std::uint64_t>(manifest["seed"].get<std::uint64_t>());
  }
  PolynomialModel model(std::move(ops), std::move(B), provenance_from_string(manifest.at("provenance")));
  if (model.reduced_dim() != n) throw std::runtime_error("read_model_bundle: manifest dimension mismatch");
  return model;
}

}  // namespace opinfer
