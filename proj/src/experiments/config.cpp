#include <algorithm>
#include <fstream>
#include <set>

#include "opinfer/benchmarks.hpp"
#include "opinfer/experiments.hpp"

namespace opinfer {

std::vector<double> linspace(double a, double b, Index count) {
  if (count < 1) throw ConfigError("parameter grid needs at least one value");
  if (count == 1) return {a};
  std::vector<double> v;
  for (Index i = 0; i < count; ++i) v.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  v.back() = b;
  return v;
}

std::vector<double> midpoints(double a, double b, Index count) {
  if (count < 1) throw ConfigError("parameter grid needs at least one value");
  std::vector<double> v;
  for (Index i = 0; i < count; ++i) v.push_back(a + (b - a) * (static_cast<double>(i) + 0.5) / static_cast<double>(count));
  return v;
}

ExperimentConfig preset(const std::string& benchmark, const std::string& scale) {
  if (scale != "desk" && scale != "paper") throw ConfigError("scale must be 'desk' or 'paper'");
  const bool paper = scale == "paper";
  ExperimentConfig c;
  c.benchmark = benchmark;
  c.scale = scale;
  if (benchmark == "toy") {
    c.N = 10;
    c.K = 100;
    c.degree = 1;
    c.inputs = 0;
    c.toy_dims = {2, 4, 6};
    c.nbar = {6};
  } else if (benchmark == "burgers") {
    c.N = 128;
    c.K = 10000;
    c.dt = 1e-4;
    c.mu = linspace(kBurgersMuMin, kBurgersMuMax, 10);
    c.test_mu = midpoints(kBurgersMuMin, kBurgersMuMax, 7);
    c.m_prime = 5;
    c.input_low = 0.0;
    c.input_high = 10.0;
    c.nbar = {10, 15};
    c.degree = 2;
    c.test_input = TestInput::constant;
    c.test_input_value = 1.0;
  } else if (benchmark == "chafee") {
    c.N = 128;
    c.K = paper ? 400000 : 40000;
    c.dt = 1e-5;
    c.m_prime = 25;
    c.input_low = 0.0;
    c.input_high = 10.0;
    c.nbar = {6, 12};
    c.degree = 3;
    c.test_input = TestInput::sine;
  } else if (benchmark == "reaction2d") {
    c.N = paper ? 64 : 32;
    c.K = 10000;
    c.dt = 1e-2;
    c.mu = linspace(kReactionMuMin, kReactionMuMax, 10);
    c.test_mu = midpoints(kReactionMuMin, kReactionMuMax, 7);
    c.m_prime = 10;
    c.basis_inputs = 1;
    c.input_low = 1.0;
    c.input_high = 1000.0;
    c.nbar = {10};
    c.reproj_horizon = 500;
    c.degree = 3;
    c.diffusivity = kReactionDefaultDiffusivity;
    c.test_input = TestInput::random;
  } else if (benchmark == "custom") {
    c.N = 12;
    c.K = 200;
    c.degree = 2;
    c.inputs = 1;
    c.m_prime = 3;
    c.input_low = -1.0;
    c.input_high = 1.0;
    c.nbar = {4};
    c.test_input = TestInput::random;
  } else {
    throw ConfigError("unknown benchmark '" + benchmark + "'");
  }
  return c;
}

namespace {

std::vector<double> parse_grid(const nlohmann::json& v, bool default_midpoints, const char* key) {
  if (v.is_array()) return v.get<std::vector<double>>();
  if (v.is_object()) {
    for (const auto& [k, _] : v.items()) {
      if (k != "range" && k != "count" && k != "midpoints") throw ConfigError(std::string(key) + ": unknown field '" + k + "'");
    }
    const auto range = v.at("range").get<std::vector<double>>();
    if (range.size() != 2) throw ConfigError(std::string(key) + ".range must have two entries");
    const auto count = v.at("count").get<Index>();
    return v.value("midpoints", default_midpoints) ? midpoints(range[0], range[1], count)
                                                   : linspace(range[0], range[1], count);
  }
  throw ConfigError(std::string(key) + " must be a list or a {range, count} object");
}

std::vector<Index> parse_dims(const nlohmann::json& v) {
  if (v.is_number_integer()) return {v.get<Index>()};
  return v.get<std::vector<Index>>();
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& scale,
                                  const std::string& forced_benchmark) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != 1) {
      throw ConfigError("unsupported schema_version (expected 1)");
    }
    std::string benchmark = forced_benchmark;
    if (j.contains("benchmark")) {
      const auto named = j.at("benchmark").get<std::string>();
      if (!forced_benchmark.empty() && named != forced_benchmark) {
        throw ConfigError("config is for benchmark '" + named + "', command expects '" + forced_benchmark + "'");
      }
      benchmark = named;
    }
    if (benchmark.empty()) throw ConfigError("config does not name a benchmark");
    ExperimentConfig c = preset(benchmark, j.value("scale", scale));

    static const std::set<std::string> known = {
        "schema_version", "benchmark", "scale", "N", "K", "dt", "mu", "test_mu", "m_prime", "basis_inputs",
        "input_range", "nbar", "truncation", "reproj_horizon", "seed", "out", "degree", "diffusivity", "inputs",
        "test_input", "test_K", "toy_dims", "threads", "require_exact_recovery"};
    for (const auto& [k, _] : j.items()) {
      if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
    }
    if (j.contains("N")) c.N = j["N"].get<Index>();
    if (j.contains("K")) c.K = j["K"].get<Index>();
    if (j.contains("dt")) c.dt = j["dt"].get<double>();
    if (j.contains("mu")) c.mu = j["mu"].is_null() ? std::vector<double>{} : parse_grid(j["mu"], false, "mu");
    if (j.contains("test_mu")) {
      c.test_mu = j["test_mu"].is_null() ? std::vector<double>{} : parse_grid(j["test_mu"], true, "test_mu");
    }
    if (j.contains("m_prime")) c.m_prime = j["m_prime"].get<Index>();
    if (j.contains("basis_inputs")) c.basis_inputs = j["basis_inputs"].get<Index>();
    if (j.contains("input_range")) {
      const auto r = j["input_range"].get<std::vector<double>>();
      if (r.size() != 2) throw ConfigError("input_range must have two entries");
      c.input_low = r[0];
      c.input_high = r[1];
    }
    if (j.contains("nbar")) c.nbar = parse_dims(j["nbar"]);
    if (j.contains("truncation")) c.truncation = parse_dims(j["truncation"]);
    if (j.contains("reproj_horizon")) {
      c.reproj_horizon =
          j["reproj_horizon"].is_null() ? std::nullopt : std::optional<Index>(j["reproj_horizon"].get<Index>());
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    if (j.contains("degree")) c.degree = j["degree"].get<int>();
    if (j.contains("diffusivity")) c.diffusivity = j["diffusivity"].get<double>();
    if (j.contains("inputs")) c.inputs = j["inputs"].get<Index>();
    if (j.contains("test_input")) {
      const auto& t = j["test_input"];
      const auto kind = t.at("kind").get<std::string>();
      if (kind == "constant") {
        c.test_input = TestInput::constant;
        c.test_input_value = t.value("value", 1.0);
      } else if (kind == "random") {
        c.test_input = TestInput::random;
      } else if (kind == "sine") {
        c.test_input = TestInput::sine;
      } else {
        throw ConfigError("test_input.kind must be constant, random or sine");
      }
    }
    if (j.contains("test_K")) c.test_K = j["test_K"].get<Index>();
    if (j.contains("toy_dims")) c.toy_dims = parse_dims(j["toy_dims"]);
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("require_exact_recovery")) c.require_exact_recovery = j["require_exact_recovery"].get<bool>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path, const std::string& scale, const std::string& forced_benchmark) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j, scale, forced_benchmark);
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(c.N >= 1 && c.K >= 1, "N and K must be positive");
  require(c.threads >= 1, "threads must be positive");
  require(c.test_K >= 0, "test_K must be non-negative");
  require(c.seed < (std::uint64_t{1} << 62), "seed too large");
  if (c.benchmark == "toy") {
    require(!c.toy_dims.empty(), "toy_dims must not be empty");
    for (Index n : c.toy_dims) require(n >= 1 && n <= c.N, "toy_dims entries must lie in [1, N]");
    return;
  }
  require(c.dt > 0.0 || c.benchmark == "custom", "dt must be positive");
  require(c.m_prime >= 1, "m_prime must be positive");
  require(c.basis_inputs >= 0, "basis_inputs must be non-negative");
  require(c.input_low < c.input_high, "input_range must satisfy low < high");
  require(!c.nbar.empty(), "nbar must not be empty");
  for (Index nb : c.nbar) require(nb >= 1, "nbar entries must be positive");
  const Index nbar_max = *std::max_element(c.nbar.begin(), c.nbar.end());
  for (Index n : c.truncation) require(n >= 1 && n <= nbar_max, "truncation dims must lie in [1, nbar]");
  if (c.reproj_horizon) require(*c.reproj_horizon >= 1 && *c.reproj_horizon <= c.K, "reproj_horizon must lie in [1, K]");

  auto check_domain = [&](const std::vector<double>& values, double lo, double hi, const char* what) {
    for (double v : values) {
      require(v >= lo && v <= hi, std::string(what) + " value " + std::to_string(v) + " outside the parameter domain");
    }
  };
  if (c.benchmark == "burgers") {
    require(c.N >= 3, "burgers needs N >= 3");
    require(!c.mu.empty(), "burgers needs training parameters");
    check_domain(c.mu, kBurgersMuMin, kBurgersMuMax, "mu");
    check_domain(c.test_mu, kBurgersMuMin, kBurgersMuMax, "test_mu");
  } else if (c.benchmark == "reaction2d") {
    require(c.N >= 3, "reaction2d needs N >= 3");
    require(c.degree == 2 || c.degree == 3, "reaction2d degree must be 2 or 3");
    require(c.diffusivity >= 0.0, "diffusivity must be non-negative");
    require(!c.mu.empty(), "reaction2d needs training parameters");
    check_domain(c.mu, kReactionMuMin, kReactionMuMax, "mu");
    check_domain(c.test_mu, kReactionMuMin, kReactionMuMax, "test_mu");
  } else if (c.benchmark == "chafee" || c.benchmark == "custom") {
    require(c.mu.empty(), c.benchmark + " is parameter-free; mu must be empty");
    require(c.test_mu.empty(), c.benchmark + " is parameter-free; test_mu must be empty");
    if (c.benchmark == "custom") {
      require(c.degree >= 1 && c.degree <= 4, "custom degree must lie in [1, 4]");
      require(c.inputs >= 0, "inputs must be non-negative");
    }
  } else {
    throw ConfigError("unknown benchmark '" + c.benchmark + "'");
  }
  if (!c.test_mu.empty()) {
    require(c.mu.size() >= 2, "test parameters need at least two training parameters to interpolate");
    const auto [lo, hi] = std::minmax_element(c.mu.begin(), c.mu.end());
    check_domain(c.test_mu, *lo, *hi, "test_mu (interpolation range)");
    std::set<double> distinct(c.mu.begin(), c.mu.end());
    require(distinct.size() == c.mu.size(), "training parameters must be distinct");
  }
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["benchmark"] = c.benchmark;
  j["scale"] = c.scale;
  j["N"] = c.N;
  j["K"] = c.K;
  j["dt"] = c.dt;
  j["mu"] = c.mu;
  j["test_mu"] = c.test_mu;
  j["m_prime"] = c.m_prime;
  j["basis_inputs"] = c.basis_inputs;
  j["input_range"] = {c.input_low, c.input_high};
  j["nbar"] = c.nbar;
  j["truncation"] = c.truncation;
  j["reproj_horizon"] = c.reproj_horizon ? nlohmann::ordered_json(*c.reproj_horizon) : nlohmann::ordered_json(nullptr);
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["degree"] = c.degree;
  j["diffusivity"] = c.diffusivity;
  j["inputs"] = c.inputs;
  const char* kinds[] = {"constant", "random", "sine"};
  j["test_input"] = {{"kind", kinds[static_cast<int>(c.test_input)]}, {"value", c.test_input_value}};
  j["test_K"] = c.test_K;
  j["toy_dims"] = c.toy_dims;
  j["threads"] = c.threads;
  j["require_exact_recovery"] = c.require_exact_recovery;
  return j;
}

}  // namespace opinfer
