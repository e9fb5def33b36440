// opinfer <toy|burgers|chafee|reaction2d|certify|run> --config <path>
//         [--scale desk|paper] [--seed N] [--out DIR]

#include <algorithm>
#include <iostream>

#include <CLI11.hpp>

#include "opinfer/experiments.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator inference with re-projection"};
  app.require_subcommand(1);

  std::string config_path;
  std::string scale = "desk";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  const std::vector<std::string> names = {"toy", "burgers", "chafee", "reaction2d", "certify", "run"};
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name, name == "certify" ? "Recovery certificates only"
                                         : name == "run"   ? "Run the benchmark named in the config"
                                                           : "Run the " + name + " experiment");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--scale", scale, "Preset scale")->check(CLI::IsMember({"desk", "paper"}));
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--out", out, "Output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const bool generic = command == "certify" || command == "run";

  opinfer::ExperimentConfig cfg;
  try {
    cfg = opinfer::load_config(config_path, scale, generic ? "" : command);
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    opinfer::validate(cfg);
  } catch (const opinfer::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const bool certify_only = command == "certify";
    const auto report = certify_only ? opinfer::run_certify(cfg) : opinfer::run_experiment(cfg);
    opinfer::write_report(report, certify_only);
    for (const auto& f : report.failures) std::cerr << "warning: " << f << '\n';
    const bool certified = std::all_of(report.certificates.begin(), report.certificates.end(),
                                       [](const auto& c) { return c.certificate.satisfied; });
    std::cout << "wrote " << cfg.out << " (" << report.metrics.size() << " metric rows, "
              << report.certificates.size() << " certificates, " << report.wall_seconds << " s)\n";
    if (cfg.require_exact_recovery && !certified) {
      std::cerr << "numerical failure: exact recovery requested but a data matrix is not certified\n";
      return kNumericalFailure;
    }
  } catch (const opinfer::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const opinfer::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
