#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Dense>

namespace opinfer {

/// Seedable generator used everywhere randomness enters: std::mt19937_64,
/// mapped to [0, 1) through its top 53 bits so the stream of doubles is the
/// same across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double low, double high) {
    const double v = low + (high - low) * uniform01();
    return v < high ? v : std::nextafter(high, low);
  }

 private:
  std::mt19937_64 engine_;
};

/// p x K input matrix (columns u_0 .. u_{K-1}) plus the seed it came from.
struct InputTrajectory {
  Eigen::MatrixXd inputs;
  std::optional<std::uint64_t> seed;
};

/// i.i.d. uniform entries in [low, high), filled column by column.
InputTrajectory random_input_trajectory(Eigen::Index K, Eigen::Index p, double low, double high,
                                        std::uint64_t seed);

}  // namespace opinfer
