#include "opinfer/random.hpp"

#include <stdexcept>

namespace opinfer {

InputTrajectory random_input_trajectory(Eigen::Index K, Eigen::Index p, double low, double high,
                                        std::uint64_t seed) {
  if (!(low < high)) throw std::invalid_argument("random_input_trajectory: need low < high");
  if (K < 0 || p < 0) throw std::invalid_argument("random_input_trajectory: negative size");
  Rng rng(seed);
  InputTrajectory out{Eigen::MatrixXd(p, K), seed};
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index r = 0; r < p; ++r) out.inputs(r, k) = rng.uniform(low, high);
  }
  return out;
}

}  // namespace opinfer
