#include "ecsrl/rewards.hpp"

#include <cmath>
#include <string>

#include "ecsrl/errors.hpp"

namespace ecsrl {

double original_reward(const Eigen::VectorXd& target,
                       const Eigen::VectorXd& pred_prev,
                       const Eigen::VectorXd& pred_curr) {
  if (target.size() != pred_prev.size() || target.size() != pred_curr.size()) {
    throw DimensionError("original_reward: feature sizes differ (" +
                         std::to_string(target.size()) + ", " +
                         std::to_string(pred_prev.size()) + ", " +
                         std::to_string(pred_curr.size()) + ")");
  }
  return (target - pred_prev).squaredNorm() - (target - pred_curr).squaredNorm();
}

double diversity_reward(const Ivc& curr, const Ivc& prev) {
  return kl_divergence(curr, prev);
}

double informativity_reward(const Avc& prev, const Avc& curr) {
  if (prev.bits.size() != curr.bits.size()) {
    throw DimensionError("informativity_reward: coverage sizes differ");
  }
  int grew = 0;
  for (size_t j = 0; j < prev.bits.size(); ++j) {
    if (curr.bits[j] < prev.bits[j]) {
      throw ValueError("informativity_reward: coverage lost bit " +
                       std::to_string(j));
    }
    if (curr.bits[j] > prev.bits[j]) grew = 1;
  }
  return static_cast<double>(grew);
}

double total_reward(double orig, double div, double inf,
                    const RewardCoefficients& coeff) {
  if (!std::isfinite(orig) || !std::isfinite(div) || !std::isfinite(inf)) {
    throw NumericError("total_reward: components must be finite");
  }
  return coeff.orig * orig + coeff.div * div + coeff.inf * inf;
}

RewardComponents combine_rewards(double orig, double div, double inf,
                                 const RewardCoefficients& coeff) {
  RewardComponents rc;
  rc.orig = orig;
  rc.div = div;
  rc.inf = inf;
  rc.total = total_reward(orig, div, inf, coeff);
  return rc;
}

}  // namespace ecsrl
