#pragma once

#include <Eigen/Core>

#include "ecsrl/ecs.hpp"

namespace ecsrl {

// Mixing weights for the three reward signals. Defaults correspond to the
// full shaped variant; ablation variants zero individual entries.
struct RewardCoefficients {
  double orig = 1.0;
  double div = 0.1;
  double inf = 0.01;
};

// Raw per-round reward signals plus their weighted sum. Raw values are
// always logged even when a coefficient is zero.
struct RewardComponents {
  double orig = 0.0;
  double div = 0.0;
  double inf = 0.0;
  double total = 0.0;
};

// Guessing progress: how much closer (in squared L2) the questioner's scene
// estimate moved toward the true scene feature this round. Positive when the
// estimate improved.
double original_reward(const Eigen::VectorXd& target,
                       const Eigen::VectorXd& pred_prev,
                       const Eigen::VectorXd& pred_curr);

// Attention-shift bonus: KL between this round's and last round's attention.
double diversity_reward(const Ivc& curr, const Ivc& prev);

// Coverage-growth bonus: 1 when the updated coverage set any new bit.
// Rejects coverage that lost a bit, which would mean corrupted state.
double informativity_reward(const Avc& prev, const Avc& curr);

double total_reward(double orig, double div, double inf,
                    const RewardCoefficients& coeff);

RewardComponents combine_rewards(double orig, double div, double inf,
                                 const RewardCoefficients& coeff);

}  // namespace ecsrl
