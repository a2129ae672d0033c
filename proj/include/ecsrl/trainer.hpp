#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ecsrl/agents.hpp"
#include "ecsrl/rewards.hpp"
#include "ecsrl/world.hpp"

namespace ecsrl {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  int episodes_per_epoch = 320;
  int rounds = 10;
  double lr_q = 1e-3;
  double lr_q_floor = 5e-5;
  double lr_a = 1e-4;
  double lr_a_floor = 5e-6;
  double clip_bound = 5.0;
  double gamma = 0.6;  // polarization threshold for coverage updates
  RewardCoefficients coeff;
  int k_start = 9;
  int k_end = 4;
  int k_anneal_epochs = 2;
  uint64_t seed = 1;
  double baseline_decay = 0.9;  // 0 disables the per-round reward baseline
  // Rate of the normalized regression-tracking step per batch; 0 freezes the
  // head, rates below 2 are stable at any dialogue depth. Must be in [0, 2).
  double regression_weight = 1.0;
  bool future_attribution = false;  // weight log-probs by summed future reward
  int threads = 1;
};

struct PretrainConfig {
  int epochs = 100;
  int batch_size = 16;
  double lr_q = 0.02;   // question cross-entropy step
  double lr_a = 0.2;    // answer cross-entropy / attention step
  // Scale on the per-epoch full-batch regression step. The step length itself
  // comes from an exact line search on the quadratic loss, so 1 is the
  // greedy step, anything below 2 decreases the loss monotonically, and 0
  // freezes the head. Must lie in [0, 2).
  double regression_weight = 1.0;
  uint64_t seed = 1;
};

struct ScriptedRound {
  QuestionToken q;
  AnswerToken a;
};

struct ScriptedDialogue {
  World world;
  std::vector<ScriptedRound> rounds;
};

using Corpus = std::vector<ScriptedDialogue>;

ScriptedDialogue make_scripted_dialogue(const World& w, int rounds);
Corpus make_corpus(const WorldConfig& wc, int count, int rounds, RngStream& rng);

struct RoundEntry {
  QuestionToken q;
  double logp_q = 0.0;
  AnswerToken a;
  double logp_a = 0.0;
  EcsSnapshot ecs;  // state after this round's update
  RewardComponents reward;
  double pred_dist = 0.0;  // squared distance of the guess after this round
  bool scripted = false;
};

struct EpisodeRecord {
  World world;
  int k = 0;
  Ivc initial_ivc;
  double initial_pred_dist = 0.0;
  std::vector<RoundEntry> rounds;
};

enum class RolloutMode { kSample, kGreedy };

struct EpisodeOptions {
  int k = 0;  // scripted-curriculum prefix length, clamped to [0, rounds]
  RolloutMode mode = RolloutMode::kSample;
  // Fixed initial attention (oracle tests); sampled from rng when absent.
  std::optional<Ivc> initial_ivc;
  // When set, non-scripted rounds take these actions instead of sampling.
  const std::vector<ScriptedRound>* forced = nullptr;
};

EpisodeRecord run_episode(const QBotParams& qp, const ABotParams& ap, const World& w,
                          const TrainConfig& cfg, const AgentDims& dims,
                          RngStream& rng, const EpisodeOptions& opts);

// Per-round-index moving-average reward baseline. Index 0 is unused.
struct Baselines {
  std::vector<double> per_round;
};

Baselines make_baselines(int rounds);

struct UpdateDiagnostics {
  int episodes = 0;
  double mean_orig = 0.0;
  double mean_div = 0.0;
  double mean_inf = 0.0;
  double mean_total = 0.0;
  double q_ce = 0.0;       // mean over scripted rounds
  double a_ce = 0.0;
  double reg_mse = 0.0;    // mean over per-round guesses
  double max_component = 0.0;  // largest |gradient entry| after clamping
  long policy_terms_scripted = 0;  // stays 0: curriculum rounds never get
  long policy_terms_sampled = 0;   // policy-gradient contributions
};

// Replays one recorded episode against the current parameters and adds its
// gradient contributions (ascent direction) into the accumulators. Policy
// terms use (attribution - baseline) * grad log pi and only touch rounds
// past the curriculum prefix; scripted rounds contribute likelihood and
// regression terms instead.
void accumulate_episode_grads(const EpisodeRecord& ep, const QBotParams& qp,
                              const ABotParams& ap, const AgentDims& dims,
                              const TrainConfig& cfg, const Baselines& base,
                              QBotGrads& qg, ABotGrads& ag, UpdateDiagnostics& diag);

// Sums gradients over the batch, clamps each entry to [-clip_bound,
// clip_bound], takes one SGD step per agent and refreshes the baselines.
UpdateDiagnostics reinforce_update(const std::vector<EpisodeRecord>& batch,
                                   QBotParams& qp, ABotParams& ap, Baselines& base,
                                   const TrainConfig& cfg, const AgentDims& dims,
                                   double lr_q, double lr_a);

// Curriculum length for an epoch: starts at k_start and drops by one every
// k_anneal_epochs epochs until it reaches k_end.
int anneal_k(int epoch, const TrainConfig& cfg);

// Multiplicative per-epoch decay that reaches the floor exactly at the final
// epoch.
double lr_at(int epoch, double lr0, double lr_floor, int total_epochs);

struct PretrainEpochStats {
  double q_ce = 0.0;
  double a_ce = 0.0;
  double reg_mse = 0.0;
};

struct PretrainStats {
  std::vector<PretrainEpochStats> epochs;
};

PretrainStats pretrain_sl(QBotParams& qp, ABotParams& ap, const Corpus& corpus,
                          const PretrainConfig& cfg, const AgentDims& dims);

struct SlEval {
  double q_ce = 0.0;
  double a_ce = 0.0;
  double reg_mse = 0.0;
  double answer_accuracy = 0.0;  // argmax answers matching the scripted ones
  double round0_mse = 0.0;       // guess error before any question
  double final_mse = 0.0;        // guess error after the full dialogue
};

SlEval evaluate_sl(const QBotParams& qp, const ABotParams& ap, const Corpus& corpus,
                   const AgentDims& dims);

struct TrainState {
  int next_epoch = 0;
  int64_t episodes_done = 0;
  Baselines baselines;
  RngStream rng;
};

struct EpochDiagnostics {
  int epoch = 0;
  int k = 0;
  double lr_q = 0.0;
  double lr_a = 0.0;
  UpdateDiagnostics update;
};

struct TrainCallbacks {
  std::function<void(const EpisodeRecord&, int64_t index)> on_episode;
  std::function<void(const EpochDiagnostics&)> on_epoch;
  // Returning true after an epoch pauses the run; the state stays resumable,
  // and rerunning with the same config continues exactly where it stopped.
  std::function<bool(int epoch)> stop_after;
};

// Rolls out `count` episodes on freshly generated worlds. Episode streams
// derive from (seed, global episode index), so results are identical for any
// thread count and after checkpoint resume.
std::vector<EpisodeRecord> rollout_batch(const QBotParams& qp, const ABotParams& ap,
                                         const WorldConfig& wc, const TrainConfig& cfg,
                                         const AgentDims& dims, int k,
                                         int64_t first_episode, int count);

// Runs epochs [state.next_epoch, cfg.epochs).
void run_training(QBotParams& qp, ABotParams& ap, TrainState& state,
                  const TrainConfig& cfg, const WorldConfig& wc, const AgentDims& dims,
                  const TrainCallbacks& callbacks);

// --- exhaustive oracle -----------------------------------------------------

struct OracleTrajectory {
  std::vector<ScriptedRound> actions;  // one entry per non-scripted round
  double log_prob = 0.0;
  double reward = 0.0;  // summed over all rounds of the episode
};

struct OracleResult {
  double objective = 0.0;  // sum over trajectories of prob * reward
  std::vector<OracleTrajectory> trajectories;
  QBotGrads q_grads;  // likelihood-ratio gradient of the objective
  ABotGrads a_grads;
};

// Enumerates every action sequence of the non-scripted rounds, replaying each
// through the exact episode mechanics. Trajectory count is capped at 1e6.
OracleResult exact_objective(const QBotParams& qp, const ABotParams& ap,
                             const World& w, const TrainConfig& cfg,
                             const AgentDims& dims, int k, const Ivc& initial_ivc);

// Same enumeration with per-trajectory rewards frozen to the values captured
// in `frozen`; used to finite-difference the probability weighting alone.
double reweighted_objective(const QBotParams& qp, const ABotParams& ap, const World& w,
                            const TrainConfig& cfg, const AgentDims& dims, int k,
                            const Ivc& initial_ivc,
                            const std::vector<OracleTrajectory>& frozen);

}  // namespace ecsrl
