#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ecsrl/agents.hpp"
#include "ecsrl/trainer.hpp"

namespace ecsrl {

inline constexpr int kCheckpointVersion = 1;

// Self-describing text snapshot of both agents plus the training cursor
// (epoch, episode counter, baselines, random-stream state). `kind` is
// "pretrain" for supervised warm starts and "rl" for resumable fine-tuning.
struct Checkpoint {
  int version = kCheckpointVersion;
  std::string kind = "pretrain";
  uint64_t model_hash = 0;
  QBotParams qbot;
  ABotParams abot;
  TrainState state;
  nlohmann::ordered_json config_echo;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ecsrl
