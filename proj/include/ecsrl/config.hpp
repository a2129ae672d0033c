#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "ecsrl/agents.hpp"
#include "ecsrl/trainer.hpp"
#include "ecsrl/world.hpp"

namespace ecsrl {

// Ablation variants: which shaped reward terms stay active.
enum class Variant { kRl, kRlDr, kRlIr, kRlDrIr };

Variant variant_from_string(const std::string& name);
std::string variant_to_string(Variant v);

// Zeroes the coefficients the variant ablates; the base values are kept for
// the terms it retains.
RewardCoefficients apply_variant(const RewardCoefficients& base, Variant v);

struct RunConfig {
  uint64_t seed = 1;
  Variant variant = Variant::kRlDrIr;
  std::string verbosity = "per-round";  // or "summary"

  WorldConfig world;
  int hidden_dim = kDefaultHidden;
  double init_scale = kDefaultInitScale;

  TrainConfig train;
  PretrainConfig pretrain;

  int corpus_worlds = 480;
  int eval_episodes = 50;
  int pool_size = 50;

  AgentDims dims() const { return AgentDims::from_world(world, hidden_dim); }
  // Coefficients actually used for training under the configured variant.
  RewardCoefficients effective_coeff() const {
    return apply_variant(train.coeff, variant);
  }
};

// Reads a flat `key = value` file ('#' starts a comment). Unknown keys and
// malformed lines are data errors.
RunConfig parse_config_file(const std::filesystem::path& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value);

void validate_config(const RunConfig& cfg);

// Canonical serialisation: every key in fixed order, used for hashing and
// for the config echo placed in output headers.
std::string canonical_config(const RunConfig& cfg);
nlohmann::ordered_json config_echo(const RunConfig& cfg);

// FNV-1a over the fields that determine parameter shapes and episode length;
// checkpoints carry it so a mismatched scene/agent geometry is rejected while
// variant and schedule changes remain allowed.
uint64_t model_hash(const RunConfig& cfg);

uint64_t fnv1a(const std::string& text);

}  // namespace ecsrl
