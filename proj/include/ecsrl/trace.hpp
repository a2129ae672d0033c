#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "ecsrl/trainer.hpp"
#include "ecsrl/world.hpp"

namespace ecsrl {

nlohmann::ordered_json world_to_json(const World& w);
World world_from_json(const nlohmann::json& j);

// One JSONL record per round: question, answer, both concern-state vectors,
// the raw and combined rewards and the current guess distance.
nlohmann::ordered_json trace_round_json(int64_t episode, int round, const RoundEntry& r);

// Compact per-episode record used at summary verbosity.
nlohmann::ordered_json trace_summary_json(int64_t episode, const EpisodeRecord& ep);

struct TraceStats {
  int64_t episodes = 0;
  int64_t rounds = 0;
  int64_t summaries = 0;
};

// Structural and numeric validation of a trace file: header first, valid
// simplex attention, binary monotone coverage, and totals that recompute
// from the logged components under the header's coefficients. Throws a data
// error naming the first offending line.
TraceStats validate_trace_file(const std::filesystem::path& path);

}  // namespace ecsrl
