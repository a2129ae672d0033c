#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "ecsrl/checkpoint.hpp"
#include "ecsrl/config.hpp"
#include "ecsrl/metrics.hpp"
#include "ecsrl/trace.hpp"
#include "ecsrl/trainer.hpp"

namespace ecsrl {

// ---- in-memory pipeline (shared by the CLI commands, the sweep and tests) --

// Scripted sweep dialogues on corpus_worlds freshly seeded scenes.
Corpus build_corpus(const RunConfig& cfg);

struct PretrainResult {
  QBotParams qbot;
  ABotParams abot;
  PretrainStats stats;
  SlEval holdout;  // evaluation on the corpus tail that training never saw
};

// Fresh agents, supervised warm-up on a generated corpus, held-out eval.
PretrainResult pretrain_in_memory(const RunConfig& cfg);

struct TrainResult {
  QBotParams qbot;
  ABotParams abot;
  TrainState state;
  std::vector<EpochDiagnostics> epochs;
};

TrainState fresh_train_state(const RunConfig& cfg);

// Fine-tunes the given parameters under the config's variant coefficients.
// `callbacks` run on top of the built-in diagnostics collection.
TrainResult train_in_memory(const RunConfig& cfg, QBotParams qbot, ABotParams abot,
                            TrainState state, const TrainCallbacks& callbacks = {});

// Greedy self-play on `count` freshly seeded evaluation worlds (full-length
// dialogues, no scripted prefix).
std::vector<EpisodeRecord> selftalk_episodes(const RunConfig& cfg, const QBotParams& qp,
                                             const ABotParams& ap, int count);

// Replays a dialogue to recover the questioner's guess after rounds 0..T.
std::vector<Eigen::VectorXd> predictions_by_round(const QBotParams& qp,
                                                  const EpisodeRecord& ep,
                                                  const AgentDims& dims);

// Question encoding used by the dialogue metrics: [selector, N + attribute],
// so slot and attribute tokens can never alias each other.
TokenSeq question_tokens(const QuestionToken& q, const AgentDims& dims);

struct EpisodePredictions {
  std::vector<Eigen::VectorXd> by_round;  // index t = guess after round t
};

struct ReportRow {
  std::string label;
  int episodes = 0;
  int pool_size = 0;
  double unique_question = 0.0;  // mean distinct questions per dialogue
  double mutual_overlap = 0.0;   // mean self-similarity per dialogue
  double dist_1 = 0.0;
  double dist_2 = 0.0;
  double ent_1 = 0.0;
  double ent_2 = 0.0;
  double mrr = 0.0;
  double r_at_1 = 0.0;
  double r_at_5 = 0.0;
  double pmr = 0.0;                  // after the final round
  std::vector<double> pmr_by_round;  // rounds 1..T, pool-averaged
};

// Fixed column layout of the metrics report.
std::string report_header(int rounds);
std::string report_csv_row(const ReportRow& row);

// Dialogue metrics over all episodes; rank metrics over the first
// `pool_size` episodes, each ranked against that same pool of targets.
ReportRow report_row(const std::string& label, const AgentDims& dims, int pool_size,
                     const std::vector<EpisodeRecord>& episodes,
                     const std::vector<EpisodePredictions>& predictions);

// Convenience wrapper that recomputes predictions from the questioner.
ReportRow report_from_episodes(const std::string& label, const RunConfig& cfg,
                               const QBotParams& qp,
                               const std::vector<EpisodeRecord>& episodes);

// ---- file-based commands (the CLI maps exceptions to exit codes) -----------

// corpus.jsonl: header record, then one scripted dialogue per line.
void cmd_gen_corpus(const RunConfig& cfg, const std::filesystem::path& out_dir);

// Loads and validates a corpus file, including answer/oracle consistency.
Corpus load_corpus(const std::filesystem::path& path);

// checkpoint.json (kind "pretrain"), pretrain_loss.csv (one row per epoch)
// and pretrain_eval.json (held-out scripted-dialogue metrics). An empty
// corpus path generates the corpus in memory from the config.
void cmd_pretrain(const RunConfig& cfg, const std::filesystem::path& corpus_path,
                  const std::filesystem::path& out_dir);

// checkpoint.json (kind "rl"), diagnostics.csv (one row per epoch) and
// train_trace.jsonl at the configured verbosity. A "pretrain" checkpoint
// starts fresh fine-tuning; an "rl" checkpoint resumes where it stopped. An
// empty checkpoint path starts from freshly initialized agents. A positive
// `stop_after_epochs` pauses once that many total epochs are complete; the
// written checkpoint then resumes under the same config without drift.
void cmd_train_rl(const RunConfig& cfg, const std::filesystem::path& checkpoint_path,
                  const std::filesystem::path& out_dir, int stop_after_epochs = 0);

// transcripts.jsonl, predictions.jsonl (per-round guesses) and trace.jsonl
// over `episodes` greedy self-play dialogues.
void cmd_selftalk(const RunConfig& cfg, const std::filesystem::path& checkpoint_path,
                  int episodes, const std::filesystem::path& out_dir);

// report.csv with one row per input directory (each a cmd_selftalk output).
void cmd_report(const std::vector<std::filesystem::path>& inputs, int pool_size,
                const std::filesystem::path& out_csv);

struct SweepCell {
  double alpha_div = 0.0;
  double alpha_inf = 0.0;
};

std::vector<SweepCell> default_sweep_grid();

// Full pipeline per (cell, repeat) with derived seeds; sweep.csv aggregates
// mean and sample standard deviation per cell. Failing cells are recorded
// with their error and do not stop the sweep.
void cmd_sweep(const RunConfig& base, const std::vector<SweepCell>& grid, int repeats,
               const std::filesystem::path& out_dir);

// Validates each file and returns the combined tallies.
TraceStats cmd_validate_trace(const std::vector<std::filesystem::path>& paths);

}  // namespace ecsrl
