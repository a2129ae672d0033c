#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecsrl/commands.hpp"
#include "ecsrl/config.hpp"
#include "ecsrl/errors.hpp"

namespace {

using namespace ecsrl;

struct CommonOpts {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<std::string> verbosity;
  std::string out = "out";
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "key = value configuration file");
  sub->add_option("--seed", o.seed, "master seed (overrides the config file)");
  sub->add_option("--variant", o.variant, "reward ablation variant")
      ->check(CLI::IsMember({"rl", "rl-dr", "rl-ir", "rl-dr-ir"}));
  sub->add_option("--verbosity", o.verbosity, "trace detail level")
      ->check(CLI::IsMember({"summary", "per-round"}));
  sub->add_option("--out", o.out, "output directory");
}

RunConfig resolve_config(const CommonOpts& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = parse_config_file(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.variant) cfg.variant = variant_from_string(*o.variant);
  if (o.verbosity) cfg.verbosity = *o.verbosity;
  return cfg;
}

std::vector<SweepCell> parse_grid(const std::string& text) {
  std::vector<SweepCell> grid;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    std::string cell =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    size_t colon = cell.find(':');
    if (colon == std::string::npos) {
      throw UsageError("--grid cells must look like DIV:INF (e.g. 0.1:0.01)");
    }
    try {
      size_t used = 0;
      double div = std::stod(cell.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument(cell);
      std::string inf_text = cell.substr(colon + 1);
      double inf = std::stod(inf_text, &used);
      if (used != inf_text.size()) throw std::invalid_argument(cell);
      grid.push_back(SweepCell{div, inf});
    } catch (const std::exception&) {
      throw UsageError("--grid cell '" + cell + "' is not a DIV:INF number pair");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (grid.empty()) throw UsageError("--grid needs at least one DIV:INF cell");
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Cooperative image-guessing dialogue trainer with concern-state reward shaping"};
  app.require_subcommand(1);

  CommonOpts gen_opts;
  int gen_count = 0;
  CLI::App* gen = app.add_subcommand(
      "gen-corpus", "Generate a scripted-dialogue corpus (corpus.jsonl)");
  add_common(gen, gen_opts);
  gen->add_option("--count", gen_count, "number of scenes (overrides corpus_worlds)")
      ->check(CLI::PositiveNumber);

  CommonOpts pre_opts;
  std::string pre_corpus;
  CLI::App* pre = app.add_subcommand(
      "pretrain", "Supervised warm-up; writes checkpoint.json and pretrain_loss.csv");
  add_common(pre, pre_opts);
  pre->add_option("--corpus", pre_corpus,
                  "corpus.jsonl to train on (generated in memory when omitted)");

  CommonOpts rl_opts;
  std::string rl_checkpoint;
  CLI::App* rl = app.add_subcommand(
      "train-rl",
      "Policy-gradient fine-tuning; writes checkpoint.json, diagnostics.csv and "
      "train_trace.jsonl");
  add_common(rl, rl_opts);
  rl->add_option("--checkpoint", rl_checkpoint,
                 "warm-start checkpoint (pretrain starts fresh, rl resumes)");
  int rl_stop_after = 0;
  rl->add_option("--stop-after", rl_stop_after,
                 "pause once this many total epochs are complete (resumable)")
      ->check(CLI::NonNegativeNumber);

  CommonOpts talk_opts;
  std::string talk_checkpoint;
  int talk_episodes = 0;
  CLI::App* talk = app.add_subcommand(
      "selftalk",
      "Greedy self-play evaluation; writes transcripts.jsonl, predictions.jsonl and "
      "trace.jsonl");
  add_common(talk, talk_opts);
  talk->add_option("--checkpoint", talk_checkpoint, "trained checkpoint")->required();
  talk->add_option("--episodes", talk_episodes,
                   "dialogue count (overrides eval_episodes)")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> report_inputs;
  int report_pool = 0;
  std::string report_out = "out";
  CLI::App* rep = app.add_subcommand(
      "report", "Dialogue and retrieval metrics over selftalk outputs (report.csv)");
  rep->add_option("--in", report_inputs, "selftalk output directories")
      ->required()
      ->expected(-1);
  rep->add_option("--pool-size", report_pool,
                  "retrieval pool size (0 = each input's configured value)")
      ->check(CLI::NonNegativeNumber);
  rep->add_option("--out", report_out, "output directory");

  CommonOpts sweep_opts;
  std::string sweep_grid;
  int sweep_repeats = 3;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Coefficient grid over (alpha_div, alpha_inf); writes sweep.csv");
  add_common(sweep, sweep_opts);
  sweep->add_option("--grid", sweep_grid,
                    "comma-separated DIV:INF cells (default 0.1:0.01,0.05:0.01,"
                    "0.01:0.001)");
  sweep->add_option("--repeats", sweep_repeats, "seeds per cell")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> validate_files;
  CLI::App* validate = app.add_subcommand(
      "validate-trace", "Check trace files: schema, attention simplex, monotone "
                        "coverage, reward recomputation");
  validate->add_option("files", validate_files, "trace JSONL files")
      ->required()
      ->expected(-1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) {
      RunConfig cfg = resolve_config(gen_opts);
      if (gen_count > 0) cfg.corpus_worlds = gen_count;
      cmd_gen_corpus(cfg, gen_opts.out);
      std::cout << "wrote " << (std::filesystem::path(gen_opts.out) / "corpus.jsonl").string()
                << " (" << cfg.corpus_worlds << " scenes)\n";
    } else if (pre->parsed()) {
      RunConfig cfg = resolve_config(pre_opts);
      cmd_pretrain(cfg, pre_corpus, pre_opts.out);
      std::cout << "wrote checkpoint.json, pretrain_loss.csv, pretrain_eval.json in "
                << pre_opts.out << "\n";
    } else if (rl->parsed()) {
      RunConfig cfg = resolve_config(rl_opts);
      cmd_train_rl(cfg, rl_checkpoint, rl_opts.out, rl_stop_after);
      std::cout << "wrote checkpoint.json, diagnostics.csv, train_trace.jsonl in "
                << rl_opts.out << "\n";
    } else if (talk->parsed()) {
      RunConfig cfg = resolve_config(talk_opts);
      int episodes = talk_episodes > 0 ? talk_episodes : cfg.eval_episodes;
      cmd_selftalk(cfg, talk_checkpoint, episodes, talk_opts.out);
      std::cout << "wrote transcripts.jsonl, predictions.jsonl, trace.jsonl in "
                << talk_opts.out << " (" << episodes << " episodes)\n";
    } else if (rep->parsed()) {
      std::vector<std::filesystem::path> inputs(report_inputs.begin(),
                                                report_inputs.end());
      std::filesystem::path out_csv = std::filesystem::path(report_out) / "report.csv";
      cmd_report(inputs, report_pool, out_csv);
      std::cout << "wrote " << out_csv.string() << " (" << inputs.size() << " rows)\n";
    } else if (sweep->parsed()) {
      RunConfig cfg = resolve_config(sweep_opts);
      std::vector<SweepCell> grid =
          sweep_grid.empty() ? default_sweep_grid() : parse_grid(sweep_grid);
      cmd_sweep(cfg, grid, sweep_repeats, sweep_opts.out);
      std::cout << "wrote " << (std::filesystem::path(sweep_opts.out) / "sweep.csv").string()
                << " (" << grid.size() << " cells x " << sweep_repeats << " repeats)\n";
    } else if (validate->parsed()) {
      std::vector<std::filesystem::path> files(validate_files.begin(),
                                               validate_files.end());
      TraceStats stats = cmd_validate_trace(files);
      std::cout << "valid: " << stats.episodes << " episodes, " << stats.rounds
                << " round records, " << stats.summaries << " summaries\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
