#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

#ifndef ECSRL_CLI_PATH
#error "ECSRL_CLI_PATH must point at the command-line binary"
#endif

struct RunResult {
  int exit_code = -1;
  std::string output;
};

// Runs the CLI with the given arguments, capturing stdout+stderr.
RunResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::path log = fs::temp_directory_path() / ("cli_out_" + std::to_string(counter++));
  std::string cmd = std::string(ECSRL_CLI_PATH) + " " + args + " > " +
                    log.string() + " 2>&1";
  int raw = std::system(cmd.c_str());
  RunResult res;
#ifdef _WIN32
  res.exit_code = raw;
#else
  res.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
#endif
  std::ifstream in(log);
  std::ostringstream os;
  os << in.rdbuf();
  res.output = os.str();
  fs::remove(log);
  return res;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Writes a small-geometry configuration so the pipeline stays fast and
// returns the flags that point the CLI at it.
std::string tiny_flags(const fs::path& dir, const std::string& extra = "") {
  fs::path cfg = dir / "tiny.cfg";
  if (!fs::exists(cfg)) {
    std::ofstream out(cfg);
    out << "seed = 5\n"
           "num_objects = 3\n"
           "num_attributes = 2\n"
           "num_values = 3\n"
           "rounds = 4\n"
           "k_start = 3\n"
           "k_end = 1\n"
           "k_anneal_epochs = 1\n"
           "epochs = 2\n"
           "batch_size = 4\n"
           "episodes_per_epoch = 8\n"
           "pretrain_epochs = 2\n"
           "pretrain_batch_size = 8\n"
           "corpus_worlds = 16\n"
           "eval_episodes = 6\n"
           "pool_size = 6\n";
  }
  return "--config " + cfg.string() + " " + extra;
}

}  // namespace

TEST_CASE("help and usage errors use the documented exit codes") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("pretrain --help").exit_code == 0);
  CHECK(run_cli("no-such-command").exit_code == 1);
  CHECK(run_cli("selftalk").exit_code == 1);  // missing required --checkpoint
  CHECK(run_cli("pretrain --variant nope").exit_code == 1);
  CHECK(run_cli("gen-corpus --count -3").exit_code == 1);
  CHECK(run_cli("report").exit_code == 1);  // missing required --in
}

TEST_CASE("data problems exit with code 2") {
  TempDir dir("cli_data_err");
  RunResult missing = run_cli("train-rl --checkpoint /nonexistent/ckpt.json --out " +
                              (dir.path / "out").string());
  CHECK(missing.exit_code == 2);

  fs::path bogus = dir.path / "not_a_trace.jsonl";
  std::ofstream(bogus) << "plainly,not,json\n";
  CHECK(run_cli("validate-trace " + bogus.string()).exit_code == 2);

  fs::path badcfg = dir.path / "bad.cfg";
  std::ofstream(badcfg) << "rounds nine\n";
  CHECK(run_cli("pretrain --config " + badcfg.string()).exit_code == 2);

  // structurally fine config with out-of-range values
  fs::path invalid = dir.path / "invalid.cfg";
  std::ofstream(invalid) << "num_objects = 1\n";
  RunResult r = run_cli("pretrain --config " + invalid.string() + " --out " +
                        (dir.path / "o").string());
  CHECK(r.exit_code == 2);
}

TEST_CASE("the full pipeline runs end to end through the binary") {
  TempDir dir("cli_pipeline");
  fs::path corpus = dir.path / "corpus";
  fs::path pre = dir.path / "pre";
  fs::path rl = dir.path / "rl";
  fs::path talk = dir.path / "talk";
  fs::path report = dir.path / "report";

  CHECK(run_cli("gen-corpus " + tiny_flags(dir.path, "--out " + corpus.string()))
            .exit_code == 0);
  CHECK(fs::exists(corpus / "corpus.jsonl"));

  CHECK(run_cli("pretrain " +
                tiny_flags(dir.path, "--corpus " + (corpus / "corpus.jsonl").string() +
                                         " --out " + pre.string()))
            .exit_code == 0);
  CHECK(fs::exists(pre / "checkpoint.json"));

  CHECK(run_cli("train-rl " +
                tiny_flags(dir.path, "--checkpoint " +
                                         (pre / "checkpoint.json").string() +
                                         " --out " + rl.string()))
            .exit_code == 0);
  CHECK(fs::exists(rl / "checkpoint.json"));
  CHECK(fs::exists(rl / "diagnostics.csv"));
  CHECK(fs::exists(rl / "train_trace.jsonl"));

  CHECK(run_cli("selftalk " +
                tiny_flags(dir.path, "--checkpoint " +
                                         (rl / "checkpoint.json").string() +
                                         " --episodes 6 --out " + talk.string()))
            .exit_code == 0);
  CHECK(fs::exists(talk / "transcripts.jsonl"));

  RunResult rep = run_cli("report --in " + talk.string() + " --out " +
                          report.string());
  CHECK(rep.exit_code == 0);
  CHECK(fs::exists(report / "report.csv"));

  RunResult val = run_cli("validate-trace " + (rl / "train_trace.jsonl").string() +
                          " " + (talk / "trace.jsonl").string());
  CHECK(val.exit_code == 0);
  CHECK(val.output.find("episodes") != std::string::npos);
}

TEST_CASE("ablation variants zero their reward weights in the trace header") {
  TempDir dir("cli_variant");
  fs::path pre = dir.path / "pre";
  fs::path rl = dir.path / "rl";
  CHECK(run_cli("pretrain " + tiny_flags(dir.path, "--out " + pre.string()))
            .exit_code == 0);
  CHECK(run_cli("train-rl " +
                tiny_flags(dir.path, "--variant rl --checkpoint " +
                                         (pre / "checkpoint.json").string() +
                                         " --out " + rl.string()))
            .exit_code == 0);
  std::ifstream in(rl / "train_trace.jsonl");
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header.find("\"coefficients\"") != std::string::npos);
  CHECK(header.find("\"div\":0.0") != std::string::npos);
  CHECK(header.find("\"inf\":0.0") != std::string::npos);
}
