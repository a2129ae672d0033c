#include "ecsrl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <utility>

#include "ecsrl/errors.hpp"
#include "ecsrl/io.hpp"

namespace ecsrl {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

// Streaming JSONL writer with write-then-rename semantics: the real path
// only ever holds a complete file. The temp file is removed if an exception
// unwinds before close().
class JsonlWriter {
 public:
  explicit JsonlWriter(std::filesystem::path path)
      : path_(std::move(path)), tmp_(path_.string() + ".tmp"), out_(tmp_, std::ios::trunc) {
    if (!out_) throw DataError("cannot open '" + tmp_.string() + "' for writing");
  }

  JsonlWriter(const JsonlWriter&) = delete;
  JsonlWriter& operator=(const JsonlWriter&) = delete;

  void write(const ordered_json& j) { out_ << j.dump() << '\n'; }

  void close() {
    if (closed_) return;
    out_.flush();
    if (!out_) throw DataError("write failed for '" + tmp_.string() + "'");
    out_.close();
    std::filesystem::rename(tmp_, path_);
    closed_ = true;
  }

  ~JsonlWriter() {
    if (!closed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool closed_ = false;
};

// Common first record of every JSONL artifact: the effective config plus the
// coefficients actually applied to reward totals (after variant zeroing), so
// validators can recompute totals without guessing the variant mapping.
ordered_json file_header(const RunConfig& cfg, const std::string& kind) {
  ordered_json j;
  j["type"] = "header";
  j["kind"] = kind;
  j["config"] = config_echo(cfg);
  RewardCoefficients c = cfg.effective_coeff();
  j["coefficients"] = ordered_json{{"orig", c.orig}, {"div", c.div}, {"inf", c.inf}};
  return j;
}

RunConfig config_from_echo(const json& echo) {
  RunConfig cfg;
  for (auto it = echo.begin(); it != echo.end(); ++it) {
    std::string value;
    if (it->is_string()) {
      value = it->get<std::string>();
    } else if (it->is_boolean()) {
      value = it->get<bool>() ? "true" : "false";
    } else {
      value = it->dump();
    }
    apply_config_line(cfg, it.key(), value);
  }
  return cfg;
}

TrainConfig effective_train_config(const RunConfig& cfg) {
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  tc.coeff = cfg.effective_coeff();
  return tc;
}

PretrainResult pretrain_with_corpus(const RunConfig& cfg, const Corpus& corpus) {
  if (corpus.empty()) throw DataError("pretrain: the corpus is empty");
  AgentDims dims = cfg.dims();
  RngStream init_rng(derive_seed(cfg.seed, kStreamInit));
  PretrainResult out{init_qbot(dims, init_rng, cfg.init_scale),
                     init_abot(dims, init_rng, cfg.init_scale),
                     {},
                     {}};
  size_t n = corpus.size();
  size_t holdout = n >= 6 ? n / 6 : (n >= 2 ? 1 : 0);
  Corpus train(corpus.begin(), corpus.end() - static_cast<long>(holdout));
  Corpus held(corpus.end() - static_cast<long>(holdout), corpus.end());
  if (held.empty()) held = train;  // single-dialogue corpus: evaluate in-sample

  PretrainConfig pc = cfg.pretrain;
  pc.seed = cfg.seed;
  out.stats = pretrain_sl(out.qbot, out.abot, train, pc, dims);
  out.holdout = evaluate_sl(out.qbot, out.abot, held, dims);
  return out;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

}  // namespace

Corpus build_corpus(const RunConfig& cfg) {
  RngStream rng(derive_seed(cfg.seed, kStreamCorpus));
  return make_corpus(cfg.world, cfg.corpus_worlds, cfg.train.rounds, rng);
}

PretrainResult pretrain_in_memory(const RunConfig& cfg) {
  validate_config(cfg);
  return pretrain_with_corpus(cfg, build_corpus(cfg));
}

TrainState fresh_train_state(const RunConfig& cfg) {
  TrainState st;
  st.next_epoch = 0;
  st.episodes_done = 0;
  st.baselines = make_baselines(cfg.train.rounds);
  st.rng = RngStream(derive_seed(cfg.seed, kStreamEpisode));
  return st;
}

TrainResult train_in_memory(const RunConfig& cfg, QBotParams qbot, ABotParams abot,
                            TrainState state, const TrainCallbacks& callbacks) {
  validate_config(cfg);
  AgentDims dims = cfg.dims();
  TrainConfig tc = effective_train_config(cfg);
  TrainResult out{std::move(qbot), std::move(abot), std::move(state), {}};
  TrainCallbacks cb;
  cb.on_episode = callbacks.on_episode;
  cb.on_epoch = [&](const EpochDiagnostics& d) {
    out.epochs.push_back(d);
    if (callbacks.on_epoch) callbacks.on_epoch(d);
  };
  cb.stop_after = callbacks.stop_after;
  run_training(out.qbot, out.abot, out.state, tc, cfg.world, dims, cb);
  return out;
}

std::vector<EpisodeRecord> selftalk_episodes(const RunConfig& cfg, const QBotParams& qp,
                                             const ABotParams& ap, int count) {
  if (count < 1) throw ValueError("selftalk: episode count must be positive");
  AgentDims dims = cfg.dims();
  TrainConfig tc = effective_train_config(cfg);
  uint64_t eval_base = derive_seed(cfg.seed, kStreamEval);
  std::vector<EpisodeRecord> out(count);
  for (int i = 0; i < count; ++i) {
    RngStream rng(derive_seed(eval_base, static_cast<uint64_t>(i)));
    World w = gen_world(cfg.world, rng);
    EpisodeOptions opts;
    opts.k = 0;
    opts.mode = RolloutMode::kGreedy;
    out[i] = run_episode(qp, ap, w, tc, dims, rng, opts);
  }
  return out;
}

std::vector<Eigen::VectorXd> predictions_by_round(const QBotParams& qp,
                                                  const EpisodeRecord& ep,
                                                  const AgentDims& dims) {
  std::vector<Eigen::VectorXd> preds;
  preds.reserve(ep.rounds.size() + 1);
  DialogueHistory h = history_from_caption(default_caption(ep.world), dims);
  preds.push_back(qbot_predict(qp, h));
  for (const RoundEntry& r : ep.rounds) {
    h = observe(h, r.q, r.a, dims);
    preds.push_back(qbot_predict(qp, h));
  }
  return preds;
}

TokenSeq question_tokens(const QuestionToken& q, const AgentDims& dims) {
  return TokenSeq{q.selector, dims.num_objects + q.attribute};
}

std::string report_header(int rounds) {
  std::ostringstream os;
  os << "variant,episodes,pool_size,unique_question,mutual_overlap,dist_1,dist_2,"
        "ent_1,ent_2,mrr,r_at_1,r_at_5,pmr";
  for (int t = 1; t <= rounds; ++t) os << ",pmr_r" << t;
  return os.str();
}

std::string report_csv_row(const ReportRow& row) {
  std::ostringstream os;
  os << row.label << ',' << row.episodes << ',' << row.pool_size << ','
     << fmt(row.unique_question) << ',' << fmt(row.mutual_overlap) << ','
     << fmt(row.dist_1) << ',' << fmt(row.dist_2) << ',' << fmt(row.ent_1) << ','
     << fmt(row.ent_2) << ',' << fmt(row.mrr) << ',' << fmt(row.r_at_1) << ','
     << fmt(row.r_at_5) << ',' << fmt(row.pmr);
  for (double v : row.pmr_by_round) os << ',' << fmt(v);
  return os.str();
}

ReportRow report_row(const std::string& label, const AgentDims& dims, int pool_size,
                     const std::vector<EpisodeRecord>& episodes,
                     const std::vector<EpisodePredictions>& predictions) {
  if (episodes.empty()) throw DataError("report: no episodes to report on");
  if (predictions.size() != episodes.size()) {
    throw DataError("report: predictions do not line up with episodes");
  }
  size_t rounds = episodes.front().rounds.size();
  if (rounds == 0) throw DataError("report: dialogues have no rounds");
  for (const EpisodeRecord& ep : episodes) {
    if (ep.rounds.size() != rounds) {
      throw DataError("report: inconsistent dialogue lengths");
    }
  }
  for (const EpisodePredictions& p : predictions) {
    if (p.by_round.size() != rounds + 1) {
      throw DataError("report: predictions must cover rounds 0 through T");
    }
  }
  if (pool_size < 2 || pool_size > static_cast<int>(episodes.size())) {
    throw DataError("report: pool size must lie in [2, episode count]");
  }

  ReportRow row;
  row.label = label;
  row.episodes = static_cast<int>(episodes.size());
  row.pool_size = pool_size;

  std::vector<TokenSeq> all_questions;
  double uq = 0.0;
  double mo = 0.0;
  for (const EpisodeRecord& ep : episodes) {
    std::vector<TokenSeq> qs;
    qs.reserve(ep.rounds.size());
    for (const RoundEntry& r : ep.rounds) {
      qs.push_back(question_tokens(r.q, dims));
      all_questions.push_back(qs.back());
    }
    uq += unique_question(qs);
    mo += mutual_overlap(qs);
  }
  row.unique_question = uq / static_cast<double>(episodes.size());
  row.mutual_overlap = mo / static_cast<double>(episodes.size());
  row.dist_1 = dist_n(all_questions, 1);
  row.dist_2 = dist_n(all_questions, 2);
  row.ent_1 = ent_n(all_questions, 1);
  row.ent_2 = ent_n(all_questions, 2);

  std::vector<Eigen::VectorXd> pool;
  pool.reserve(pool_size);
  for (int i = 0; i < pool_size; ++i) pool.push_back(target_feature(episodes[i].world));

  std::vector<int> final_ranks;
  final_ranks.reserve(pool_size);
  row.pmr_by_round.assign(rounds, 0.0);
  for (int i = 0; i < pool_size; ++i) {
    for (size_t t = 1; t <= rounds; ++t) {
      int rank = rank_of_target(predictions[i].by_round[t], pool, i);
      row.pmr_by_round[t - 1] += pmr_from_rank(rank, pool_size);
      if (t == rounds) final_ranks.push_back(rank);
    }
  }
  for (double& v : row.pmr_by_round) v /= static_cast<double>(pool_size);
  row.pmr = row.pmr_by_round.back();

  RankMetrics rm = rank_metrics(final_ranks, {1, 5});
  row.mrr = rm.mrr;
  row.r_at_1 = rm.recall_at[0];
  row.r_at_5 = rm.recall_at[1];
  return row;
}

ReportRow report_from_episodes(const std::string& label, const RunConfig& cfg,
                               const QBotParams& qp,
                               const std::vector<EpisodeRecord>& episodes) {
  AgentDims dims = cfg.dims();
  std::vector<EpisodePredictions> preds(episodes.size());
  for (size_t i = 0; i < episodes.size(); ++i) {
    preds[i].by_round = predictions_by_round(qp, episodes[i], dims);
  }
  int pool = std::min(cfg.pool_size, static_cast<int>(episodes.size()));
  return report_row(label, dims, pool, episodes, preds);
}

void cmd_gen_corpus(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  validate_config(cfg);
  std::filesystem::create_directories(out_dir);
  Corpus corpus = build_corpus(cfg);
  JsonlWriter w(out_dir / "corpus.jsonl");
  ordered_json h = file_header(cfg, "corpus");
  h["seed"] = cfg.seed;
  h["worlds"] = corpus.size();
  h["rounds"] = cfg.train.rounds;
  w.write(h);
  for (const ScriptedDialogue& d : corpus) {
    ordered_json j;
    j["world"] = world_to_json(d.world);
    ordered_json qs = ordered_json::array();
    ordered_json as = ordered_json::array();
    for (const ScriptedRound& r : d.rounds) {
      qs.push_back({r.q.selector, r.q.attribute});
      as.push_back(r.a.value);
    }
    j["questions"] = qs;
    j["answers"] = as;
    w.write(j);
  }
  w.close();
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("corpus: cannot open '" + path.string() + "'");
  Corpus corpus;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  int64_t declared = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string loc = path.string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("corpus: " + loc + ": " + e.what());
    }
    if (!have_header) {
      if (!j.contains("type") || j["type"] != "header" || j.value("kind", "") != "corpus") {
        throw DataError("corpus: " + loc + ": first record must be a corpus header");
      }
      declared = j.value("worlds", static_cast<int64_t>(-1));
      have_header = true;
      continue;
    }
    ScriptedDialogue d;
    try {
      d.world = world_from_json(j.at("world"));
      auto qs = j.at("questions").get<std::vector<std::vector<int>>>();
      auto as = j.at("answers").get<std::vector<int>>();
      if (qs.size() != as.size()) {
        throw DataError("question and answer counts differ");
      }
      for (size_t t = 0; t < qs.size(); ++t) {
        if (qs[t].size() != 2) {
          throw DataError("questions must be [selector, attribute] pairs");
        }
        QuestionToken q{qs[t][0], qs[t][1]};
        AnswerToken a{as[t]};
        if (!(oracle_answer(d.world, q) == a)) {
          throw DataError("answer does not match the scene oracle");
        }
        d.rounds.push_back(ScriptedRound{q, a});
      }
    } catch (const json::exception& e) {
      throw DataError("corpus: " + loc + ": malformed dialogue: " + e.what());
    } catch (const DataError& e) {
      throw DataError("corpus: " + loc + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw DataError("corpus: " + loc + ": " + e.what());
    }
    corpus.push_back(std::move(d));
  }
  if (!have_header) throw DataError("corpus: '" + path.string() + "' is empty");
  if (declared >= 0 && declared != static_cast<int64_t>(corpus.size())) {
    throw DataError("corpus: '" + path.string() + "' header count does not match content");
  }
  return corpus;
}

void cmd_pretrain(const RunConfig& cfg, const std::filesystem::path& corpus_path,
                  const std::filesystem::path& out_dir) {
  validate_config(cfg);
  std::filesystem::create_directories(out_dir);
  Corpus corpus = corpus_path.empty() ? build_corpus(cfg) : load_corpus(corpus_path);
  PretrainResult res = pretrain_with_corpus(cfg, corpus);

  std::ostringstream csv;
  csv << "epoch,q_ce,a_ce,reg_mse\n";
  for (size_t e = 0; e < res.stats.epochs.size(); ++e) {
    const PretrainEpochStats& s = res.stats.epochs[e];
    csv << e << ',' << fmt(s.q_ce) << ',' << fmt(s.a_ce) << ',' << fmt(s.reg_mse) << '\n';
  }
  write_atomic(out_dir / "pretrain_loss.csv", csv.str());

  ordered_json ev;
  ev["q_ce"] = res.holdout.q_ce;
  ev["a_ce"] = res.holdout.a_ce;
  ev["reg_mse"] = res.holdout.reg_mse;
  ev["answer_accuracy"] = res.holdout.answer_accuracy;
  ev["round0_mse"] = res.holdout.round0_mse;
  ev["final_mse"] = res.holdout.final_mse;
  write_atomic(out_dir / "pretrain_eval.json", ev.dump(1) + "\n");

  Checkpoint ck;
  ck.kind = "pretrain";
  ck.model_hash = model_hash(cfg);
  ck.qbot = std::move(res.qbot);
  ck.abot = std::move(res.abot);
  ck.state = fresh_train_state(cfg);
  ck.config_echo = config_echo(cfg);
  save_checkpoint(out_dir / "checkpoint.json", ck);
}

void cmd_train_rl(const RunConfig& cfg, const std::filesystem::path& checkpoint_path,
                  const std::filesystem::path& out_dir, int stop_after_epochs) {
  validate_config(cfg);
  std::filesystem::create_directories(out_dir);
  AgentDims dims = cfg.dims();

  QBotParams qp;
  ABotParams ap;
  TrainState st;
  if (checkpoint_path.empty()) {
    RngStream init_rng(derive_seed(cfg.seed, kStreamInit));
    qp = init_qbot(dims, init_rng, cfg.init_scale);
    ap = init_abot(dims, init_rng, cfg.init_scale);
    st = fresh_train_state(cfg);
  } else {
    Checkpoint ck = load_checkpoint(checkpoint_path);
    if (ck.model_hash != model_hash(cfg)) {
      throw DataError("checkpoint: model geometry does not match the config");
    }
    qp = std::move(ck.qbot);
    ap = std::move(ck.abot);
    st = ck.kind == "rl" ? std::move(ck.state) : fresh_train_state(cfg);
  }

  JsonlWriter trace(out_dir / "train_trace.jsonl");
  trace.write(file_header(cfg, "train-trace"));
  bool per_round = cfg.verbosity == "per-round";

  std::ostringstream diag;
  diag << "epoch,k,lr_q,lr_a,episodes,mean_orig,mean_div,mean_inf,mean_total,"
          "q_ce,a_ce,reg_mse,max_grad,policy_terms_scripted,policy_terms_sampled\n";

  TrainCallbacks cb;
  cb.on_episode = [&](const EpisodeRecord& ep, int64_t index) {
    if (per_round) {
      for (size_t t = 0; t < ep.rounds.size(); ++t) {
        trace.write(trace_round_json(index, static_cast<int>(t) + 1, ep.rounds[t]));
      }
    } else {
      trace.write(trace_summary_json(index, ep));
    }
  };
  cb.on_epoch = [&](const EpochDiagnostics& d) {
    diag << d.epoch << ',' << d.k << ',' << fmt(d.lr_q) << ',' << fmt(d.lr_a) << ','
         << d.update.episodes << ',' << fmt(d.update.mean_orig) << ','
         << fmt(d.update.mean_div) << ',' << fmt(d.update.mean_inf) << ','
         << fmt(d.update.mean_total) << ',' << fmt(d.update.q_ce) << ','
         << fmt(d.update.a_ce) << ',' << fmt(d.update.reg_mse) << ','
         << fmt(d.update.max_component) << ',' << d.update.policy_terms_scripted << ','
         << d.update.policy_terms_sampled << '\n';
  };
  if (stop_after_epochs > 0) {
    cb.stop_after = [stop_after_epochs](int epoch) {
      return epoch + 1 >= stop_after_epochs;
    };
  }

  TrainResult res = train_in_memory(cfg, std::move(qp), std::move(ap), std::move(st), cb);
  trace.close();
  write_atomic(out_dir / "diagnostics.csv", diag.str());

  Checkpoint ck;
  ck.kind = "rl";
  ck.model_hash = model_hash(cfg);
  ck.qbot = std::move(res.qbot);
  ck.abot = std::move(res.abot);
  ck.state = std::move(res.state);
  ck.config_echo = config_echo(cfg);
  save_checkpoint(out_dir / "checkpoint.json", ck);
}

void cmd_selftalk(const RunConfig& cfg, const std::filesystem::path& checkpoint_path,
                  int episodes, const std::filesystem::path& out_dir) {
  validate_config(cfg);
  if (episodes < 1) throw DataError("selftalk: need at least one episode");
  if (checkpoint_path.empty()) throw DataError("selftalk: a checkpoint is required");
  Checkpoint ck = load_checkpoint(checkpoint_path);
  if (ck.model_hash != model_hash(cfg)) {
    throw DataError("checkpoint: model geometry does not match the config");
  }
  std::filesystem::create_directories(out_dir);
  AgentDims dims = cfg.dims();
  std::vector<EpisodeRecord> eps = selftalk_episodes(cfg, ck.qbot, ck.abot, episodes);

  JsonlWriter tw(out_dir / "transcripts.jsonl");
  tw.write(file_header(cfg, "transcripts"));
  JsonlWriter pw(out_dir / "predictions.jsonl");
  pw.write(file_header(cfg, "predictions"));
  JsonlWriter xw(out_dir / "trace.jsonl");
  xw.write(file_header(cfg, "selftalk-trace"));

  for (size_t i = 0; i < eps.size(); ++i) {
    const EpisodeRecord& ep = eps[i];
    int64_t index = static_cast<int64_t>(i);

    ordered_json t;
    t["episode"] = index;
    t["world"] = world_to_json(ep.world);
    Caption cap = default_caption(ep.world);
    t["caption"] = {cap.object_index, cap.attribute, cap.value};
    ordered_json qs = ordered_json::array();
    ordered_json as = ordered_json::array();
    for (const RoundEntry& r : ep.rounds) {
      qs.push_back({r.q.selector, r.q.attribute});
      as.push_back(r.a.value);
    }
    t["questions"] = qs;
    t["answers"] = as;
    tw.write(t);

    std::vector<Eigen::VectorXd> preds = predictions_by_round(ck.qbot, ep, dims);
    ordered_json p;
    p["episode"] = index;
    ordered_json rounds = ordered_json::array();
    for (const Eigen::VectorXd& v : preds) {
      rounds.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    }
    p["rounds"] = rounds;
    pw.write(p);

    for (size_t r = 0; r < ep.rounds.size(); ++r) {
      xw.write(trace_round_json(index, static_cast<int>(r) + 1, ep.rounds[r]));
    }
  }
  tw.close();
  pw.close();
  xw.close();
}

namespace {

struct LoadedRun {
  RunConfig cfg;
  std::vector<EpisodeRecord> episodes;
  std::vector<EpisodePredictions> predictions;
};

json parse_jsonl_line(const std::filesystem::path& path, int lineno, const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError("report: " + path.string() + ":" + std::to_string(lineno) + ": " +
                    e.what());
  }
}

LoadedRun load_selftalk_dir(const std::filesystem::path& dir) {
  LoadedRun run;

  std::filesystem::path tpath = dir / "transcripts.jsonl";
  std::ifstream tin(tpath);
  if (!tin) throw DataError("report: cannot open '" + tpath.string() + "'");
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(tin, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string loc = tpath.string() + ":" + std::to_string(lineno);
    json j = parse_jsonl_line(tpath, lineno, line);
    if (!have_header) {
      if (!j.contains("type") || j["type"] != "header" || !j.contains("config")) {
        throw DataError("report: " + loc + ": first record must be a header");
      }
      try {
        run.cfg = config_from_echo(j["config"]);
      } catch (const DataError& e) {
        throw DataError("report: " + loc + ": bad config echo: " + e.what());
      }
      have_header = true;
      continue;
    }
    EpisodeRecord ep;
    try {
      ep.world = world_from_json(j.at("world"));
      auto qs = j.at("questions").get<std::vector<std::vector<int>>>();
      auto as = j.at("answers").get<std::vector<int>>();
      if (qs.size() != as.size()) {
        throw DataError("question and answer counts differ");
      }
      for (size_t t = 0; t < qs.size(); ++t) {
        if (qs[t].size() != 2) {
          throw DataError("questions must be [selector, attribute] pairs");
        }
        RoundEntry r;
        r.q = QuestionToken{qs[t][0], qs[t][1]};
        r.a = AnswerToken{as[t]};
        ep.rounds.push_back(std::move(r));
      }
    } catch (const json::exception& e) {
      throw DataError("report: " + loc + ": malformed transcript: " + e.what());
    } catch (const DataError& e) {
      throw DataError("report: " + loc + ": " + e.what());
    }
    run.episodes.push_back(std::move(ep));
  }
  if (!have_header) throw DataError("report: '" + tpath.string() + "' is empty");

  std::filesystem::path ppath = dir / "predictions.jsonl";
  std::ifstream pin(ppath);
  if (!pin) throw DataError("report: cannot open '" + ppath.string() + "'");
  lineno = 0;
  have_header = false;
  while (std::getline(pin, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string loc = ppath.string() + ":" + std::to_string(lineno);
    json j = parse_jsonl_line(ppath, lineno, line);
    if (!have_header) {
      if (!j.contains("type") || j["type"] != "header") {
        throw DataError("report: " + loc + ": first record must be a header");
      }
      have_header = true;
      continue;
    }
    EpisodePredictions p;
    try {
      auto rounds = j.at("rounds").get<std::vector<std::vector<double>>>();
      for (const std::vector<double>& v : rounds) {
        p.by_round.push_back(
            Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size())));
      }
    } catch (const json::exception& e) {
      throw DataError("report: " + loc + ": malformed predictions: " + e.what());
    }
    run.predictions.push_back(std::move(p));
  }
  if (!have_header) throw DataError("report: '" + ppath.string() + "' is empty");
  if (run.predictions.size() != run.episodes.size()) {
    throw DataError("report: '" + dir.string() +
                    "': transcripts and predictions disagree on episode count");
  }
  return run;
}

}  // namespace

void cmd_report(const std::vector<std::filesystem::path>& inputs, int pool_size,
                const std::filesystem::path& out_csv) {
  if (inputs.empty()) throw DataError("report: no inputs given");
  std::ostringstream comments;
  std::vector<std::string> rows;
  int rounds = -1;
  for (const std::filesystem::path& dir : inputs) {
    LoadedRun run = load_selftalk_dir(dir);
    if (run.episodes.empty()) {
      throw DataError("report: '" + dir.string() + "' holds no episodes");
    }
    int t = static_cast<int>(run.episodes.front().rounds.size());
    if (rounds < 0) {
      rounds = t;
    } else if (rounds != t) {
      throw DataError("report: inputs disagree on dialogue length");
    }
    int pool = pool_size > 0 ? pool_size : run.cfg.pool_size;
    pool = std::min(pool, static_cast<int>(run.episodes.size()));
    ReportRow row = report_row(variant_to_string(run.cfg.variant), run.cfg.dims(), pool,
                               run.episodes, run.predictions);
    comments << "# input " << dir.string() << ' ' << canonical_config(run.cfg) << '\n';
    rows.push_back(report_csv_row(row));
  }
  std::ostringstream os;
  os << comments.str() << report_header(rounds) << '\n';
  for (const std::string& r : rows) os << r << '\n';
  if (!out_csv.parent_path().empty()) {
    std::filesystem::create_directories(out_csv.parent_path());
  }
  write_atomic(out_csv, os.str());
}

std::vector<SweepCell> default_sweep_grid() {
  return {{0.1, 0.01}, {0.05, 0.01}, {0.01, 0.001}};
}

void cmd_sweep(const RunConfig& base, const std::vector<SweepCell>& grid, int repeats,
               const std::filesystem::path& out_dir) {
  validate_config(base);
  if (grid.empty()) throw DataError("sweep: the grid is empty");
  if (repeats < 1) throw DataError("sweep: repeats must be positive");
  std::filesystem::create_directories(out_dir);

  std::ostringstream os;
  os << "# base " << canonical_config(base) << '\n';
  os << "alpha_div,alpha_inf,repeats,status,unique_question_mean,unique_question_std,"
        "mutual_overlap_mean,mutual_overlap_std,dist_2_mean,dist_2_std,"
        "ent_1_mean,ent_1_std,mrr_mean,mrr_std,pmr_mean,pmr_std\n";

  uint64_t sweep_base = derive_seed(base.seed, kStreamSweep);
  for (size_t c = 0; c < grid.size(); ++c) {
    std::vector<double> uq, mo, d2, e1, mrr, pmr;
    std::string error;
    for (int r = 0; r < repeats && error.empty(); ++r) {
      RunConfig cfg = base;
      cfg.train.coeff.div = grid[c].alpha_div;
      cfg.train.coeff.inf = grid[c].alpha_inf;
      cfg.seed = derive_seed(sweep_base, c * 1024 + static_cast<uint64_t>(r));
      try {
        PretrainResult pre = pretrain_in_memory(cfg);
        TrainResult tr = train_in_memory(cfg, std::move(pre.qbot), std::move(pre.abot),
                                         fresh_train_state(cfg));
        std::vector<EpisodeRecord> eps =
            selftalk_episodes(cfg, tr.qbot, tr.abot, cfg.eval_episodes);
        ReportRow row = report_from_episodes(variant_to_string(cfg.variant), cfg,
                                             tr.qbot, eps);
        uq.push_back(row.unique_question);
        mo.push_back(row.mutual_overlap);
        d2.push_back(row.dist_2);
        e1.push_back(row.ent_1);
        mrr.push_back(row.mrr);
        pmr.push_back(row.pmr);
      } catch (const std::exception& e) {
        error = e.what();
        std::replace(error.begin(), error.end(), ',', ';');
        std::replace(error.begin(), error.end(), '\n', ' ');
      }
    }
    os << fmt(grid[c].alpha_div) << ',' << fmt(grid[c].alpha_inf) << ',' << repeats << ',';
    if (!error.empty()) {
      os << "failed(" << error << "),nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan\n";
      continue;
    }
    os << "ok";
    for (const std::vector<double>* xs : {&uq, &mo, &d2, &e1, &mrr, &pmr}) {
      MeanStd ms = mean_std(*xs);
      os << ',' << fmt(ms.mean) << ',' << fmt(ms.std);
    }
    os << '\n';
  }
  write_atomic(out_dir / "sweep.csv", os.str());
}

TraceStats cmd_validate_trace(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw DataError("validate-trace: no files given");
  TraceStats total;
  for (const std::filesystem::path& p : paths) {
    TraceStats s = validate_trace_file(p);
    total.episodes += s.episodes;
    total.rounds += s.rounds;
    total.summaries += s.summaries;
  }
  return total;
}

}  // namespace ecsrl
