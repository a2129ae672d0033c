// Acceptance gate: ten self-contained checks over the concern-state machinery,
// the policy-gradient trainer, the metrics, and the end-to-end pipeline. Each
// check prints exactly one [PASS]/[FAIL] line; the process exits non-zero if
// any check fails. Individual checks can be selected by number on the command
// line, e.g. `acceptance 1 2 9`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ecsrl/commands.hpp"
#include "ecsrl/errors.hpp"
#include "ecsrl/metrics.hpp"
#include "ecsrl/trace.hpp"
#include "ecsrl/trainer.hpp"

using namespace ecsrl;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- utilities

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

struct Failure {
  std::string detail;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure{detail};
}

Ivc random_simplex(int n, RngStream& rng) {
  Ivc out;
  out.weights.resize(static_cast<size_t>(n));
  double sum = 0.0;
  for (double& w : out.weights) {
    w = -std::log(rng.next_open());
    sum += w;
  }
  for (double& w : out.weights) w /= sum;
  return out;
}

// Independent long-double oracle for the divergence, summed in reverse order.
long double kl_oracle(const Ivc& p, const Ivc& q) {
  long double acc = 0.0L;
  for (size_t i = p.weights.size(); i-- > 0;) {
    long double pi = p.weights[i];
    if (pi <= 0.0L) continue;
    acc += pi * std::log(pi / static_cast<long double>(q.weights[i]));
  }
  return acc;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

int worker_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(8u, std::max(1u, hw)));
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Small geometry used by the pipeline-level checks (5 and 10); the behavioral
// checks (7 and 8) run the full default configuration.
RunConfig small_pipeline_config() {
  RunConfig cfg;
  cfg.seed = 404;
  cfg.world.num_objects = 3;
  cfg.world.num_attributes = 2;
  cfg.world.num_values = 3;
  cfg.hidden_dim = 6;
  cfg.train.rounds = 5;
  cfg.train.k_start = 4;
  cfg.train.k_end = 1;
  cfg.train.k_anneal_epochs = 1;
  cfg.train.epochs = 4;
  cfg.train.batch_size = 8;
  cfg.train.episodes_per_epoch = 16;
  cfg.pretrain.epochs = 3;
  cfg.pretrain.batch_size = 8;
  cfg.corpus_worlds = 32;
  cfg.eval_episodes = 8;
  cfg.pool_size = 8;
  validate_config(cfg);
  return cfg;
}

// ------------------------------------------------- 1: state-machine invariants

void check_state_invariants(std::ostream& log) {
  double t0 = now_seconds();
  RunConfig cfg;  // default geometry: 8 objects, 3 attributes, 5 values
  AgentDims dims = cfg.dims();
  RngStream init(derive_seed(11, 1));
  QBotParams qp = init_qbot(dims, init, cfg.init_scale);
  ABotParams ap = init_abot(dims, init, cfg.init_scale);

  const int episodes = 1200;
  int64_t rounds_checked = 0;
  for (int i = 0; i < episodes; ++i) {
    RngStream rng(derive_seed(2024, static_cast<uint64_t>(i)));
    World w = gen_world(cfg.world, rng);
    EpisodeOptions opts;
    opts.k = i % (cfg.train.rounds + 1);
    EpisodeRecord ep = run_episode(qp, ap, w, cfg.train, dims, rng, opts);
    require(ivc_valid(ep.initial_ivc), "initial attention is not a simplex");
    std::vector<uint8_t> prev(static_cast<size_t>(cfg.world.num_objects), 0);
    for (const RoundEntry& r : ep.rounds) {
      double sum = 0.0;
      for (double v : r.ecs.ivc.weights) {
        require(v >= 0.0 && v <= 1.0, "attention weight outside [0, 1]");
        sum += v;
      }
      require(std::abs(sum - 1.0) <= 1e-9, "attention does not sum to one");
      std::vector<uint8_t> pol = polarize(r.ecs.ivc, cfg.train.gamma);
      for (uint8_t b : pol) require(b == 0 || b == 1, "polarized entry not binary");
      require(r.ecs.avc.bits.size() == prev.size(), "coverage length changed");
      for (size_t j = 0; j < prev.size(); ++j) {
        require(r.ecs.avc.bits[j] == 0 || r.ecs.avc.bits[j] == 1,
                "coverage entry not binary");
        require(r.ecs.avc.bits[j] >= prev[j], "coverage lost a bit");
      }
      require(r.reward.inf == 0.0 || r.reward.inf == 1.0,
              "coverage-growth reward not a 0/1 indicator");
      prev = r.ecs.avc.bits;
      ++rounds_checked;
    }
  }
  double elapsed = now_seconds() - t0;
  require(rounds_checked >= 10000, "fewer than 10000 rounds exercised");
  require(elapsed < 10.0, "invariant sweep exceeded 10 seconds");
  log << "    " << rounds_checked << " rounds, zero violations, " << elapsed
      << " s\n";
}

// ---------------------------------------------------- 2: divergence vs oracle

void check_divergence_oracle(std::ostream& log) {
  RngStream rng(8181);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    int n = 2 + static_cast<int>(rng.next_index(15));
    Ivc p = random_simplex(n, rng);
    Ivc q = random_simplex(n, rng);
    double got = kl_divergence(p, q);
    require(got >= 0.0, "divergence went negative");
    double want = static_cast<double>(kl_oracle(p, q));
    worst = std::max(worst, std::abs(got - want));
    require(std::abs(got - want) <= 1e-10, "divergence disagrees with the oracle");
  }
  for (int i = 0; i < 200; ++i) {
    int n = 2 + static_cast<int>(rng.next_index(15));
    Ivc p = random_simplex(n, rng);
    require(std::abs(kl_divergence(p, p)) <= 1e-12, "self-divergence is not zero");
  }
  log << "    1000 pairs, worst |difference| = " << worst << "\n";
}

// -------------------------------------- 3: exhaustive polarization / coverage

void check_coverage_exhaustive(std::ostream& log) {
  int64_t cases = 0;
  for (int n = 2; n <= 6; ++n) {
    const int q = 4;  // attention weights quantized to {0, 1/4, 1/2, 3/4, 1}
    std::vector<int> levels(static_cast<size_t>(n), 0);
    int64_t combos = 1;
    for (int j = 0; j < n; ++j) combos *= q + 1;
    for (int64_t code = 0; code < combos; ++code) {
      int64_t rem = code;
      double sum = 0.0;
      Ivc raw;
      raw.weights.resize(static_cast<size_t>(n));
      for (int j = 0; j < n; ++j) {
        raw.weights[static_cast<size_t>(j)] =
            static_cast<double>(rem % (q + 1)) / q;
        sum += raw.weights[static_cast<size_t>(j)];
        rem /= q + 1;
      }
      if (sum <= 0.0) continue;
      for (double& w : raw.weights) w /= sum;  // project onto the simplex

      for (double gamma : {0.3, 0.6, 0.9}) {
        std::vector<uint8_t> pol = polarize(raw, gamma);
        for (uint32_t prev_code = 0; prev_code < (1u << n); ++prev_code) {
          Avc prev;
          prev.bits.resize(static_cast<size_t>(n));
          bool grows = false;
          for (int j = 0; j < n; ++j) {
            prev.bits[static_cast<size_t>(j)] = (prev_code >> j) & 1u;
            if (pol[static_cast<size_t>(j)] == 1 &&
                prev.bits[static_cast<size_t>(j)] == 0) {
              grows = true;
            }
          }
          Avc curr = update_avc(prev, pol);
          double r = informativity_reward(prev, curr);
          require(r == (grows ? 1.0 : 0.0),
                  "coverage-growth reward disagrees with the new-bit predicate");
          ++cases;
        }
      }
    }
  }
  log << "    " << cases << " exhaustive cases, zero mismatches\n";
}

// ------------------------------------------------ 4: policy-gradient accuracy

struct GradBlock {
  std::string name;
  const Eigen::MatrixXd* exact;
  Eigen::MatrixXd mc_sum;
  Eigen::MatrixXd mc_sumsq;
};

void check_policy_gradient(std::ostream& log) {
  double t0 = now_seconds();
  WorldConfig wc;
  wc.num_objects = 2;
  wc.num_attributes = 1;
  wc.num_values = 2;
  TrainConfig tc;
  tc.rounds = 1;
  tc.seed = 7;
  AgentDims dims = AgentDims::from_world(wc, 3);
  RngStream rng(7171);
  World w = gen_world(wc, rng);
  QBotParams qp = init_qbot(dims, rng, 0.4);
  ABotParams ap = init_abot(dims, rng, 0.4);
  Ivc init{{0.35, 0.65}};

  OracleResult exact = exact_objective(qp, ap, w, tc, dims, 0, init);
  require(exact.trajectories.size() == 6, "unexpected trajectory count");

  // --- central finite differences of the reward-frozen objective ---
  auto objective = [&] {
    return reweighted_objective(qp, ap, w, tc, dims, 0, init, exact.trajectories);
  };
  double fd_worst = 0.0;
  auto fd_block = [&](auto& param, const auto& grad, const std::string& name) {
    const double eps = 1e-5;
    for (long r = 0; r < param.rows(); ++r) {
      for (long c = 0; c < param.cols(); ++c) {
        double save = param(r, c);
        param(r, c) = save + eps;
        double fp = objective();
        param(r, c) = save - eps;
        double fm = objective();
        param(r, c) = save;
        double fd = (fp - fm) / (2.0 * eps);
        double err = std::abs(fd - grad(r, c));
        double bound = 1e-4 * std::abs(grad(r, c)) + 1e-9;
        if (std::abs(grad(r, c)) > 1e-7) {
          fd_worst = std::max(fd_worst, err / std::abs(grad(r, c)));
        }
        require(err <= bound, "finite differences disagree on " + name);
      }
    }
  };
  fd_block(qp.question, exact.q_grads.question, "the question policy");
  fd_block(ap.attend_v, exact.a_grads.attend_v, "the attention scorer");
  fd_block(ap.attend_obj, exact.a_grads.attend_obj, "the object projection");
  fd_block(ap.attend_q, exact.a_grads.attend_q, "the question projection");
  fd_block(ap.attend_h, exact.a_grads.attend_h, "the history projection");
  fd_block(ap.answer, exact.a_grads.answer, "the answer head");

  // --- REINFORCE estimator over one million sampled episodes ---
  // With one free round there are only 6 (question, answer) outcomes; sampling
  // picks among them with the policy's exact probabilities, so the gradient
  // summand for each outcome can be precomputed.
  DialogueHistory h0 = history_from_caption(default_caption(w), dims);
  Eigen::VectorXd probs_q = qbot_question_probs(qp, h0);
  int nq = dims.question_vocab();
  int nv = dims.answer_vocab();
  std::vector<Eigen::VectorXd> probs_a(static_cast<size_t>(nq));
  for (int qi = 0; qi < nq; ++qi) {
    QuestionToken qt = question_from_index(qi, wc.num_objects, wc.num_attributes);
    AttendCache cache = abot_attend_cached(ap, w, h0, qt, dims);
    probs_a[static_cast<size_t>(qi)] = abot_answer_probs(ap, cache.attended, qt, dims);
  }
  // per-outcome reward and gradient summand, via the same episode mechanics
  std::vector<double> outcome_reward(static_cast<size_t>(nq * nv), 0.0);
  std::vector<QBotGrads> outcome_qg(static_cast<size_t>(nq * nv));
  std::vector<ABotGrads> outcome_ag(static_cast<size_t>(nq * nv));
  RngStream dummy(0);
  for (int qi = 0; qi < nq; ++qi) {
    for (int ai = 0; ai < nv; ++ai) {
      QuestionToken qt = question_from_index(qi, wc.num_objects, wc.num_attributes);
      std::vector<ScriptedRound> forced{{qt, AnswerToken{ai}}};
      EpisodeOptions opts;
      opts.k = 0;
      opts.initial_ivc = init;
      opts.forced = &forced;
      EpisodeRecord ep = run_episode(qp, ap, w, tc, dims, dummy, opts);
      double reward = ep.rounds[0].reward.total;
      size_t o = static_cast<size_t>(qi * nv + ai);
      outcome_reward[o] = reward;
      outcome_qg[o].question =
          reward * qbot_question_logprob_grad(qp, h0, qt, dims);
      ABotGrads g = abot_answer_logprob_grad(ap, w, h0, qt, AnswerToken{ai}, dims);
      outcome_ag[o].attend_v = reward * g.attend_v;
      outcome_ag[o].attend_obj = reward * g.attend_obj;
      outcome_ag[o].attend_q = reward * g.attend_q;
      outcome_ag[o].attend_h = reward * g.attend_h;
      outcome_ag[o].answer = reward * g.answer;
    }
  }

  const int64_t samples = 1000000;
  std::vector<int64_t> counts(static_cast<size_t>(nq * nv), 0);
  RngStream mc(990099);
  for (int64_t i = 0; i < samples; ++i) {
    int qi = sample_categorical(probs_q, mc).index;
    int ai = sample_categorical(probs_a[static_cast<size_t>(qi)], mc).index;
    ++counts[static_cast<size_t>(qi * nv + ai)];
  }

  // aggregate the per-component mean and variance of the sampled estimator
  double mc_rel_l2 = 0.0;
  double worst_component = 0.0;
  auto mc_block = [&](const std::string& name,
                      const std::function<Eigen::MatrixXd(size_t)>& summand,
                      const Eigen::MatrixXd& exact_grad, double& num, double& den) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(exact_grad.rows(), exact_grad.cols());
    Eigen::MatrixXd sumsq = sum;
    for (size_t o = 0; o < counts.size(); ++o) {
      if (counts[o] == 0) continue;
      Eigen::MatrixXd g = summand(o);
      sum += static_cast<double>(counts[o]) * g;
      sumsq += static_cast<double>(counts[o]) * g.cwiseProduct(g);
    }
    Eigen::MatrixXd mean_g = sum / static_cast<double>(samples);
    for (long r = 0; r < exact_grad.rows(); ++r) {
      for (long c = 0; c < exact_grad.cols(); ++c) {
        double m = mean_g(r, c);
        double e = exact_grad(r, c);
        double var =
            std::max(0.0, sumsq(r, c) / samples - m * m) / static_cast<double>(samples);
        double se = std::sqrt(var);
        double err = std::abs(m - e);
        require(err <= 1e-2 * std::abs(e) + 3.0 * se + 1e-12,
                "sampled gradient deviates beyond noise on " + name);
        if (std::abs(e) > 1e-3) {
          worst_component = std::max(worst_component, err / std::abs(e));
        }
        num += (m - e) * (m - e);
        den += e * e;
      }
    }
  };
  double num = 0.0, den = 0.0;
  mc_block("the question policy",
           [&](size_t o) { return Eigen::MatrixXd(outcome_qg[o].question); },
           exact.q_grads.question, num, den);
  mc_block("the attention scorer",
           [&](size_t o) { return Eigen::MatrixXd(outcome_ag[o].attend_v); },
           Eigen::MatrixXd(exact.a_grads.attend_v), num, den);
  mc_block("the object projection",
           [&](size_t o) { return Eigen::MatrixXd(outcome_ag[o].attend_obj); },
           exact.a_grads.attend_obj, num, den);
  mc_block("the question projection",
           [&](size_t o) { return Eigen::MatrixXd(outcome_ag[o].attend_q); },
           exact.a_grads.attend_q, num, den);
  mc_block("the history projection",
           [&](size_t o) { return Eigen::MatrixXd(outcome_ag[o].attend_h); },
           exact.a_grads.attend_h, num, den);
  mc_block("the answer head",
           [&](size_t o) { return Eigen::MatrixXd(outcome_ag[o].answer); },
           exact.a_grads.answer, num, den);
  mc_rel_l2 = std::sqrt(num / den);
  require(mc_rel_l2 <= 1e-2, "aggregate sampled-gradient error above one percent");

  double elapsed = now_seconds() - t0;
  require(elapsed < 120.0, "policy-gradient check exceeded two minutes");
  log << "    finite differences: worst relative error " << fd_worst << "\n";
  log << "    sampling: aggregate relative error " << mc_rel_l2
      << ", worst sizeable component " << worst_component << ", " << elapsed
      << " s\n";
}

// -------------------------------------------- 5: logged reward recomposition

void check_reward_recomposition(std::ostream& log) {
  RunConfig cfg = small_pipeline_config();
  cfg.verbosity = "per-round";
  TempDir dir("accept_rewards");
  cmd_pretrain(cfg, fs::path{}, dir.path / "pre");
  cmd_train_rl(cfg, dir.path / "pre" / "checkpoint.json", dir.path / "rl");

  std::ifstream in(dir.path / "rl" / "train_trace.jsonl");
  require(in.good(), "training trace missing");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "trace is empty");
  nlohmann::json header = nlohmann::json::parse(line);
  double co = header.at("coefficients").at("orig").get<double>();
  double cd = header.at("coefficients").at("div").get<double>();
  double ci = header.at("coefficients").at("inf").get<double>();
  require(co == 1.0 && cd == 0.1 && ci == 0.01,
          "default coefficients are not (1, 0.1, 0.01)");

  int64_t rounds = 0;
  double worst = 0.0;
  while (std::getline(in, line)) {
    nlohmann::json j = nlohmann::json::parse(line);
    if (!j.contains("reward")) continue;
    double orig = j["reward"]["orig"].get<double>();
    double div = j["reward"]["div"].get<double>();
    double inf = j["reward"]["inf"].get<double>();
    double total = j["reward"]["total"].get<double>();
    double err = std::abs(total - (co * orig + cd * div + ci * inf));
    worst = std::max(worst, err);
    require(err <= 1e-9, "logged total does not recompute from components");
    ++rounds;
  }
  require(rounds ==
              static_cast<int64_t>(cfg.train.epochs) * cfg.train.episodes_per_epoch *
                  cfg.train.rounds,
          "trace does not cover the whole run");
  log << "    " << rounds << " logged rounds, worst |error| = " << worst << "\n";
}

// ------------------------------------------------------ 6: curriculum length

void check_curriculum_schedule(std::ostream& log) {
  for (int cadence : {1, 2, 3}) {
    TrainConfig cfg;
    cfg.k_start = 9;
    cfg.k_end = 4;
    cfg.k_anneal_epochs = cadence;
    require(anneal_k(0, cfg) == 9, "schedule does not start at 9");
    for (int epoch = 0; epoch <= 60; ++epoch) {
      int want = std::max(4, 9 - epoch / cadence);
      require(anneal_k(epoch, cfg) == want, "schedule deviates from the formula");
      if (epoch > 0) {
        require(anneal_k(epoch, cfg) <= anneal_k(epoch - 1, cfg),
                "schedule is not non-increasing");
      }
    }
    require(anneal_k(9 * cadence, cfg) == 4, "floor not reached on time");
    require(anneal_k(600, cfg) == 4, "schedule left its floor");
  }
  log << "    cadences 1, 2, 3 all match max(4, 9 - epoch/cadence)\n";
}

// ------------------------------------------- 7 & 8: learned-behavior trends

struct TrendResults {
  bool ready = false;
  double elapsed = 0.0;
  // variant name -> per-seed report rows
  std::map<std::string, std::vector<ReportRow>> rows;
};

TrendResults g_trends;

void ensure_trend_runs(std::ostream& log) {
  if (g_trends.ready) return;
  double t0 = now_seconds();
  const std::vector<Variant> variants{Variant::kRl, Variant::kRlDr, Variant::kRlIr,
                                      Variant::kRlDrIr};
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    RunConfig base;  // the default configuration under test
    base.seed = 1000 + static_cast<uint64_t>(s);
    base.train.threads = worker_threads();
    PretrainResult pre = pretrain_in_memory(base);
    for (Variant v : variants) {
      RunConfig cfg = base;
      cfg.variant = v;
      TrainResult tr =
          train_in_memory(cfg, pre.qbot, pre.abot, fresh_train_state(cfg));
      std::vector<EpisodeRecord> eps =
          selftalk_episodes(cfg, tr.qbot, tr.abot, cfg.eval_episodes);
      ReportRow row =
          report_from_episodes(variant_to_string(v), cfg, tr.qbot, eps);
      g_trends.rows[variant_to_string(v)].push_back(row);
    }
    log << "    seed " << base.seed << " done at " << now_seconds() - t0 << " s\n";
  }
  g_trends.elapsed = now_seconds() - t0;
  g_trends.ready = true;
}

void check_diversity_trend(std::ostream& log) {
  ensure_trend_runs(log);
  std::map<std::string, std::vector<double>> uq, mo;
  for (const auto& [name, rows] : g_trends.rows) {
    for (const ReportRow& r : rows) {
      uq[name].push_back(r.unique_question);
      mo[name].push_back(r.mutual_overlap);
    }
  }
  log << "    variant      median unique-questions   median self-overlap\n";
  for (const std::string& name : {"rl", "rl-dr", "rl-ir", "rl-dr-ir"}) {
    std::ostringstream row;
    row << "    " << name;
    for (size_t i = name.size(); i < 13; ++i) row << ' ';
    row << median(uq[name]) << "                    " << median(mo[name]);
    log << row.str() << "\n";
  }
  require(median(uq["rl-dr-ir"]) > median(uq["rl"]),
          "shaped rewards do not raise the median unique-question count");
  require(median(mo["rl-dr-ir"]) < median(mo["rl"]),
          "shaped rewards do not lower the median question self-overlap");
  require(g_trends.elapsed < 1800.0, "trend runs exceeded 30 minutes");
  log << "    total runtime " << g_trends.elapsed << " s\n";
}

void check_rank_progression(std::ostream& log) {
  ensure_trend_runs(log);
  const std::vector<ReportRow>& rows = g_trends.rows["rl-dr-ir"];
  require(!rows.empty(), "no runs recorded for the full reward variant");
  size_t rounds = rows.front().pmr_by_round.size();
  std::vector<double> curve(rounds, 0.0);
  for (const ReportRow& r : rows) {
    require(r.pmr_by_round.size() == rounds, "round counts disagree across seeds");
    for (size_t t = 0; t < rounds; ++t) curve[t] += r.pmr_by_round[t];
  }
  for (double& v : curve) v /= static_cast<double>(rows.size());

  std::ostringstream pretty;
  for (size_t t = 0; t < rounds; ++t) {
    if (t) pretty << ", ";
    pretty << curve[t];
  }
  log << "    mean percentile rank by round: " << pretty.str() << "\n";

  int dips = 0;
  double worst_dip = 0.0;
  for (size_t t = 1; t < rounds; ++t) {
    if (curve[t] < curve[t - 1]) {
      ++dips;
      worst_dip = std::max(worst_dip, curve[t - 1] - curve[t]);
    }
  }
  log << "    dips: " << dips << ", deepest " << worst_dip << " points\n";
  require(dips <= 1, "rank progression dips more than once");
  require(worst_dip <= 1.0, "rank progression dips by more than one point");
}

// ------------------------------------------------------- 9: metric goldens

void check_metric_goldens(std::ostream& log) {
  auto close = [](double got, double want) {
    return std::abs(got - want) <= 1e-6;
  };
  require(close(dist_n({{0, 1, 0}}, 1), 2.0 / 3.0), "distinct-unigram ratio golden");
  require(close(ent_n({{0, 1, 0}}, 1), 0.63651416829481), "unigram entropy golden");
  RankMetrics rm = rank_metrics({1, 2}, {1});
  require(close(rm.mrr, 0.75), "mean reciprocal rank golden");
  require(close(rm.recall_at[0], 0.5), "recall-at-1 golden");

  std::vector<Eigen::VectorXd> pool;
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(3);
    v[0] = static_cast<double>(i);
    pool.push_back(v);
  }
  require(close(pmr(pool[2], pool, 2), 100.0), "exact-match percentile golden");
  Eigen::VectorXd far = Eigen::VectorXd::Zero(3);
  far[0] = 100.0;
  require(close(pmr(far, pool, 0), 0.0), "last-place percentile golden");

  require(mutual_overlap({{0, 1}, {2, 3}, {4, 5}}) == 0.0,
          "disjoint questions must not overlap");
  require(close(unique_question({{1, 2}, {1, 2}, {3, 4}}), 2.0),
          "distinct-question count golden");
  log << "    all frozen metric values within 1e-6\n";
}

// --------------------------------------------------------- 10: determinism

void check_determinism(std::ostream& log) {
  RunConfig cfg = small_pipeline_config();
  cfg.train.threads = 1;
  TempDir dir("accept_determinism");
  cmd_pretrain(cfg, fs::path{}, dir.path / "pre");
  fs::path pre_ckpt = dir.path / "pre" / "checkpoint.json";

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };

  cmd_train_rl(cfg, pre_ckpt, dir.path / "a");
  cmd_train_rl(cfg, pre_ckpt, dir.path / "b");
  require(slurp(dir.path / "a" / "train_trace.jsonl") ==
              slurp(dir.path / "b" / "train_trace.jsonl"),
          "repeated runs disagree on the trace bytes");
  require(slurp(dir.path / "a" / "diagnostics.csv") ==
              slurp(dir.path / "b" / "diagnostics.csv"),
          "repeated runs disagree on the diagnostics bytes");

  // interrupt after half the epochs, resume, and compare the last epoch's row
  cmd_train_rl(cfg, pre_ckpt, dir.path / "half", cfg.train.epochs / 2);
  cmd_train_rl(cfg, dir.path / "half" / "checkpoint.json", dir.path / "resumed");

  auto last_row = [&](const fs::path& p) {
    std::ifstream in(p);
    std::string line, last;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (!line.empty()) last = line;
    }
    std::vector<double> vals;
    std::stringstream ss(last);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    return vals;
  };
  std::vector<double> straight = last_row(dir.path / "a" / "diagnostics.csv");
  std::vector<double> resumed = last_row(dir.path / "resumed" / "diagnostics.csv");
  require(straight.size() == resumed.size() && !straight.empty(),
          "diagnostics rows are not comparable");
  double worst = 0.0;
  for (size_t i = 0; i < straight.size(); ++i) {
    worst = std::max(worst, std::abs(straight[i] - resumed[i]));
  }
  require(worst <= 1e-9, "resumed run drifts from the uninterrupted one");
  log << "    byte-identical reruns; resume drift " << worst << "\n";
}

// ------------------------------------------------------------------ runner

struct Check {
  int id;
  std::string name;
  std::function<void(std::ostream&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<Check> checks{
      {1, "attention/coverage invariants over randomized dialogues",
       check_state_invariants},
      {2, "divergence matches an independent summation oracle",
       check_divergence_oracle},
      {3, "coverage-growth indicator verified exhaustively",
       check_coverage_exhaustive},
      {4, "enumerated policy gradient vs finite differences and sampling",
       check_policy_gradient},
      {5, "logged reward totals recompute from their components",
       check_reward_recomposition},
      {6, "curriculum length anneals 9 to 4 on schedule", check_curriculum_schedule},
      {7, "shaped rewards raise question diversity over the plain objective",
       check_diversity_trend},
      {8, "target rank percentile grows across rounds under full shaping",
       check_rank_progression},
      {9, "frozen metric examples reproduce exactly", check_metric_goldens},
      {10, "runs are deterministic and resumable", check_determinism},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Check& c : checks) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    std::ostringstream detail;
    bool ok = true;
    std::string why;
    try {
      c.run(detail);
    } catch (const Failure& f) {
      ok = false;
      why = f.detail;
    } catch (const std::exception& e) {
      ok = false;
      why = std::string("unexpected error: ") + e.what();
    }
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.id << ": " << c.name << "\n";
    std::cout << detail.str();
    if (!ok) {
      std::cout << "    reason: " << why << "\n";
      ++failures;
    }
    std::cout.flush();
  }
  if (failures > 0) {
    std::cout << failures << " check(s) failed\n";
    return 1;
  }
  std::cout << "all checks passed\n";
  return 0;
}
