#include "ecsrl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <string>

#include "ecsrl/errors.hpp"

namespace ecsrl {

namespace {

double clamp_matrix(Eigen::MatrixXd& m, double bound) {
  m = m.array().min(bound).max(-bound);
  return m.size() ? m.array().abs().maxCoeff() : 0.0;
}

double clamp_vector(Eigen::VectorXd& v, double bound) {
  v = v.array().min(bound).max(-bound);
  return v.size() ? v.array().abs().maxCoeff() : 0.0;
}

bool grads_finite(const QBotGrads& qg, const ABotGrads& ag) {
  return qg.question.allFinite() && qg.regress.allFinite() && ag.attend_v.allFinite() &&
         ag.attend_obj.allFinite() && ag.attend_q.allFinite() &&
         ag.attend_h.allFinite() && ag.answer.allFinite();
}

// Ridge term that keeps the regression quadratics well conditioned: the count
// features are collinear (answer counts always sum to the round index).
constexpr double kRegressRidge = 0.01;

// Reward mass credited to round t's actions: the round's own total by
// default, or the tail sum when future attribution is enabled.
std::vector<double> attribution_for(const EpisodeRecord& ep, const TrainConfig& cfg) {
  std::vector<double> attr(ep.rounds.size() + 1, 0.0);
  if (cfg.future_attribution) {
    double tail = 0.0;
    for (size_t t = ep.rounds.size(); t >= 1; --t) {
      tail += ep.rounds[t - 1].reward.total;
      attr[t] = tail;
    }
  } else {
    for (size_t t = 1; t <= ep.rounds.size(); ++t) {
      attr[t] = ep.rounds[t - 1].reward.total;
    }
  }
  return attr;
}

double eval_log_prob(const Eigen::VectorXd& probs, int index) {
  return std::log(probs[index]);
}

}  // namespace

ScriptedDialogue make_scripted_dialogue(const World& w, int rounds) {
  if (rounds < 1) throw ValueError("make_scripted_dialogue: rounds must be positive");
  ScriptedDialogue d;
  d.world = w;
  d.rounds.reserve(rounds);
  for (int t = 1; t <= rounds; ++t) {
    QuestionToken q = scripted_question(t, w.num_objects, w.num_attributes);
    d.rounds.push_back(ScriptedRound{q, oracle_answer(w, q)});
  }
  return d;
}

Corpus make_corpus(const WorldConfig& wc, int count, int rounds, RngStream& rng) {
  if (count < 1) throw ValueError("make_corpus: count must be positive");
  Corpus corpus;
  corpus.reserve(count);
  for (int i = 0; i < count; ++i) {
    corpus.push_back(make_scripted_dialogue(gen_world(wc, rng), rounds));
  }
  return corpus;
}

EpisodeRecord run_episode(const QBotParams& qp, const ABotParams& ap, const World& w,
                          const TrainConfig& cfg, const AgentDims& dims,
                          RngStream& rng, const EpisodeOptions& opts) {
  if (cfg.rounds < 1) throw ValueError("run_episode: rounds must be positive");
  int k = std::clamp(opts.k, 0, cfg.rounds);
  if (opts.forced &&
      static_cast<int>(opts.forced->size()) != cfg.rounds - k) {
    throw DimensionError("run_episode: forced action count must match free rounds");
  }

  EpisodeRecord ep;
  ep.world = w;
  ep.k = k;

  EcsSnapshot ecs = opts.initial_ivc
                        ? EcsSnapshot{0, *opts.initial_ivc,
                                      Avc{std::vector<uint8_t>(w.num_objects, 0)}}
                        : init_ecs(w.num_objects, rng);
  if (static_cast<int>(ecs.ivc.weights.size()) != w.num_objects || !ivc_valid(ecs.ivc)) {
    throw DimensionError("run_episode: initial attention is not a valid simplex");
  }
  ep.initial_ivc = ecs.ivc;

  Eigen::VectorXd target = target_feature(w);
  DialogueHistory h = history_from_caption(default_caption(w), dims);
  double prev_dist = (target - qbot_predict(qp, h)).squaredNorm();
  ep.initial_pred_dist = prev_dist;

  bool greedy = opts.mode == RolloutMode::kGreedy;
  ep.rounds.reserve(cfg.rounds);
  for (int t = 1; t <= cfg.rounds; ++t) {
    RoundEntry entry;
    entry.scripted = t <= k;

    if (entry.scripted) {
      entry.q = scripted_question(t, w.num_objects, w.num_attributes);
      entry.logp_q = eval_log_prob(qbot_question_probs(qp, h),
                                   question_index(entry.q, w.num_attributes));
    } else if (opts.forced) {
      entry.q = (*opts.forced)[t - k - 1].q;
      entry.logp_q = eval_log_prob(qbot_question_probs(qp, h),
                                   question_index(entry.q, w.num_attributes));
    } else {
      AskResult ask = qbot_ask(qp, h, dims, rng, greedy);
      entry.q = ask.token;
      entry.logp_q = ask.log_prob;
    }

    AttendCache cache = abot_attend_cached(ap, w, h, entry.q, dims);
    Ivc ivc;
    ivc.weights.assign(cache.att.data(), cache.att.data() + cache.att.size());
    Eigen::VectorXd aprobs = abot_answer_probs(ap, cache.attended, entry.q, dims);

    if (entry.scripted) {
      entry.a = oracle_answer(w, entry.q);
      entry.logp_a = eval_log_prob(aprobs, entry.a.value);
    } else if (opts.forced) {
      entry.a = (*opts.forced)[t - k - 1].a;
      entry.logp_a = eval_log_prob(aprobs, entry.a.value);
    } else {
      SampledToken s = greedy ? greedy_categorical(aprobs) : sample_categorical(aprobs, rng);
      entry.a = AnswerToken{s.index};
      entry.logp_a = s.log_prob;
    }

    Avc avc = update_avc(ecs.avc, polarize(ivc, cfg.gamma));
    double r_div = diversity_reward(ivc, ecs.ivc);
    double r_inf = informativity_reward(ecs.avc, avc);

    h = observe(h, entry.q, entry.a, dims);
    double dist = (target - qbot_predict(qp, h)).squaredNorm();
    double r_orig = prev_dist - dist;

    entry.reward = combine_rewards(r_orig, r_div, r_inf, cfg.coeff);
    entry.pred_dist = dist;
    entry.ecs = EcsSnapshot{t, ivc, avc};
    ep.rounds.push_back(std::move(entry));

    prev_dist = dist;
    ecs.ivc = ivc;
    ecs.avc = avc;
  }
  return ep;
}

Baselines make_baselines(int rounds) {
  return Baselines{std::vector<double>(rounds + 1, 0.0)};
}

void accumulate_episode_grads(const EpisodeRecord& ep, const QBotParams& qp,
                              const ABotParams& ap, const AgentDims& dims,
                              const TrainConfig& cfg, const Baselines& base,
                              QBotGrads& qg, ABotGrads& ag, UpdateDiagnostics& diag) {
  if (base.per_round.size() < ep.rounds.size() + 1) {
    throw DimensionError("accumulate_episode_grads: baseline vector too short");
  }
  Eigen::VectorXd target = target_feature(ep.world);
  DialogueHistory h = history_from_caption(default_caption(ep.world), dims);
  std::vector<double> attr = attribution_for(ep, cfg);

  diag.reg_mse += ep.initial_pred_dist;

  for (size_t i = 0; i < ep.rounds.size(); ++i) {
    const RoundEntry& r = ep.rounds[i];
    int t = static_cast<int>(i) + 1;
    if (r.scripted) {
      qg.question += qbot_question_logprob_grad(qp, h, r.q, dims);
      ABotGrads sl = abot_answer_logprob_grad(ap, ep.world, h, r.q, r.a, dims);
      ag.attend_v += sl.attend_v;
      ag.attend_obj += sl.attend_obj;
      ag.attend_q += sl.attend_q;
      ag.attend_h += sl.attend_h;
      ag.answer += sl.answer;
      diag.q_ce -= eval_log_prob(qbot_question_probs(qp, h),
                                 question_index(r.q, dims.num_attributes));
      AttendCache cache = abot_attend_cached(ap, ep.world, h, r.q, dims);
      diag.a_ce -= eval_log_prob(abot_answer_probs(ap, cache.attended, r.q, dims),
                                 r.a.value);
    } else {
      double adv = attr[t] - base.per_round[t];
      qg.question += adv * qbot_question_logprob_grad(qp, h, r.q, dims);
      ABotGrads pg = abot_answer_logprob_grad(ap, ep.world, h, r.q, r.a, dims);
      ag.attend_v += adv * pg.attend_v;
      ag.attend_obj += adv * pg.attend_obj;
      ag.attend_q += adv * pg.attend_q;
      ag.attend_h += adv * pg.attend_h;
      ag.answer += adv * pg.answer;
      diag.policy_terms_sampled += 2;  // one question term, one answer term
    }
    h = observe(h, r.q, r.a, dims);
    diag.reg_mse += r.pred_dist;
    diag.mean_orig += r.reward.orig;
    diag.mean_div += r.reward.div;
    diag.mean_inf += r.reward.inf;
    diag.mean_total += r.reward.total;
  }
  diag.episodes += 1;
}

UpdateDiagnostics reinforce_update(const std::vector<EpisodeRecord>& batch,
                                   QBotParams& qp, ABotParams& ap, Baselines& base,
                                   const TrainConfig& cfg, const AgentDims& dims,
                                   double lr_q, double lr_a) {
  if (batch.empty()) throw ValueError("reinforce_update: empty batch");
  QBotGrads qg = zero_qbot_grads(dims);
  ABotGrads ag = zero_abot_grads(dims);
  UpdateDiagnostics diag;

  long rounds_seen = 0;
  long scripted_seen = 0;
  for (size_t i = 0; i < batch.size(); ++i) {
    accumulate_episode_grads(batch[i], qp, ap, dims, cfg, base, qg, ag, diag);
    if (!grads_finite(qg, ag)) {
      throw NumericError("reinforce_update: non-finite gradient at batch episode " +
                         std::to_string(i));
    }
    rounds_seen += static_cast<long>(batch[i].rounds.size());
    for (const RoundEntry& r : batch[i].rounds) scripted_seen += r.scripted ? 1 : 0;
  }

  double mx = 0.0;
  mx = std::max(mx, clamp_matrix(qg.question, cfg.clip_bound));
  mx = std::max(mx, clamp_matrix(qg.regress, cfg.clip_bound));
  mx = std::max(mx, clamp_vector(ag.attend_v, cfg.clip_bound));
  mx = std::max(mx, clamp_matrix(ag.attend_obj, cfg.clip_bound));
  mx = std::max(mx, clamp_matrix(ag.attend_q, cfg.clip_bound));
  mx = std::max(mx, clamp_matrix(ag.attend_h, cfg.clip_bound));
  mx = std::max(mx, clamp_matrix(ag.answer, cfg.clip_bound));
  diag.max_component = mx;

  qp.question += lr_q * qg.question;
  // The regression head tracks the evolving policy's dialogues with its own
  // normalized rate, decoupled from the policy learning-rate schedule;
  // averaging over samples keeps the step stable for rates below 2.
  long reg_samples = 0;
  for (const EpisodeRecord& ep : batch) {
    reg_samples += static_cast<long>(ep.rounds.size()) + 1;
  }
  if (cfg.regression_weight != 0.0 && reg_samples > 0) {
    qp.regress +=
        cfg.regression_weight * qg.regress / static_cast<double>(reg_samples);
  }
  ap.attend_v += lr_a * ag.attend_v;
  ap.attend_obj += lr_a * ag.attend_obj;
  ap.attend_q += lr_a * ag.attend_q;
  ap.attend_h += lr_a * ag.attend_h;
  ap.answer += lr_a * ag.answer;

  if (cfg.baseline_decay > 0.0) {
    int rounds = static_cast<int>(base.per_round.size()) - 1;
    std::vector<double> sums(rounds + 1, 0.0);
    for (const EpisodeRecord& ep : batch) {
      std::vector<double> attr = attribution_for(ep, cfg);
      for (size_t t = 1; t < attr.size() && t <= static_cast<size_t>(rounds); ++t) {
        sums[t] += attr[t];
      }
    }
    for (int t = 1; t <= rounds; ++t) {
      base.per_round[t] = cfg.baseline_decay * base.per_round[t] +
                          (1.0 - cfg.baseline_decay) * sums[t] / batch.size();
    }
  }

  if (rounds_seen > 0) {
    diag.mean_orig /= rounds_seen;
    diag.mean_div /= rounds_seen;
    diag.mean_inf /= rounds_seen;
    diag.mean_total /= rounds_seen;
    diag.reg_mse /= (rounds_seen + batch.size());
  }
  if (scripted_seen > 0) {
    diag.q_ce /= scripted_seen;
    diag.a_ce /= scripted_seen;
  }
  return diag;
}

int anneal_k(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw ValueError("anneal_k: epoch must be non-negative");
  if (cfg.k_anneal_epochs < 1) {
    throw ValueError("anneal_k: k_anneal_epochs must be at least 1");
  }
  if (cfg.k_end < 0 || cfg.k_start < cfg.k_end) {
    throw ValueError("anneal_k: need k_start >= k_end >= 0");
  }
  return std::max(cfg.k_end, cfg.k_start - epoch / cfg.k_anneal_epochs);
}

double lr_at(int epoch, double lr0, double lr_floor, int total_epochs) {
  if (lr0 <= 0.0) throw ValueError("lr_at: lr must be positive");
  if (total_epochs <= 1 || lr_floor >= lr0) return lr0;
  if (epoch >= total_epochs - 1) return lr_floor;
  if (epoch <= 0) return lr0;
  double frac = static_cast<double>(epoch) / (total_epochs - 1);
  return lr0 * std::pow(lr_floor / lr0, frac);
}

PretrainStats pretrain_sl(QBotParams& qp, ABotParams& ap, const Corpus& corpus,
                          const PretrainConfig& cfg, const AgentDims& dims) {
  if (corpus.empty()) throw ValueError("pretrain_sl: empty corpus");
  if (cfg.epochs < 0) throw ValueError("pretrain_sl: epochs must be non-negative");
  if (cfg.regression_weight < 0.0 || cfg.regression_weight >= 2.0) {
    throw ValueError("pretrain_sl: regression_weight must be in [0, 2)");
  }
  PretrainStats stats;
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);

  // The regression head is linear and its inputs (dialogue histories) do not
  // change during training, so its squared error is an exact quadratic in the
  // weights. Accumulate the normal matrices once, then take one full-batch
  // line-searched gradient step per epoch: the loss is monotone by
  // construction for step scales below 2, at any history magnitude.
  const int hist_dim = dims.history_dim();
  Eigen::MatrixXd reg_xtx = Eigen::MatrixXd::Zero(hist_dim, hist_dim);
  Eigen::MatrixXd reg_xyt = Eigen::MatrixXd::Zero(dims.feature_dim(), hist_dim);
  double reg_yy = 0.0;
  double reg_n = 0.0;
  for (const ScriptedDialogue& d : corpus) {
    Eigen::VectorXd target = target_feature(d.world);
    DialogueHistory h = history_from_caption(default_caption(d.world), dims);
    auto add_sample = [&](const DialogueHistory& hist) {
      reg_xtx += hist.feat * hist.feat.transpose();
      reg_xyt += target * hist.feat.transpose();
      reg_yy += target.squaredNorm();
      reg_n += 1.0;
    };
    add_sample(h);
    for (const ScriptedRound& r : d.rounds) {
      h = observe(h, r.q, r.a, dims);
      add_sample(h);
    }
  }
  // A small ridge term keeps the quadratic well conditioned: the count
  // features are collinear (answer counts always sum to the round index).
  constexpr double kRegressRidge = 0.01;
  const Eigen::MatrixXd reg_hess =
      (2.0 / reg_n) * reg_xtx +
      2.0 * kRegressRidge * Eigen::MatrixXd::Identity(hist_dim, hist_dim);
  auto reg_train_mse = [&](const Eigen::MatrixXd& w) {
    return ((w * reg_xtx).cwiseProduct(w).sum() -
            2.0 * w.cwiseProduct(reg_xyt).sum() + reg_yy) / reg_n;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    RngStream shuffle_rng(derive_seed(cfg.seed, 0x5107 + epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

    PretrainEpochStats es;
    long rounds_seen = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      size_t stop = std::min(order.size(), start + cfg.batch_size);
      QBotGrads qg = zero_qbot_grads(dims);
      ABotGrads ag = zero_abot_grads(dims);
      for (size_t i = start; i < stop; ++i) {
        const ScriptedDialogue& d = corpus[order[i]];
        DialogueHistory h = history_from_caption(default_caption(d.world), dims);
        for (const ScriptedRound& r : d.rounds) {
          qg.question += qbot_question_logprob_grad(qp, h, r.q, dims);
          ABotGrads g = abot_answer_logprob_grad(ap, d.world, h, r.q, r.a, dims);
          ag.attend_v += g.attend_v;
          ag.attend_obj += g.attend_obj;
          ag.attend_q += g.attend_q;
          ag.attend_h += g.attend_h;
          ag.answer += g.answer;
          es.q_ce -= eval_log_prob(qbot_question_probs(qp, h),
                                   question_index(r.q, dims.num_attributes));
          AttendCache cache = abot_attend_cached(ap, d.world, h, r.q, dims);
          es.a_ce -= eval_log_prob(abot_answer_probs(ap, cache.attended, r.q, dims),
                                   r.a.value);
          ++rounds_seen;
          h = observe(h, r.q, r.a, dims);
        }
      }
      if (!grads_finite(qg, ag)) {
        throw NumericError("pretrain_sl: non-finite gradient in epoch " +
                           std::to_string(epoch));
      }
      double scale = 1.0 / static_cast<double>(stop - start);
      qp.question += cfg.lr_q * scale * qg.question;
      ap.attend_v += cfg.lr_a * scale * ag.attend_v;
      ap.attend_obj += cfg.lr_a * scale * ag.attend_obj;
      ap.attend_q += cfg.lr_a * scale * ag.attend_q;
      ap.attend_h += cfg.lr_a * scale * ag.attend_h;
      ap.answer += cfg.lr_a * scale * ag.answer;
    }
    if (cfg.regression_weight > 0.0) {
      Eigen::MatrixXd grad =
          (2.0 / reg_n) * (qp.regress * reg_xtx - reg_xyt) +
          2.0 * kRegressRidge * qp.regress;
      double gg = grad.squaredNorm();
      double curvature = (grad * reg_hess).cwiseProduct(grad).sum();
      if (curvature > 0.0) {
        qp.regress -= cfg.regression_weight * (gg / curvature) * grad;
      }
    }
    if (rounds_seen > 0) {
      es.q_ce /= rounds_seen;
      es.a_ce /= rounds_seen;
    }
    es.reg_mse = reg_train_mse(qp.regress);
    stats.epochs.push_back(es);
  }
  return stats;
}

SlEval evaluate_sl(const QBotParams& qp, const ABotParams& ap, const Corpus& corpus,
                   const AgentDims& dims) {
  if (corpus.empty()) throw ValueError("evaluate_sl: empty corpus");
  SlEval ev;
  long rounds_seen = 0;
  long preds_seen = 0;
  long correct = 0;
  for (const ScriptedDialogue& d : corpus) {
    Eigen::VectorXd target = target_feature(d.world);
    DialogueHistory h = history_from_caption(default_caption(d.world), dims);
    double d0 = (target - qbot_predict(qp, h)).squaredNorm();
    ev.round0_mse += d0;
    ev.reg_mse += d0;
    ++preds_seen;
    for (const ScriptedRound& r : d.rounds) {
      ev.q_ce -= eval_log_prob(qbot_question_probs(qp, h),
                               question_index(r.q, dims.num_attributes));
      AttendCache cache = abot_attend_cached(ap, d.world, h, r.q, dims);
      Eigen::VectorXd aprobs = abot_answer_probs(ap, cache.attended, r.q, dims);
      ev.a_ce -= eval_log_prob(aprobs, r.a.value);
      int argmax = 0;
      aprobs.maxCoeff(&argmax);
      correct += argmax == r.a.value ? 1 : 0;
      ++rounds_seen;
      h = observe(h, r.q, r.a, dims);
      ev.reg_mse += (target - qbot_predict(qp, h)).squaredNorm();
      ++preds_seen;
    }
    ev.final_mse += (target - qbot_predict(qp, h)).squaredNorm();
  }
  ev.q_ce /= rounds_seen;
  ev.a_ce /= rounds_seen;
  ev.reg_mse /= preds_seen;
  ev.answer_accuracy = static_cast<double>(correct) / rounds_seen;
  ev.round0_mse /= corpus.size();
  ev.final_mse /= corpus.size();
  return ev;
}

std::vector<EpisodeRecord> rollout_batch(const QBotParams& qp, const ABotParams& ap,
                                         const WorldConfig& wc, const TrainConfig& cfg,
                                         const AgentDims& dims, int k,
                                         int64_t first_episode, int count) {
  std::vector<EpisodeRecord> out(count);
  auto roll_range = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      RngStream rng(derive_seed(derive_seed(cfg.seed, kStreamEpisode),
                                static_cast<uint64_t>(first_episode + i)));
      World w = gen_world(wc, rng);
      EpisodeOptions opts;
      opts.k = k;
      out[i] = run_episode(qp, ap, w, cfg, dims, rng, opts);
    }
  };
  int threads = std::max(1, cfg.threads);
  if (threads == 1 || count < 2 * threads) {
    roll_range(0, count);
    return out;
  }
  std::vector<std::future<void>> jobs;
  int chunk = (count + threads - 1) / threads;
  for (int lo = 0; lo < count; lo += chunk) {
    int hi = std::min(count, lo + chunk);
    jobs.push_back(std::async(std::launch::async, roll_range, lo, hi));
  }
  for (auto& j : jobs) j.get();
  return out;
}

void run_training(QBotParams& qp, ABotParams& ap, TrainState& state,
                  const TrainConfig& cfg, const WorldConfig& wc, const AgentDims& dims,
                  const TrainCallbacks& callbacks) {
  if (static_cast<int>(state.baselines.per_round.size()) != cfg.rounds + 1) {
    state.baselines = make_baselines(cfg.rounds);
  }
  for (int epoch = state.next_epoch; epoch < cfg.epochs; ++epoch) {
    int k = std::min(anneal_k(epoch, cfg), cfg.rounds);
    double lr_q = lr_at(epoch, cfg.lr_q, cfg.lr_q_floor, cfg.epochs);
    double lr_a = lr_at(epoch, cfg.lr_a, cfg.lr_a_floor, cfg.epochs);

    UpdateDiagnostics agg;
    long batches = 0;
    for (int start = 0; start < cfg.episodes_per_epoch; start += cfg.batch_size) {
      int count = std::min(cfg.batch_size, cfg.episodes_per_epoch - start);
      std::vector<EpisodeRecord> batch =
          rollout_batch(qp, ap, wc, cfg, dims, k, state.episodes_done, count);
      if (callbacks.on_episode) {
        for (int i = 0; i < count; ++i) {
          callbacks.on_episode(batch[i], state.episodes_done + i);
        }
      }
      state.episodes_done += count;
      UpdateDiagnostics d =
          reinforce_update(batch, qp, ap, state.baselines, cfg, dims, lr_q, lr_a);
      agg.episodes += d.episodes;
      agg.mean_orig += d.mean_orig;
      agg.mean_div += d.mean_div;
      agg.mean_inf += d.mean_inf;
      agg.mean_total += d.mean_total;
      agg.q_ce += d.q_ce;
      agg.a_ce += d.a_ce;
      agg.reg_mse += d.reg_mse;
      agg.max_component = std::max(agg.max_component, d.max_component);
      agg.policy_terms_scripted += d.policy_terms_scripted;
      agg.policy_terms_sampled += d.policy_terms_sampled;
      ++batches;
    }
    if (batches > 0) {
      agg.mean_orig /= batches;
      agg.mean_div /= batches;
      agg.mean_inf /= batches;
      agg.mean_total /= batches;
      agg.q_ce /= batches;
      agg.a_ce /= batches;
      agg.reg_mse /= batches;
    }
    state.next_epoch = epoch + 1;
    if (callbacks.on_epoch) {
      callbacks.on_epoch(EpochDiagnostics{epoch, k, lr_q, lr_a, agg});
    }
    if (callbacks.stop_after && callbacks.stop_after(epoch)) return;
  }
}

// --- exhaustive oracle -----------------------------------------------------

namespace {

constexpr double kMaxTrajectories = 1e6;

}  // namespace

OracleResult exact_objective(const QBotParams& qp, const ABotParams& ap,
                             const World& w, const TrainConfig& cfg,
                             const AgentDims& dims, int k, const Ivc& initial_ivc) {
  int free_rounds = cfg.rounds - std::clamp(k, 0, cfg.rounds);
  int nq = question_vocab(w);
  int nv = answer_vocab(w);
  double count_d = std::pow(static_cast<double>(nq) * nv, free_rounds);
  if (count_d > kMaxTrajectories) {
    throw ValueError("exact_objective: trajectory space too large (" +
                     std::to_string(count_d) + ")");
  }
  int64_t count = static_cast<int64_t>(count_d + 0.5);

  OracleResult res;
  res.q_grads = zero_qbot_grads(dims);
  res.a_grads = zero_abot_grads(dims);
  res.trajectories.reserve(count);

  RngStream dummy(0);
  double prob_sum = 0.0;
  for (int64_t code = 0; code < count; ++code) {
    std::vector<ScriptedRound> actions(free_rounds);
    int64_t rem = code;
    for (int t = 0; t < free_rounds; ++t) {
      int pair = static_cast<int>(rem % (nq * nv));
      rem /= nq * nv;
      actions[t].q = question_from_index(pair / nv, w.num_objects, w.num_attributes);
      actions[t].a = AnswerToken{pair % nv};
    }

    EpisodeOptions opts;
    opts.k = k;
    opts.initial_ivc = initial_ivc;
    opts.forced = &actions;
    EpisodeRecord ep = run_episode(qp, ap, w, cfg, dims, dummy, opts);

    OracleTrajectory traj;
    traj.actions = actions;
    for (const RoundEntry& r : ep.rounds) {
      traj.reward += r.reward.total;
      if (!r.scripted) traj.log_prob += r.logp_q + r.logp_a;
    }
    double prob = std::exp(traj.log_prob);
    prob_sum += prob;
    res.objective += prob * traj.reward;

    // likelihood-ratio term: prob * reward * grad log prob
    double weight = prob * traj.reward;
    DialogueHistory h = history_from_caption(default_caption(w), dims);
    for (const RoundEntry& r : ep.rounds) {
      if (!r.scripted) {
        res.q_grads.question += weight * qbot_question_logprob_grad(qp, h, r.q, dims);
        ABotGrads g = abot_answer_logprob_grad(ap, w, h, r.q, r.a, dims);
        res.a_grads.attend_v += weight * g.attend_v;
        res.a_grads.attend_obj += weight * g.attend_obj;
        res.a_grads.attend_q += weight * g.attend_q;
        res.a_grads.attend_h += weight * g.attend_h;
        res.a_grads.answer += weight * g.answer;
      }
      h = observe(h, r.q, r.a, dims);
    }
    res.trajectories.push_back(std::move(traj));
  }
  if (std::abs(prob_sum - 1.0) > 1e-9) {
    throw NumericError("exact_objective: trajectory probabilities sum to " +
                       std::to_string(prob_sum));
  }
  return res;
}

double reweighted_objective(const QBotParams& qp, const ABotParams& ap, const World& w,
                            const TrainConfig& cfg, const AgentDims& dims, int k,
                            const Ivc& initial_ivc,
                            const std::vector<OracleTrajectory>& frozen) {
  RngStream dummy(0);
  double j = 0.0;
  for (const OracleTrajectory& traj : frozen) {
    EpisodeOptions opts;
    opts.k = k;
    opts.initial_ivc = initial_ivc;
    opts.forced = &traj.actions;
    EpisodeRecord ep = run_episode(qp, ap, w, cfg, dims, dummy, opts);
    double logp = 0.0;
    for (const RoundEntry& r : ep.rounds) {
      if (!r.scripted) logp += r.logp_q + r.logp_a;
    }
    j += std::exp(logp) * traj.reward;
  }
  return j;
}

}  // namespace ecsrl
