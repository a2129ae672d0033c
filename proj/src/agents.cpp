#include "ecsrl/agents.hpp"

#include <cmath>
#include <string>

#include "ecsrl/errors.hpp"

namespace ecsrl {

namespace {

void check_history(const DialogueHistory& h, const AgentDims& dims, const char* who) {
  if (h.feat.size() != dims.history_dim()) {
    throw DimensionError(std::string(who) + ": history dim " +
                         std::to_string(h.feat.size()) + ", expected " +
                         std::to_string(dims.history_dim()));
  }
}

void check_question(const QuestionToken& q, const AgentDims& dims, const char* who) {
  if (q.selector < 0 || q.selector >= dims.num_objects || q.attribute < 0 ||
      q.attribute >= dims.num_attributes) {
    throw DimensionError(std::string(who) + ": question token out of range");
  }
}

void check_world(const World& w, const AgentDims& dims, const char* who) {
  if (w.num_objects != dims.num_objects || w.num_attributes != dims.num_attributes ||
      w.num_values != dims.num_values) {
    throw DimensionError(std::string(who) + ": world shape does not match agent dims");
  }
}

Eigen::MatrixXd uniform_matrix(int rows, int cols, RngStream& rng, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.next_symmetric(scale);
  }
  return m;
}

}  // namespace

DialogueHistory history_from_caption(const Caption& cap, const AgentDims& dims) {
  DialogueHistory h;
  h.feat = Eigen::VectorXd::Zero(dims.history_dim());
  int nq = dims.question_vocab();
  int nv = dims.answer_vocab();
  int token = cap.object_index * dims.num_attributes + cap.attribute;
  if (token < 0 || token >= nq || cap.value < 0 || cap.value >= dims.num_values) {
    throw DimensionError("history_from_caption: caption out of range");
  }
  h.feat[nq + nv + token] = 1.0;
  h.feat[nq + nv + nq + cap.value] = 1.0;
  return h;
}

DialogueHistory observe(const DialogueHistory& h, const QuestionToken& q,
                        const AnswerToken& a, const AgentDims& dims) {
  check_history(h, dims, "observe");
  check_question(q, dims, "observe");
  if (a.value < 0 || a.value >= dims.answer_vocab()) {
    throw DimensionError("observe: answer token out of range");
  }
  DialogueHistory out = h;
  out.feat[question_index(q, dims.num_attributes)] += 1.0;
  out.feat[dims.question_vocab() + a.value] += 1.0;
  return out;
}

QBotParams init_qbot(const AgentDims& dims, RngStream& rng, double scale) {
  QBotParams p;
  p.question = uniform_matrix(dims.question_vocab(), dims.history_dim(), rng, scale);
  p.regress = uniform_matrix(dims.feature_dim(), dims.history_dim(), rng, scale);
  return p;
}

ABotParams init_abot(const AgentDims& dims, RngStream& rng, double scale) {
  ABotParams p;
  p.attend_v = uniform_matrix(dims.hidden, 1, rng, scale).col(0);
  p.attend_obj = uniform_matrix(dims.hidden, dims.feature_dim(), rng, scale);
  p.attend_q = uniform_matrix(dims.hidden, dims.question_vocab(), rng, scale);
  p.attend_h = uniform_matrix(dims.hidden, dims.history_dim(), rng, scale);
  p.answer = uniform_matrix(dims.answer_vocab(), dims.answer_input_dim(), rng, scale);
  return p;
}

QBotGrads zero_qbot_grads(const AgentDims& dims) {
  QBotGrads g;
  g.question = Eigen::MatrixXd::Zero(dims.question_vocab(), dims.history_dim());
  g.regress = Eigen::MatrixXd::Zero(dims.feature_dim(), dims.history_dim());
  return g;
}

ABotGrads zero_abot_grads(const AgentDims& dims) {
  ABotGrads g;
  g.attend_v = Eigen::VectorXd::Zero(dims.hidden);
  g.attend_obj = Eigen::MatrixXd::Zero(dims.hidden, dims.feature_dim());
  g.attend_q = Eigen::MatrixXd::Zero(dims.hidden, dims.question_vocab());
  g.attend_h = Eigen::MatrixXd::Zero(dims.hidden, dims.history_dim());
  g.answer = Eigen::MatrixXd::Zero(dims.answer_vocab(), dims.answer_input_dim());
  return g;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd out = (logits.array() - logits.maxCoeff()).exp();
  return out / out.sum();
}

SampledToken sample_categorical(const Eigen::VectorXd& probs, RngStream& rng) {
  double u = rng.next_double();
  double acc = 0.0;
  int idx = static_cast<int>(probs.size()) - 1;
  for (int i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) {
      idx = i;
      break;
    }
  }
  return SampledToken{idx, std::log(probs[idx])};
}

SampledToken greedy_categorical(const Eigen::VectorXd& probs) {
  int idx = 0;
  probs.maxCoeff(&idx);
  return SampledToken{idx, std::log(probs[idx])};
}

Eigen::VectorXd qbot_question_probs(const QBotParams& p, const DialogueHistory& h) {
  if (p.question.cols() != h.feat.size()) {
    throw DimensionError("qbot_question_probs: history dim mismatch");
  }
  return softmax(p.question * h.feat);
}

AskResult qbot_ask(const QBotParams& p, const DialogueHistory& h,
                   const AgentDims& dims, RngStream& rng, bool greedy) {
  check_history(h, dims, "qbot_ask");
  Eigen::VectorXd probs = qbot_question_probs(p, h);
  SampledToken s = greedy ? greedy_categorical(probs) : sample_categorical(probs, rng);
  return AskResult{question_from_index(s.index, dims.num_objects, dims.num_attributes),
                   s.log_prob};
}

Eigen::VectorXd qbot_predict(const QBotParams& p, const DialogueHistory& h) {
  if (p.regress.cols() != h.feat.size()) {
    throw DimensionError("qbot_predict: history dim mismatch");
  }
  return p.regress * h.feat;
}

AttendCache abot_attend_cached(const ABotParams& p, const World& w,
                               const DialogueHistory& h, const QuestionToken& q,
                               const AgentDims& dims) {
  check_world(w, dims, "abot_attend");
  check_history(h, dims, "abot_attend");
  check_question(q, dims, "abot_attend");
  int n = dims.num_objects;
  Eigen::VectorXd shared =
      p.attend_q.col(question_index(q, dims.num_attributes)) + p.attend_h * h.feat;
  AttendCache cache;
  cache.th.resize(dims.hidden, n);
  cache.scores.resize(n);
  int block = dims.num_attributes * dims.num_values;
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd pre = shared;
    if (j < w.active) {
      for (int a = 0; a < dims.num_attributes; ++a) {
        pre += p.attend_obj.col(j * block + a * dims.num_values + w.objects[j][a]);
      }
    }
    cache.th.col(j) = pre.array().tanh();
    cache.scores[j] = p.attend_v.dot(cache.th.col(j));
  }
  cache.att = softmax(cache.scores);
  cache.attended = Eigen::VectorXd::Zero(dims.feature_dim());
  for (int j = 0; j < n; ++j) {
    if (j >= w.active) continue;
    for (int a = 0; a < dims.num_attributes; ++a) {
      cache.attended[j * block + a * dims.num_values + w.objects[j][a]] += cache.att[j];
    }
  }
  return cache;
}

Ivc abot_attend(const ABotParams& p, const World& w, const DialogueHistory& h,
                const QuestionToken& q, const AgentDims& dims) {
  AttendCache cache = abot_attend_cached(p, w, h, q, dims);
  Ivc ivc;
  ivc.weights.assign(cache.att.data(), cache.att.data() + cache.att.size());
  return ivc;
}

Eigen::VectorXd abot_answer_probs(const ABotParams& p, const Eigen::VectorXd& attended,
                                  const QuestionToken& q, const AgentDims& dims) {
  if (attended.size() != dims.feature_dim()) {
    throw DimensionError("abot_answer_probs: attended feature dim mismatch");
  }
  Eigen::VectorXd logits =
      p.answer.leftCols(dims.feature_dim()) * attended +
      p.answer.col(dims.feature_dim() + question_index(q, dims.num_attributes));
  return softmax(logits);
}

AnswerResult abot_answer(const ABotParams& p, const World& w, const Ivc& att,
                         const QuestionToken& q, const AgentDims& dims,
                         RngStream& rng, bool greedy) {
  check_world(w, dims, "abot_answer");
  check_question(q, dims, "abot_answer");
  if (static_cast<int>(att.weights.size()) != dims.num_objects) {
    throw DimensionError("abot_answer: attention size mismatch");
  }
  int block = dims.num_attributes * dims.num_values;
  Eigen::VectorXd attended = Eigen::VectorXd::Zero(dims.feature_dim());
  for (int j = 0; j < w.active; ++j) {
    for (int a = 0; a < dims.num_attributes; ++a) {
      attended[j * block + a * dims.num_values + w.objects[j][a]] += att.weights[j];
    }
  }
  Eigen::VectorXd probs = abot_answer_probs(p, attended, q, dims);
  SampledToken s = greedy ? greedy_categorical(probs) : sample_categorical(probs, rng);
  return AnswerResult{AnswerToken{s.index}, s.log_prob};
}

Eigen::MatrixXd qbot_question_logprob_grad(const QBotParams& p,
                                           const DialogueHistory& h,
                                           const QuestionToken& token,
                                           const AgentDims& dims) {
  check_history(h, dims, "qbot_question_logprob_grad");
  check_question(token, dims, "qbot_question_logprob_grad");
  Eigen::VectorXd probs = qbot_question_probs(p, h);
  Eigen::VectorXd d = -probs;
  d[question_index(token, dims.num_attributes)] += 1.0;
  return d * h.feat.transpose();
}

Eigen::MatrixXd qbot_regress_sqerr_grad(const QBotParams& p, const DialogueHistory& h,
                                        const Eigen::VectorXd& target) {
  if (target.size() != p.regress.rows()) {
    throw DimensionError("qbot_regress_sqerr_grad: target dim mismatch");
  }
  Eigen::VectorXd residual = p.regress * h.feat - target;
  return 2.0 * residual * h.feat.transpose();
}

ABotGrads abot_answer_logprob_grad(const ABotParams& p, const World& w,
                                   const DialogueHistory& h, const QuestionToken& q,
                                   const AnswerToken& answer, const AgentDims& dims) {
  if (answer.value < 0 || answer.value >= dims.answer_vocab()) {
    throw DimensionError("abot_answer_logprob_grad: answer token out of range");
  }
  AttendCache cache = abot_attend_cached(p, w, h, q, dims);
  Eigen::VectorXd probs = abot_answer_probs(p, cache.attended, q, dims);

  Eigen::VectorXd d_logits = -probs;
  d_logits[answer.value] += 1.0;

  ABotGrads g = zero_abot_grads(dims);
  int f_dim = dims.feature_dim();
  int q_col = f_dim + question_index(q, dims.num_attributes);
  g.answer.leftCols(f_dim) = d_logits * cache.attended.transpose();
  g.answer.col(q_col) = d_logits;

  Eigen::VectorXd d_attended = p.answer.leftCols(f_dim).transpose() * d_logits;

  int n = dims.num_objects;
  int block = dims.num_attributes * dims.num_values;
  Eigen::VectorXd d_att = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < w.active; ++j) {
    for (int a = 0; a < dims.num_attributes; ++a) {
      d_att[j] += d_attended[j * block + a * dims.num_values + w.objects[j][a]];
    }
  }

  // softmax backward over scores
  double mix = cache.att.dot(d_att);
  Eigen::VectorXd d_scores = cache.att.array() * (d_att.array() - mix);

  Eigen::VectorXd d_pre_sum = Eigen::VectorXd::Zero(dims.hidden);
  for (int j = 0; j < n; ++j) {
    g.attend_v += d_scores[j] * cache.th.col(j);
    Eigen::VectorXd d_pre =
        (1.0 - cache.th.col(j).array().square()) * (p.attend_v.array() * d_scores[j]);
    d_pre_sum += d_pre;
    if (j < w.active) {
      for (int a = 0; a < dims.num_attributes; ++a) {
        g.attend_obj.col(j * block + a * dims.num_values + w.objects[j][a]) += d_pre;
      }
    }
  }
  g.attend_q.col(question_index(q, dims.num_attributes)) = d_pre_sum;
  g.attend_h = d_pre_sum * h.feat.transpose();
  return g;
}

}  // namespace ecsrl
