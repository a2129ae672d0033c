#pragma once

#include <Eigen/Core>

#include "ecsrl/ecs.hpp"
#include "ecsrl/rng.hpp"
#include "ecsrl/world.hpp"

namespace ecsrl {

inline constexpr int kDefaultHidden = 16;
inline constexpr double kDefaultInitScale = 0.1;

// Shape bundle shared by both agents.
struct AgentDims {
  int num_objects = 8;
  int num_attributes = 3;
  int num_values = 5;
  int hidden = kDefaultHidden;

  int question_vocab() const { return num_objects * num_attributes; }
  int answer_vocab() const { return num_values + 1; }
  int feature_dim() const { return num_objects * num_attributes * num_values; }
  // [question counts | answer counts | caption question one-hot | caption answer one-hot]
  int history_dim() const { return 2 * (question_vocab() + answer_vocab()); }
  int answer_input_dim() const { return feature_dim() + question_vocab(); }

  static AgentDims from_world(const WorldConfig& w, int hidden = kDefaultHidden) {
    return AgentDims{w.num_objects, w.num_attributes, w.num_values, hidden};
  }
};

// Order-insensitive dialogue state both agents condition on: token counts of
// everything said so far plus the fixed caption block.
struct DialogueHistory {
  Eigen::VectorXd feat;
};

DialogueHistory history_from_caption(const Caption& cap, const AgentDims& dims);

// Returns a new history with the round's question and answer counted in.
DialogueHistory observe(const DialogueHistory& h, const QuestionToken& q,
                        const AnswerToken& a, const AgentDims& dims);

// Questioner: linear-softmax question policy plus a linear scene regressor,
// both reading the dialogue history counts.
struct QBotParams {
  Eigen::MatrixXd question;  // question_vocab x history_dim
  Eigen::MatrixXd regress;   // feature_dim x history_dim
};

// Answerer: one-layer tanh attention over object slots conditioned on the
// question and history, then a linear-softmax answer head over the attended
// scene feature concatenated with the question embedding.
struct ABotParams {
  Eigen::VectorXd attend_v;    // hidden
  Eigen::MatrixXd attend_obj;  // hidden x feature_dim
  Eigen::MatrixXd attend_q;    // hidden x question_vocab
  Eigen::MatrixXd attend_h;    // hidden x history_dim
  Eigen::MatrixXd answer;      // answer_vocab x answer_input_dim
};

struct QBotGrads {
  Eigen::MatrixXd question;
  Eigen::MatrixXd regress;
};

struct ABotGrads {
  Eigen::VectorXd attend_v;
  Eigen::MatrixXd attend_obj;
  Eigen::MatrixXd attend_q;
  Eigen::MatrixXd attend_h;
  Eigen::MatrixXd answer;
};

QBotParams init_qbot(const AgentDims& dims, RngStream& rng,
                     double scale = kDefaultInitScale);
ABotParams init_abot(const AgentDims& dims, RngStream& rng,
                     double scale = kDefaultInitScale);
QBotGrads zero_qbot_grads(const AgentDims& dims);
ABotGrads zero_abot_grads(const AgentDims& dims);

struct SampledToken {
  int index = 0;
  double log_prob = 0.0;
};

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
SampledToken sample_categorical(const Eigen::VectorXd& probs, RngStream& rng);
SampledToken greedy_categorical(const Eigen::VectorXd& probs);

Eigen::VectorXd qbot_question_probs(const QBotParams& p, const DialogueHistory& h);

struct AskResult {
  QuestionToken token;
  double log_prob = 0.0;
};

AskResult qbot_ask(const QBotParams& p, const DialogueHistory& h,
                   const AgentDims& dims, RngStream& rng, bool greedy = false);

Eigen::VectorXd qbot_predict(const QBotParams& p, const DialogueHistory& h);

// Forward cache for the attention stack, kept so the answer-policy backward
// pass does not recompute tanh activations.
struct AttendCache {
  Eigen::MatrixXd th;       // hidden x num_objects, tanh of pre-activations
  Eigen::VectorXd scores;   // num_objects
  Eigen::VectorXd att;      // num_objects
  Eigen::VectorXd attended; // feature_dim, att-weighted object features
};

AttendCache abot_attend_cached(const ABotParams& p, const World& w,
                               const DialogueHistory& h, const QuestionToken& q,
                               const AgentDims& dims);

Ivc abot_attend(const ABotParams& p, const World& w, const DialogueHistory& h,
                const QuestionToken& q, const AgentDims& dims);

Eigen::VectorXd abot_answer_probs(const ABotParams& p, const Eigen::VectorXd& attended,
                                  const QuestionToken& q, const AgentDims& dims);

struct AnswerResult {
  AnswerToken token;
  double log_prob = 0.0;
};

AnswerResult abot_answer(const ABotParams& p, const World& w, const Ivc& att,
                         const QuestionToken& q, const AgentDims& dims,
                         RngStream& rng, bool greedy = false);

// d log pi(token | h) / d question weights.
Eigen::MatrixXd qbot_question_logprob_grad(const QBotParams& p,
                                           const DialogueHistory& h,
                                           const QuestionToken& token,
                                           const AgentDims& dims);

// d ||target - prediction||^2 / d regression weights (descent direction is
// the negative of this).
Eigen::MatrixXd qbot_regress_sqerr_grad(const QBotParams& p, const DialogueHistory& h,
                                        const Eigen::VectorXd& target);

// d log pi(answer | world, h, q) / d all answerer parameters, including the
// path through the attention softmax and tanh scores.
ABotGrads abot_answer_logprob_grad(const ABotParams& p, const World& w,
                                   const DialogueHistory& h, const QuestionToken& q,
                                   const AnswerToken& answer, const AgentDims& dims);

}  // namespace ecsrl
