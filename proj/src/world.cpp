#include "ecsrl/world.hpp"

#include <string>

#include "ecsrl/errors.hpp"

namespace ecsrl {

QuestionToken question_from_index(int index, int num_objects, int num_attributes) {
  if (index < 0 || index >= num_objects * num_attributes) {
    throw ValueError("question_from_index: index " + std::to_string(index) +
                     " out of range");
  }
  return QuestionToken{index / num_attributes, index % num_attributes};
}

World gen_world(const WorldConfig& cfg, RngStream& rng) {
  if (cfg.num_objects < 2 || cfg.num_objects > 16) {
    throw ValueError("gen_world: num_objects must lie in [2, 16]");
  }
  if (cfg.num_attributes < 1 || cfg.num_attributes > 4) {
    throw ValueError("gen_world: num_attributes must lie in [1, 4]");
  }
  if (cfg.num_values < 2 || cfg.num_values > 8) {
    throw ValueError("gen_world: num_values must lie in [2, 8]");
  }
  World w;
  w.num_objects = cfg.num_objects;
  w.num_attributes = cfg.num_attributes;
  w.num_values = cfg.num_values;
  w.objects.assign(cfg.num_objects, std::vector<int>(cfg.num_attributes, 0));
  for (auto& obj : w.objects) {
    for (int& value : obj) value = rng.next_index(cfg.num_values);
  }
  if (cfg.inactive_slots) {
    w.active = 2 + rng.next_index(cfg.num_objects - 1);  // uniform over [2, N]
  } else {
    w.active = cfg.num_objects;
  }
  return w;
}

Eigen::VectorXd target_feature(const World& w) {
  Eigen::VectorXd feat = Eigen::VectorXd::Zero(feature_dim(w));
  for (int j = 0; j < w.active; ++j) {
    for (int a = 0; a < w.num_attributes; ++a) {
      int v = w.objects[j][a];
      feat[(j * w.num_attributes + a) * w.num_values + v] = 1.0;
    }
  }
  return feat;
}

Eigen::VectorXd object_feature(const World& w, int slot) {
  if (slot < 0 || slot >= w.num_objects) {
    throw DimensionError("object_feature: slot " + std::to_string(slot) +
                         " out of range");
  }
  Eigen::VectorXd feat = Eigen::VectorXd::Zero(feature_dim(w));
  if (slot >= w.active) return feat;
  for (int a = 0; a < w.num_attributes; ++a) {
    int v = w.objects[slot][a];
    feat[(slot * w.num_attributes + a) * w.num_values + v] = 1.0;
  }
  return feat;
}

AnswerToken oracle_answer(const World& w, const QuestionToken& q) {
  if (q.selector < 0 || q.selector >= w.num_objects || q.attribute < 0 ||
      q.attribute >= w.num_attributes) {
    throw ValueError("oracle_answer: question token out of range");
  }
  if (q.selector >= w.active) return AnswerToken{answer_none(w)};
  return AnswerToken{w.objects[q.selector][q.attribute]};
}

QuestionToken scripted_question(int round, int num_objects, int num_attributes) {
  if (round < 1) {
    throw ValueError("scripted_question: rounds are 1-based, got " +
                     std::to_string(round));
  }
  int index = (round - 1) % (num_objects * num_attributes);
  return question_from_index(index, num_objects, num_attributes);
}

Caption default_caption(const World& w) {
  return Caption{0, 0, w.objects[0][0]};
}

}  // namespace ecsrl
