#pragma once

#include <Eigen/Core>
#include <vector>

#include "ecsrl/rng.hpp"

namespace ecsrl {

// Synthetic scene: `num_objects` slots, each with `num_attributes` categorical
// attributes over `num_values` values. With inactive slots enabled only the
// first `active` slots hold real objects; questions about the rest get the
// NONE answer.
struct World {
  int num_objects = 0;
  int num_attributes = 0;
  int num_values = 0;
  int active = 0;
  std::vector<std::vector<int>> objects;  // [slot][attribute] -> value index
};

// "What is attribute `attribute` of object slot `selector`?"
struct QuestionToken {
  int selector = 0;
  int attribute = 0;
  bool operator==(const QuestionToken&) const = default;
};

// Answer vocabulary: value indices 0..V-1 plus a NONE token at index V.
struct AnswerToken {
  int value = 0;
  bool operator==(const AnswerToken&) const = default;
};

// One revealed attribute handed to the questioner before round 1.
struct Caption {
  int object_index = 0;
  int attribute = 0;
  int value = 0;
};

struct WorldConfig {
  int num_objects = 8;
  int num_attributes = 3;
  int num_values = 5;
  bool inactive_slots = false;  // when true, active count ~ uniform[2, N]
};

inline int question_vocab(const World& w) { return w.num_objects * w.num_attributes; }
inline int answer_vocab(const World& w) { return w.num_values + 1; }
inline int answer_none(const World& w) { return w.num_values; }
inline int feature_dim(const World& w) {
  return w.num_objects * w.num_attributes * w.num_values;
}

inline int question_index(const QuestionToken& q, int num_attributes) {
  return q.selector * num_attributes + q.attribute;
}

QuestionToken question_from_index(int index, int num_objects, int num_attributes);

// Samples a scene. Attribute values are independent uniform draws; the draw
// count is fixed regardless of the active-slot outcome so streams stay
// aligned across configs.
World gen_world(const WorldConfig& cfg, RngStream& rng);

// Scene feature the questioner regresses toward: concatenated one-hot value
// encodings, laid out slot-major then attribute-major. Inactive slots stay
// all zero.
Eigen::VectorXd target_feature(const World& w);

// Slot j's slice of the scene feature (zero outside its own block). This is
// what the answerer's attention mixes over.
Eigen::VectorXd object_feature(const World& w, int slot);

AnswerToken oracle_answer(const World& w, const QuestionToken& q);

// Deterministic sweep used for supervised dialogues: round t asks token
// (t-1) mod (N*A), walking slot-major through every (slot, attribute) pair.
QuestionToken scripted_question(int round, int num_objects, int num_attributes);

Caption default_caption(const World& w);

}  // namespace ecsrl
