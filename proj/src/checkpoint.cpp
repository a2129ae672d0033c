#include "ecsrl/checkpoint.hpp"

#include <vector>

#include "ecsrl/errors.hpp"
#include "ecsrl/io.hpp"

namespace ecsrl {

namespace {

using nlohmann::ordered_json;

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json j;
  j["shape"] = {m.rows(), m.cols()};
  std::vector<double> data;
  data.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = data;
  return j;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j, const std::string& name) {
  if (!j.contains("shape") || !j.contains("data")) {
    throw DataError("checkpoint: array '" + name + "' is missing shape or data");
  }
  auto shape = j["shape"].get<std::vector<Eigen::Index>>();
  auto data = j["data"].get<std::vector<double>>();
  if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0 ||
      static_cast<Eigen::Index>(data.size()) != shape[0] * shape[1]) {
    throw DataError("checkpoint: array '" + name + "' has inconsistent shape");
  }
  Eigen::MatrixXd m(shape[0], shape[1]);
  size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[i++];
  }
  return m;
}

Eigen::VectorXd vector_from_json(const ordered_json& j, const std::string& name) {
  Eigen::MatrixXd m = matrix_from_json(j, name);
  if (m.cols() != 1) throw DataError("checkpoint: array '" + name + "' is not a vector");
  return m.col(0);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  ordered_json j;
  j["format_version"] = ckpt.version;
  j["kind"] = ckpt.kind;
  j["model_hash"] = ckpt.model_hash;
  j["epoch"] = ckpt.state.next_epoch;
  j["episodes_done"] = ckpt.state.episodes_done;
  j["rng"] = ckpt.state.rng.save_state();
  j["config"] = ckpt.config_echo;
  ordered_json arrays;
  arrays["qbot.question"] = matrix_to_json(ckpt.qbot.question);
  arrays["qbot.regress"] = matrix_to_json(ckpt.qbot.regress);
  arrays["abot.attend_v"] = matrix_to_json(ckpt.abot.attend_v);
  arrays["abot.attend_obj"] = matrix_to_json(ckpt.abot.attend_obj);
  arrays["abot.attend_q"] = matrix_to_json(ckpt.abot.attend_q);
  arrays["abot.attend_h"] = matrix_to_json(ckpt.abot.attend_h);
  arrays["abot.answer"] = matrix_to_json(ckpt.abot.answer);
  Eigen::MatrixXd base(ckpt.state.baselines.per_round.size(), 1);
  for (size_t i = 0; i < ckpt.state.baselines.per_round.size(); ++i) {
    base(static_cast<Eigen::Index>(i), 0) = ckpt.state.baselines.per_round[i];
  }
  arrays["baseline"] = matrix_to_json(base);
  j["arrays"] = arrays;
  write_atomic(path, j.dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("checkpoint: parse error in '" + path.string() + "': " + e.what());
  }
  Checkpoint ckpt;
  try {
    ckpt.version = j.at("format_version").get<int>();
    if (ckpt.version != kCheckpointVersion) {
      throw DataError("checkpoint: unsupported format_version " +
                      std::to_string(ckpt.version));
    }
    ckpt.kind = j.at("kind").get<std::string>();
    if (ckpt.kind != "pretrain" && ckpt.kind != "rl") {
      throw DataError("checkpoint: unknown kind '" + ckpt.kind + "'");
    }
    ckpt.model_hash = j.at("model_hash").get<uint64_t>();
    ckpt.state.next_epoch = j.at("epoch").get<int>();
    ckpt.state.episodes_done = j.at("episodes_done").get<int64_t>();
    ckpt.state.rng.load_state(j.at("rng").get<std::string>());
    ckpt.config_echo = j.at("config");
    const ordered_json& arrays = j.at("arrays");
    ckpt.qbot.question = matrix_from_json(arrays.at("qbot.question"), "qbot.question");
    ckpt.qbot.regress = matrix_from_json(arrays.at("qbot.regress"), "qbot.regress");
    ckpt.abot.attend_v = vector_from_json(arrays.at("abot.attend_v"), "abot.attend_v");
    ckpt.abot.attend_obj =
        matrix_from_json(arrays.at("abot.attend_obj"), "abot.attend_obj");
    ckpt.abot.attend_q = matrix_from_json(arrays.at("abot.attend_q"), "abot.attend_q");
    ckpt.abot.attend_h = matrix_from_json(arrays.at("abot.attend_h"), "abot.attend_h");
    ckpt.abot.answer = matrix_from_json(arrays.at("abot.answer"), "abot.answer");
    Eigen::VectorXd base = vector_from_json(arrays.at("baseline"), "baseline");
    ckpt.state.baselines.per_round.assign(base.data(), base.data() + base.size());
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint: malformed '" + path.string() + "': " + e.what());
  }
  return ckpt;
}

}  // namespace ecsrl
