#include "ecsrl/trace.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ecsrl/ecs.hpp"
#include "ecsrl/errors.hpp"

namespace ecsrl {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kRewardRecomputeTol = 1e-9;

[[noreturn]] void bad_line(const std::filesystem::path& path, int lineno,
                           const std::string& msg) {
  throw DataError("trace: " + path.string() + ":" + std::to_string(lineno) + ": " + msg);
}

}  // namespace

ordered_json world_to_json(const World& w) {
  ordered_json j;
  j["n"] = w.num_objects;
  j["a"] = w.num_attributes;
  j["v"] = w.num_values;
  j["active"] = w.active;
  j["objects"] = w.objects;
  return j;
}

World world_from_json(const json& j) {
  World w;
  try {
    w.num_objects = j.at("n").get<int>();
    w.num_attributes = j.at("a").get<int>();
    w.num_values = j.at("v").get<int>();
    w.active = j.at("active").get<int>();
    w.objects = j.at("objects").get<std::vector<std::vector<int>>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("world: malformed record: ") + e.what());
  }
  if (static_cast<int>(w.objects.size()) != w.num_objects || w.active < 0 ||
      w.active > w.num_objects) {
    throw DataError("world: slot count does not match record");
  }
  for (const auto& obj : w.objects) {
    if (static_cast<int>(obj.size()) != w.num_attributes) {
      throw DataError("world: attribute count does not match record");
    }
    for (int value : obj) {
      if (value < 0 || value >= w.num_values) {
        throw DataError("world: attribute value out of range");
      }
    }
  }
  return w;
}

ordered_json trace_round_json(int64_t episode, int round, const RoundEntry& r) {
  ordered_json j;
  j["type"] = "round";
  j["episode"] = episode;
  j["round"] = round;
  j["q"] = {r.q.selector, r.q.attribute};
  j["a"] = r.a.value;
  j["i_vc"] = r.ecs.ivc.weights;
  j["a_vc"] = std::vector<int>(r.ecs.avc.bits.begin(), r.ecs.avc.bits.end());
  j["reward"] = {{"orig", r.reward.orig},
                 {"div", r.reward.div},
                 {"inf", r.reward.inf},
                 {"total", r.reward.total}};
  j["pred_dist"] = r.pred_dist;
  return j;
}

ordered_json trace_summary_json(int64_t episode, const EpisodeRecord& ep) {
  ordered_json j;
  j["type"] = "summary";
  j["episode"] = episode;
  j["rounds"] = ep.rounds.size();
  int covered = 0;
  double total = 0.0;
  for (const RoundEntry& r : ep.rounds) total += r.reward.total;
  if (!ep.rounds.empty()) {
    for (uint8_t b : ep.rounds.back().ecs.avc.bits) covered += b;
  }
  j["covered"] = covered;
  j["reward_total"] = total;
  j["final_pred_dist"] = ep.rounds.empty() ? ep.initial_pred_dist
                                           : ep.rounds.back().pred_dist;
  return j;
}

TraceStats validate_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("trace: cannot open '" + path.string() + "'");

  TraceStats stats;
  std::string line;
  int lineno = 0;

  double a_orig = 0.0, a_div = 0.0, a_inf = 0.0;
  bool have_header = false;

  int64_t cur_episode = -1;
  int prev_round = 0;
  std::vector<int> prev_avc;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      bad_line(path, lineno, std::string("parse error: ") + e.what());
    }
    if (!have_header) {
      if (!j.contains("type") || j["type"] != "header" || !j.contains("config")) {
        bad_line(path, lineno, "first record must be a header with a config echo");
      }
      const json& cfg = j["config"];
      try {
        a_orig = cfg.at("alpha_orig").get<double>();
        a_div = cfg.at("alpha_div").get<double>();
        a_inf = cfg.at("alpha_inf").get<double>();
      } catch (const json::exception&) {
        bad_line(path, lineno, "header config echo is missing reward coefficients");
      }
      if (j.contains("coefficients")) {
        try {
          a_orig = j["coefficients"].at("orig").get<double>();
          a_div = j["coefficients"].at("div").get<double>();
          a_inf = j["coefficients"].at("inf").get<double>();
        } catch (const json::exception&) {
          bad_line(path, lineno, "header coefficients are malformed");
        }
      }
      have_header = true;
      continue;
    }

    if (j.contains("type") && j["type"] == "summary") {
      if (!j.contains("episode") || !j.contains("reward_total")) {
        bad_line(path, lineno, "summary record is missing fields");
      }
      ++stats.summaries;
      continue;
    }

    int64_t episode;
    int round;
    std::vector<double> ivc;
    std::vector<int> avc;
    double r_orig, r_div, r_inf, r_total, pred_dist;
    try {
      episode = j.at("episode").get<int64_t>();
      round = j.at("round").get<int>();
      (void)j.at("q").get<std::vector<int>>();
      (void)j.at("a").get<int>();
      ivc = j.at("i_vc").get<std::vector<double>>();
      avc = j.at("a_vc").get<std::vector<int>>();
      r_orig = j.at("reward").at("orig").get<double>();
      r_div = j.at("reward").at("div").get<double>();
      r_inf = j.at("reward").at("inf").get<double>();
      r_total = j.at("reward").at("total").get<double>();
      pred_dist = j.at("pred_dist").get<double>();
    } catch (const json::exception& e) {
      bad_line(path, lineno, std::string("round record is malformed: ") + e.what());
    }

    if (episode != cur_episode) {
      if (round != 1) bad_line(path, lineno, "episode must start at round 1");
      cur_episode = episode;
      ++stats.episodes;
      prev_avc.clear();
    } else if (round != prev_round + 1) {
      bad_line(path, lineno, "rounds must increase by 1 within an episode");
    }
    prev_round = round;

    if (ivc.size() < 2 || ivc.size() != avc.size()) {
      bad_line(path, lineno, "i_vc and a_vc sizes are inconsistent");
    }
    double sum = 0.0;
    for (double w : ivc) {
      if (!(w >= 0.0 && w <= 1.0)) bad_line(path, lineno, "i_vc entry outside [0, 1]");
      sum += w;
    }
    if (std::abs(sum - 1.0) > kSimplexTol) {
      bad_line(path, lineno, "i_vc does not sum to 1");
    }
    for (size_t i = 0; i < avc.size(); ++i) {
      if (avc[i] != 0 && avc[i] != 1) bad_line(path, lineno, "a_vc entry not binary");
      if (!prev_avc.empty() && avc[i] < prev_avc[i]) {
        bad_line(path, lineno, "a_vc lost coverage bit " + std::to_string(i));
      }
    }
    prev_avc = avc;

    if (r_inf != 0.0 && r_inf != 1.0) bad_line(path, lineno, "inf reward not binary");
    if (r_div < 0.0) bad_line(path, lineno, "div reward negative");
    if (pred_dist < 0.0) bad_line(path, lineno, "pred_dist negative");
    double recomputed = a_orig * r_orig + a_div * r_div + a_inf * r_inf;
    if (std::abs(recomputed - r_total) > kRewardRecomputeTol) {
      bad_line(path, lineno, "reward total does not recompute from components");
    }
    ++stats.rounds;
  }
  if (!have_header) throw DataError("trace: '" + path.string() + "' is empty");
  return stats;
}

}  // namespace ecsrl
