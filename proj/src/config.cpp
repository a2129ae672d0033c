#include "ecsrl/config.hpp"

#include <fstream>
#include <sstream>

#include "ecsrl/errors.hpp"

namespace ecsrl {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    int out = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw DataError("config: key '" + key + "' needs an integer, got '" + v + "'");
  }
}

uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    uint64_t out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw DataError("config: key '" + key + "' needs an unsigned integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw DataError("config: key '" + key + "' needs a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw DataError("config: key '" + key + "' needs true/false, got '" + v + "'");
}

}  // namespace

Variant variant_from_string(const std::string& name) {
  if (name == "rl") return Variant::kRl;
  if (name == "rl-dr") return Variant::kRlDr;
  if (name == "rl-ir") return Variant::kRlIr;
  if (name == "rl-dr-ir") return Variant::kRlDrIr;
  throw UsageError("unknown variant '" + name + "' (rl, rl-dr, rl-ir, rl-dr-ir)");
}

std::string variant_to_string(Variant v) {
  switch (v) {
    case Variant::kRl: return "rl";
    case Variant::kRlDr: return "rl-dr";
    case Variant::kRlIr: return "rl-ir";
    case Variant::kRlDrIr: return "rl-dr-ir";
  }
  throw UsageError("variant_to_string: bad enum value");
}

RewardCoefficients apply_variant(const RewardCoefficients& base, Variant v) {
  RewardCoefficients c = base;
  switch (v) {
    case Variant::kRl:
      c.div = 0.0;
      c.inf = 0.0;
      break;
    case Variant::kRlDr:
      c.inf = 0.0;
      break;
    case Variant::kRlIr:
      c.div = 0.0;
      break;
    case Variant::kRlDrIr:
      break;
  }
  return c;
}

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "seed") {
    cfg.seed = to_u64(key, value);
  } else if (key == "variant") {
    try {
      cfg.variant = variant_from_string(value);
    } catch (const UsageError& e) {
      throw DataError(std::string("config: ") + e.what());
    }
  } else if (key == "verbosity") {
    if (value != "summary" && value != "per-round") {
      throw DataError("config: verbosity must be 'summary' or 'per-round'");
    }
    cfg.verbosity = value;
  } else if (key == "num_objects") {
    cfg.world.num_objects = to_int(key, value);
  } else if (key == "num_attributes") {
    cfg.world.num_attributes = to_int(key, value);
  } else if (key == "num_values") {
    cfg.world.num_values = to_int(key, value);
  } else if (key == "inactive_slots") {
    cfg.world.inactive_slots = to_bool(key, value);
  } else if (key == "rounds") {
    cfg.train.rounds = to_int(key, value);
  } else if (key == "hidden_dim") {
    cfg.hidden_dim = to_int(key, value);
  } else if (key == "init_scale") {
    cfg.init_scale = to_double(key, value);
  } else if (key == "epochs") {
    cfg.train.epochs = to_int(key, value);
  } else if (key == "batch_size") {
    cfg.train.batch_size = to_int(key, value);
  } else if (key == "episodes_per_epoch") {
    cfg.train.episodes_per_epoch = to_int(key, value);
  } else if (key == "lr_q") {
    cfg.train.lr_q = to_double(key, value);
  } else if (key == "lr_q_floor") {
    cfg.train.lr_q_floor = to_double(key, value);
  } else if (key == "lr_a") {
    cfg.train.lr_a = to_double(key, value);
  } else if (key == "lr_a_floor") {
    cfg.train.lr_a_floor = to_double(key, value);
  } else if (key == "clip_bound") {
    cfg.train.clip_bound = to_double(key, value);
  } else if (key == "gamma") {
    cfg.train.gamma = to_double(key, value);
  } else if (key == "alpha_orig") {
    cfg.train.coeff.orig = to_double(key, value);
  } else if (key == "alpha_div") {
    cfg.train.coeff.div = to_double(key, value);
  } else if (key == "alpha_inf") {
    cfg.train.coeff.inf = to_double(key, value);
  } else if (key == "k_start") {
    cfg.train.k_start = to_int(key, value);
  } else if (key == "k_end") {
    cfg.train.k_end = to_int(key, value);
  } else if (key == "k_anneal_epochs") {
    cfg.train.k_anneal_epochs = to_int(key, value);
  } else if (key == "baseline_decay") {
    cfg.train.baseline_decay = to_double(key, value);
  } else if (key == "regression_weight") {
    cfg.train.regression_weight = to_double(key, value);
  } else if (key == "future_attribution") {
    cfg.train.future_attribution = to_bool(key, value);
  } else if (key == "threads") {
    cfg.train.threads = to_int(key, value);
  } else if (key == "pretrain_epochs") {
    cfg.pretrain.epochs = to_int(key, value);
  } else if (key == "pretrain_batch_size") {
    cfg.pretrain.batch_size = to_int(key, value);
  } else if (key == "pretrain_lr_q") {
    cfg.pretrain.lr_q = to_double(key, value);
  } else if (key == "pretrain_lr_a") {
    cfg.pretrain.lr_a = to_double(key, value);
  } else if (key == "corpus_worlds") {
    cfg.corpus_worlds = to_int(key, value);
  } else if (key == "eval_episodes") {
    cfg.eval_episodes = to_int(key, value);
  } else if (key == "pool_size") {
    cfg.pool_size = to_int(key, value);
  } else {
    throw DataError("config: unknown key '" + key + "'");
  }
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot open '" + path.string() + "'");
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw DataError("config: " + path.string() + ":" + std::to_string(lineno) +
                      ": expected 'key = value'");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw DataError("config: " + path.string() + ":" + std::to_string(lineno) +
                      ": expected 'key = value'");
    }
    apply_config_line(cfg, key, value);
  }
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  auto fail = [](const std::string& msg) { throw DataError("config: " + msg); };
  if (cfg.world.num_objects < 2 || cfg.world.num_objects > 16) {
    fail("num_objects must lie in [2, 16]");
  }
  if (cfg.world.num_attributes < 1 || cfg.world.num_attributes > 4) {
    fail("num_attributes must lie in [1, 4]");
  }
  if (cfg.world.num_values < 2 || cfg.world.num_values > 8) {
    fail("num_values must lie in [2, 8]");
  }
  if (cfg.hidden_dim < 1) fail("hidden_dim must be positive");
  if (!(cfg.init_scale > 0.0)) fail("init_scale must be positive");
  if (t.rounds < 1) fail("rounds must be positive");
  if (t.epochs < 0) fail("epochs must be non-negative");
  if (t.batch_size < 1) fail("batch_size must be positive");
  if (t.episodes_per_epoch < 1) fail("episodes_per_epoch must be positive");
  if (!(t.lr_q > 0.0) || !(t.lr_a > 0.0)) fail("learning rates must be positive");
  if (!(t.lr_q_floor > 0.0) || !(t.lr_a_floor > 0.0)) fail("lr floors must be positive");
  if (!(t.clip_bound > 0.0)) fail("clip_bound must be positive");
  if (!(t.gamma > 0.0 && t.gamma < 1.0)) fail("gamma must lie strictly inside (0, 1)");
  if (t.coeff.orig < 0.0 || t.coeff.div < 0.0 || t.coeff.inf < 0.0) {
    fail("reward coefficients must be non-negative");
  }
  if (t.k_end < 0 || t.k_start < t.k_end) fail("need k_start >= k_end >= 0");
  if (t.k_start > t.rounds) fail("k_start cannot exceed rounds");
  if (t.k_anneal_epochs < 1) fail("k_anneal_epochs must be at least 1");
  if (!(t.baseline_decay >= 0.0 && t.baseline_decay < 1.0)) {
    fail("baseline_decay must lie in [0, 1)");
  }
  if (t.regression_weight < 0.0 || t.regression_weight >= 2.0) {
    fail("regression_weight must be in [0, 2)");
  }
  if (t.threads < 1) fail("threads must be positive");
  if (cfg.pretrain.epochs < 0) fail("pretrain_epochs must be non-negative");
  if (cfg.pretrain.batch_size < 1) fail("pretrain_batch_size must be positive");
  if (!(cfg.pretrain.lr_q > 0.0) || !(cfg.pretrain.lr_a > 0.0)) {
    fail("pretrain learning rates must be positive");
  }
  if (cfg.corpus_worlds < 1) fail("corpus_worlds must be positive");
  if (cfg.eval_episodes < 2) fail("eval_episodes must be at least 2");
  if (cfg.pool_size < 2) fail("pool_size must be at least 2");
  if (cfg.pool_size > cfg.eval_episodes) fail("pool_size cannot exceed eval_episodes");
}

nlohmann::ordered_json config_echo(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["variant"] = variant_to_string(cfg.variant);
  j["verbosity"] = cfg.verbosity;
  j["num_objects"] = cfg.world.num_objects;
  j["num_attributes"] = cfg.world.num_attributes;
  j["num_values"] = cfg.world.num_values;
  j["inactive_slots"] = cfg.world.inactive_slots;
  j["rounds"] = cfg.train.rounds;
  j["hidden_dim"] = cfg.hidden_dim;
  j["init_scale"] = cfg.init_scale;
  j["epochs"] = cfg.train.epochs;
  j["batch_size"] = cfg.train.batch_size;
  j["episodes_per_epoch"] = cfg.train.episodes_per_epoch;
  j["lr_q"] = cfg.train.lr_q;
  j["lr_q_floor"] = cfg.train.lr_q_floor;
  j["lr_a"] = cfg.train.lr_a;
  j["lr_a_floor"] = cfg.train.lr_a_floor;
  j["clip_bound"] = cfg.train.clip_bound;
  j["gamma"] = cfg.train.gamma;
  j["alpha_orig"] = cfg.train.coeff.orig;
  j["alpha_div"] = cfg.train.coeff.div;
  j["alpha_inf"] = cfg.train.coeff.inf;
  j["k_start"] = cfg.train.k_start;
  j["k_end"] = cfg.train.k_end;
  j["k_anneal_epochs"] = cfg.train.k_anneal_epochs;
  j["baseline_decay"] = cfg.train.baseline_decay;
  j["regression_weight"] = cfg.train.regression_weight;
  j["future_attribution"] = cfg.train.future_attribution;
  j["threads"] = cfg.train.threads;
  j["pretrain_epochs"] = cfg.pretrain.epochs;
  j["pretrain_batch_size"] = cfg.pretrain.batch_size;
  j["pretrain_lr_q"] = cfg.pretrain.lr_q;
  j["pretrain_lr_a"] = cfg.pretrain.lr_a;
  j["corpus_worlds"] = cfg.corpus_worlds;
  j["eval_episodes"] = cfg.eval_episodes;
  j["pool_size"] = cfg.pool_size;
  return j;
}

std::string canonical_config(const RunConfig& cfg) { return config_echo(cfg).dump(); }

uint64_t fnv1a(const std::string& text) {
  uint64_t hash = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  return hash;
}

uint64_t model_hash(const RunConfig& cfg) {
  std::ostringstream os;
  os << cfg.world.num_objects << '|' << cfg.world.num_attributes << '|'
     << cfg.world.num_values << '|' << cfg.world.inactive_slots << '|'
     << cfg.train.rounds << '|' << cfg.hidden_dim;
  return fnv1a(os.str());
}

}  // namespace ecsrl
