#include "mgtd/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "mgtd/rng.hpp"

namespace mgtd {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: key \"" + key +
                             "\" needs a number, got \"" + value + "\"");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::runtime_error("config: key \"" + key +
                             "\" needs an integer, got \"" + value + "\"");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::runtime_error("config: key \"" + key +
                           "\" needs true/false, got \"" + value + "\"");
}

}  // namespace

std::string to_string(Monitor m) {
  return m == Monitor::val_accuracy ? "val_accuracy" : "val_loss";
}

Monitor monitor_from_string(const std::string& s) {
  if (s == "val_accuracy") return Monitor::val_accuracy;
  if (s == "val_loss") return Monitor::val_loss;
  throw std::runtime_error("unknown monitor \"" + s +
                           "\" (expected val_accuracy or val_loss)");
}

ModelConfig TrainConfig::resolved_model() const {
  ModelConfig m = model;
  m.encoder.max_tokens = max_tokens;
  m.head.dropout_p = dropout_p;
  return m;
}

void validate(const TrainConfig& cfg) {
  auto fail = [](const std::string& msg) {
    throw std::runtime_error("config: " + msg);
  };
  if (!(cfg.learning_rate >= 0.0)) fail("learning_rate must be >= 0");
  if (!(cfg.weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (cfg.micro_batch < 1) fail("micro_batch must be >= 1");
  if (cfg.accumulation_steps < 1) fail("accumulation_steps must be >= 1");
  if (cfg.patience < 1) fail("patience must be >= 1");
  if (cfg.max_epochs < 1) fail("max_epochs must be >= 1");
  if (cfg.max_tokens < 1) fail("max_tokens must be >= 1");
  if (!(cfg.dropout_p >= 0.0 && cfg.dropout_p < 1.0)) {
    fail("dropout_p must be in [0, 1)");
  }
  if (!(cfg.weights.alpha >= 0.0 && cfg.weights.beta >= 0.0 &&
        cfg.weights.gamma >= 0.0)) {
    fail("loss weights must be >= 0");
  }
  if (!(cfg.mode.margin >= 0.0 && cfg.mode.margin <= 1.0)) {
    fail("margin must be in [0, 1]");
  }
  if (cfg.model.encoder.dim < 1) fail("embed_dim must be >= 1");
  if (cfg.model.encoder.vocab_buckets < 1) fail("vocab_buckets must be >= 1");
  if (cfg.model.head.hidden_dim < 1) fail("hidden_dim must be >= 1");
}

TrainConfig parse_config_text(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": empty key");
    }
    if (!seen.insert(key).second) {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": duplicate key \"" + key + "\"");
    }

    if (key == "learning_rate") {
      cfg.learning_rate = parse_double(key, value);
    } else if (key == "weight_decay") {
      cfg.weight_decay = parse_double(key, value);
    } else if (key == "micro_batch") {
      cfg.micro_batch = static_cast<int>(parse_int(key, value));
    } else if (key == "accumulation_steps") {
      cfg.accumulation_steps = static_cast<int>(parse_int(key, value));
    } else if (key == "patience") {
      cfg.patience = static_cast<int>(parse_int(key, value));
    } else if (key == "max_epochs") {
      cfg.max_epochs = static_cast<int>(parse_int(key, value));
    } else if (key == "max_tokens") {
      cfg.max_tokens = static_cast<int>(parse_int(key, value));
    } else if (key == "dropout_p") {
      cfg.dropout_p = parse_double(key, value);
    } else if (key == "alpha") {
      cfg.weights.alpha = parse_double(key, value);
    } else if (key == "beta") {
      cfg.weights.beta = parse_double(key, value);
    } else if (key == "gamma") {
      cfg.weights.gamma = parse_double(key, value);
    } else if (key == "contrastive_mode") {
      cfg.mode.kind = contrastive_kind_from_string(value);
    } else if (key == "margin") {
      cfg.mode.margin = parse_double(key, value);
    } else if (key == "swap_cls_targets") {
      cfg.swap_cls_targets = parse_bool(key, value);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "monitor") {
      cfg.monitor = monitor_from_string(value);
    } else if (key == "embed_dim") {
      cfg.model.encoder.dim = static_cast<int>(parse_int(key, value));
    } else if (key == "hidden_dim") {
      cfg.model.head.hidden_dim = static_cast<int>(parse_int(key, value));
    } else if (key == "vocab_buckets") {
      cfg.model.encoder.vocab_buckets = static_cast<int>(parse_int(key, value));
    } else if (key == "encoder") {
      if (value == "reference") {
        cfg.model.encoder.kind = EncoderKind::reference;
      } else if (value == "external") {
        cfg.model.encoder.kind = EncoderKind::external;
      } else {
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": encoder must be reference or external");
      }
    } else {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": unknown key \"" + key + "\"");
    }
  }

  validate(cfg);
  return cfg;
}

TrainConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string config_to_json(const TrainConfig& cfg) {
  json j;
  j["learning_rate"] = cfg.learning_rate;
  j["weight_decay"] = cfg.weight_decay;
  j["micro_batch"] = cfg.micro_batch;
  j["accumulation_steps"] = cfg.accumulation_steps;
  j["patience"] = cfg.patience;
  j["max_epochs"] = cfg.max_epochs;
  j["max_tokens"] = cfg.max_tokens;
  j["dropout_p"] = cfg.dropout_p;
  j["alpha"] = cfg.weights.alpha;
  j["beta"] = cfg.weights.beta;
  j["gamma"] = cfg.weights.gamma;
  j["contrastive_mode"] = to_string(cfg.mode.kind);
  j["margin"] = cfg.mode.margin;
  j["swap_cls_targets"] = cfg.swap_cls_targets;
  j["seed"] = cfg.seed;
  j["monitor"] = to_string(cfg.monitor);
  j["embed_dim"] = cfg.model.encoder.dim;
  j["hidden_dim"] = cfg.model.head.hidden_dim;
  j["vocab_buckets"] = cfg.model.encoder.vocab_buckets;
  j["encoder"] =
      cfg.model.encoder.kind == EncoderKind::reference ? "reference" : "external";
  return j.dump();
}

TrainConfig config_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  TrainConfig cfg;
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.weight_decay = j.at("weight_decay").get<double>();
  cfg.micro_batch = j.at("micro_batch").get<int>();
  cfg.accumulation_steps = j.at("accumulation_steps").get<int>();
  cfg.patience = j.at("patience").get<int>();
  cfg.max_epochs = j.at("max_epochs").get<int>();
  cfg.max_tokens = j.at("max_tokens").get<int>();
  cfg.dropout_p = j.at("dropout_p").get<double>();
  cfg.weights.alpha = j.at("alpha").get<double>();
  cfg.weights.beta = j.at("beta").get<double>();
  cfg.weights.gamma = j.at("gamma").get<double>();
  cfg.mode.kind = contrastive_kind_from_string(j.at("contrastive_mode").get<std::string>());
  cfg.mode.margin = j.at("margin").get<double>();
  cfg.swap_cls_targets = j.at("swap_cls_targets").get<bool>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.monitor = monitor_from_string(j.at("monitor").get<std::string>());
  cfg.model.encoder.dim = j.at("embed_dim").get<int>();
  cfg.model.head.hidden_dim = j.at("hidden_dim").get<int>();
  cfg.model.encoder.vocab_buckets = j.at("vocab_buckets").get<int>();
  cfg.model.encoder.kind = j.at("encoder").get<std::string>() == "reference"
                               ? EncoderKind::reference
                               : EncoderKind::external;
  validate(cfg);
  return cfg;
}

std::string config_hash(const TrainConfig& cfg) {
  const std::uint64_t h = fnv1a64(config_to_json(cfg));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace mgtd
