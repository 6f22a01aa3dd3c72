#include "sttk/experiment.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sttk/errors.hpp"

namespace sttk {

namespace {

std::string trim(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// %.17g keeps doubles bit-exact across a save/load round trip.
std::string fmt_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

bool parse_bool(const std::string& value, const std::string& where) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("expected a boolean at " + where);
}

}  // namespace

TrainOptions ExperimentConfig::train_options() const {
  TrainOptions opt;
  opt.epochs = epochs;
  opt.learning_rate = learning_rate;
  opt.l2 = l2;
  opt.batch_size = batch_size;
  opt.seed = seed;
  return opt;
}

SelfTrainConfig ExperimentConfig::selftrain_config() const {
  SelfTrainConfig cfg;
  if (policy == "threshold") {
    cfg.policy = SelectionPolicy::threshold;
  } else if (policy == "top_k") {
    cfg.policy = SelectionPolicy::top_k;
  } else if (policy == "class_balanced") {
    cfg.policy = SelectionPolicy::class_balanced;
  } else {
    throw ConfigError("unknown selection policy '" + policy + "'");
  }
  cfg.tau = tau;
  cfg.top_s = s;
  cfg.epochs_per_iteration = k_epochs;
  cfg.max_iterations = max_iterations;
  cfg.patience = patience;
  cfg.warm_start = warm_start;
  cfg.seed = seed;
  cfg.learner = train_options();
  return cfg;
}

std::string serialize_experiment_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "task = "
      << (c.task == TaskKind::sequence ? "sequence" : "classification")
      << "\n";
  out << "seed = " << c.seed << "\n";
  out << "repair = " << (c.repair ? "true" : "false") << "\n";
  out << "\n[paths]\n";
  out << "train = " << c.train << "\n";
  out << "dev = " << c.dev << "\n";
  out << "test = " << c.test << "\n";
  out << "unlabeled = " << c.unlabeled << "\n";
  out << "scheme = " << c.scheme << "\n";
  out << "out = " << c.out << "\n";
  out << "\n[learner]\n";
  out << "epochs = " << c.epochs << "\n";
  out << "learning_rate = " << fmt_double(c.learning_rate) << "\n";
  out << "l2 = " << fmt_double(c.l2) << "\n";
  out << "batch_size = " << c.batch_size << "\n";
  out << "\n[selftrain]\n";
  out << "policy = " << c.policy << "\n";
  out << "tau = " << fmt_double(c.tau) << "\n";
  out << "s = " << c.s << "\n";
  out << "k_epochs = " << c.k_epochs << "\n";
  out << "max_iterations = " << c.max_iterations << "\n";
  out << "patience = " << c.patience << "\n";
  out << "warm_start = " << (c.warm_start ? "true" : "false") << "\n";
  return out.str();
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);

  ExperimentConfig config;
  std::string section;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    auto where = path + ":" + std::to_string(line_no);

    if (text.front() == '[') {
      if (text.back() != ']')
        throw ConfigError("malformed section header at " + where);
      section = text.substr(1, text.size() - 2);
      continue;
    }
    size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected `key = value` at " + where);
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    std::string qualified = section + "." + key;

    try {
      if (qualified == "experiment.task") {
        if (value == "sequence") {
          config.task = TaskKind::sequence;
        } else if (value == "classification") {
          config.task = TaskKind::classification;
        } else {
          throw ConfigError("unknown task '" + value + "' at " + where);
        }
      } else if (qualified == "experiment.seed") {
        config.seed = std::stoull(value);
      } else if (qualified == "experiment.repair") {
        config.repair = parse_bool(value, where);
      } else if (qualified == "paths.train") {
        config.train = value;
      } else if (qualified == "paths.dev") {
        config.dev = value;
      } else if (qualified == "paths.test") {
        config.test = value;
      } else if (qualified == "paths.unlabeled") {
        config.unlabeled = value;
      } else if (qualified == "paths.scheme") {
        config.scheme = value;
      } else if (qualified == "paths.out") {
        config.out = value;
      } else if (qualified == "learner.epochs") {
        config.epochs = std::stoi(value);
      } else if (qualified == "learner.learning_rate") {
        config.learning_rate = std::stod(value);
      } else if (qualified == "learner.l2") {
        config.l2 = std::stod(value);
      } else if (qualified == "learner.batch_size") {
        config.batch_size = std::stoi(value);
      } else if (qualified == "selftrain.policy") {
        config.policy = value;
      } else if (qualified == "selftrain.tau") {
        config.tau = std::stod(value);
      } else if (qualified == "selftrain.s") {
        config.s = std::stoi(value);
      } else if (qualified == "selftrain.k_epochs") {
        config.k_epochs = std::stoi(value);
      } else if (qualified == "selftrain.max_iterations") {
        config.max_iterations = std::stoi(value);
      } else if (qualified == "selftrain.patience") {
        config.patience = std::stoi(value);
      } else if (qualified == "selftrain.warm_start") {
        config.warm_start = parse_bool(value, where);
      } else {
        throw ConfigError("unknown config key '" + qualified + "' at " +
                          where);
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad value '" + value + "' at " + where);
    } catch (const std::out_of_range&) {
      throw ConfigError("value out of range at " + where);
    }
  }
  return config;
}

void save_experiment_config(const ExperimentConfig& config,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << serialize_experiment_config(config);
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = serialize_experiment_config(config);
  uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

}  // namespace sttk
