#include "sttk/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sttk/errors.hpp"
#include "sttk/rng.hpp"

namespace sttk {

namespace {

void check_stochastic(const std::vector<double>& row, const std::string& what) {
  if (row.empty()) throw ConfigError(what + " is empty");
  double total = 0.0;
  for (double p : row) {
    if (p < 0.0 || !std::isfinite(p))
      throw ConfigError(what + " has a negative or non-finite entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw ConfigError(what + " does not sum to 1");
}

struct SampledSequence {
  std::vector<std::string> tokens;
  std::vector<size_t> states;
};

SampledSequence sample_sequence(const ShiftSpec& spec,
                                const std::vector<bool>& shifted,
                                bool target_domain, Rng& rng) {
  SampledSequence seq;
  size_t len = spec.min_length +
               rng.below(spec.max_length - spec.min_length + 1);
  seq.states.reserve(len);
  seq.tokens.reserve(len);
  for (size_t j = 0; j < len; ++j) {
    size_t state = j == 0 ? rng.discrete(spec.initial)
                          : rng.discrete(spec.transition[seq.states[j - 1]]);
    seq.states.push_back(state);
    size_t word = rng.discrete(spec.emission[state]);
    bool renamed = target_domain && shifted[word];
    seq.tokens.push_back(token_name(word, renamed));
  }
  return seq;
}

std::vector<std::string> sequence_labels(const ShiftSpec& spec,
                                         const SampledSequence& seq) {
  std::vector<std::string> labels;
  labels.reserve(seq.states.size());
  for (size_t s : seq.states) labels.push_back(spec.labels[s]);
  return labels;
}

std::string majority_class(const ShiftSpec& spec,
                           const SampledSequence& seq) {
  std::vector<size_t> counts(spec.labels.size(), 0);
  for (size_t s : seq.states) ++counts[s];
  size_t best = 0;
  for (size_t s = 1; s < counts.size(); ++s) {
    if (counts[s] > counts[best]) best = s;  // ties keep the lower index
  }
  return spec.labels[best];
}

Corpus make_corpus(const ShiftSpec& spec, size_t count, bool target_domain,
                   bool with_labels, const std::vector<bool>& shifted,
                   Rng& rng) {
  Corpus corpus;
  corpus.task_kind = spec.task;
  corpus.label_set = spec.labels;
  for (size_t i = 0; i < count; ++i) {
    Rng stream = rng.fork();
    auto seq = sample_sequence(spec, shifted, target_domain, stream);
    Example example;
    example.id = static_cast<int>(i);
    example.tokens = std::move(seq.tokens);
    if (with_labels) {
      if (spec.task == TaskKind::sequence) {
        example.labels = sequence_labels(spec, seq);
      } else {
        example.labels.push_back(majority_class(spec, seq));
      }
    }
    corpus.examples.push_back(std::move(example));
  }
  return corpus;
}

}  // namespace

void ShiftSpec::validate() const {
  if (labels.size() < 2) throw ConfigError("spec needs at least two labels");
  if (vocab_size < labels.size())
    throw ConfigError("vocabulary smaller than the label count");
  if (shift_rate < 0.0 || shift_rate > 1.0)
    throw ConfigError("shift_rate must be in [0, 1]");
  if (min_length < 1 || max_length < min_length)
    throw ConfigError("bad sequence-length range");
  if (initial.size() != labels.size())
    throw ConfigError("initial distribution size mismatch");
  check_stochastic(initial, "initial distribution");
  if (transition.size() != labels.size())
    throw ConfigError("transition matrix size mismatch");
  for (size_t s = 0; s < transition.size(); ++s) {
    if (transition[s].size() != labels.size())
      throw ConfigError("transition row size mismatch");
    check_stochastic(transition[s], "transition row " + labels[s]);
  }
  if (emission.size() != labels.size())
    throw ConfigError("emission matrix size mismatch");
  for (size_t s = 0; s < emission.size(); ++s) {
    if (emission[s].size() != vocab_size)
      throw ConfigError("emission row size mismatch");
    check_stochastic(emission[s], "emission row " + labels[s]);
  }
}

std::vector<std::vector<double>> banded_emissions(size_t num_states,
                                                  size_t vocab_size,
                                                  double shared_mass,
                                                  double zipf) {
  if (num_states == 0 || vocab_size < 4 * num_states)
    throw ConfigError("bad emission band shape");
  if (shared_mass < 0.0 || shared_mass >= 1.0)
    throw ConfigError("emission shared mass must be in [0, 1)");

  const size_t shared = vocab_size / 4;
  const size_t banded = vocab_size - shared;
  auto zipf_weight = [zipf](size_t rank) {
    return 1.0 / std::pow(static_cast<double>(rank + 1), zipf);
  };
  double shared_total = 0.0;
  for (size_t v = 0; v < shared; ++v) shared_total += zipf_weight(v);

  std::vector<std::vector<double>> rows(num_states,
                                        std::vector<double>(vocab_size, 0.0));
  for (size_t s = 0; s < num_states; ++s) {
    for (size_t v = 0; v < shared; ++v) {
      rows[s][v] = shared_mass * zipf_weight(v) / shared_total;
    }
    size_t begin = shared + s * banded / num_states;
    size_t end = shared + (s + 1) * banded / num_states;
    double band_total = 0.0;
    for (size_t v = begin; v < end; ++v) band_total += zipf_weight(v - begin);
    for (size_t v = begin; v < end; ++v) {
      rows[s][v] = (1.0 - shared_mass) * zipf_weight(v - begin) / band_total;
    }
  }
  return rows;
}

std::string token_name(size_t type, bool target_only) {
  const char base = target_only ? 'n' : 'a';
  std::string name(4, base);
  for (int k = 3; k >= 0; --k) {
    name[k] = static_cast<char>(base + type % 13);
    type /= 13;
  }
  return name;
}

SynthOutput generate(const ShiftSpec& spec, size_t n_source_labeled,
                     size_t n_target_unlabeled, size_t n_target_test) {
  spec.validate();
  if (n_source_labeled < 1 || n_target_unlabeled < 1 || n_target_test < 1)
    throw ConfigError("corpus sizes must be >= 1");

  Rng rng(spec.seed);

  // Frequency-balanced renaming: the vocabulary is rank-ordered within each
  // slice, so stepping a Weyl sequence over the indices spreads the shifted
  // mass evenly instead of letting one seed rename all the band heads.
  // Exactly one draw is consumed, so runs differing only in shift_rate see
  // identical chains; only the renaming changes.
  double phase = rng.real01();
  std::vector<bool> shifted(spec.vocab_size, false);
  for (size_t v = 0; v < spec.vocab_size; ++v) {
    double pos = std::fmod(phase + static_cast<double>(v) * spec.shift_rate, 1.0);
    shifted[v] = pos < spec.shift_rate;
  }

  SynthOutput out;
  out.source_labeled =
      make_corpus(spec, n_source_labeled, false, true, shifted, rng);
  out.target_unlabeled =
      make_corpus(spec, n_target_unlabeled, true, false, shifted, rng);
  out.target_test =
      make_corpus(spec, n_target_test, true, true, shifted, rng);
  return out;
}

ShiftSpec load_shift_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file: " + path);

  ShiftSpec spec;
  double shared_mass = 0.3;
  double zipf = 1.0;
  std::map<std::string, std::vector<double>> trans_rows;
  std::vector<double> initial;

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    auto where = path + ":" + std::to_string(line_no);

    if (key == "task") {
      std::string value;
      ls >> value;
      if (value == "sequence") {
        spec.task = TaskKind::sequence;
      } else if (value == "classification") {
        spec.task = TaskKind::classification;
      } else {
        throw ConfigError("unknown task '" + value + "' at " + where);
      }
    } else if (key == "labels") {
      std::string label;
      while (ls >> label) spec.labels.push_back(label);
    } else if (key == "vocab_size") {
      ls >> spec.vocab_size;
    } else if (key == "length") {
      ls >> spec.min_length >> spec.max_length;
    } else if (key == "shift_rate") {
      ls >> spec.shift_rate;
    } else if (key == "seed") {
      ls >> spec.seed;
    } else if (key == "emission_shared") {
      ls >> shared_mass;
    } else if (key == "emission_zipf") {
      ls >> zipf;
    } else if (key == "initial") {
      double p;
      while (ls >> p) initial.push_back(p);
    } else if (key == "trans") {
      std::string from;
      ls >> from;
      std::vector<double> row;
      double p;
      while (ls >> p) row.push_back(p);
      trans_rows[from] = row;
    } else {
      throw ConfigError("unknown spec key '" + key + "' at " + where);
    }
  }

  if (spec.labels.empty()) throw ConfigError("spec has no labels: " + path);
  spec.initial = initial;
  spec.transition.clear();
  for (const auto& label : spec.labels) {
    auto it = trans_rows.find(label);
    if (it == trans_rows.end())
      throw ConfigError("spec is missing a transition row for " + label);
    spec.transition.push_back(it->second);
  }
  spec.emission =
      banded_emissions(spec.labels.size(), spec.vocab_size, shared_mass, zipf);
  spec.validate();
  return spec;
}

}  // namespace sttk
