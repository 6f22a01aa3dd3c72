#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sttk/corpus.hpp"

namespace sttk {

// Hidden-chain sampler with a controllable lexical gap between a source and
// a target domain: shift_rate is the fraction of source word types renamed
// to target-only synonyms. Transitions are never shifted, so the task
// structure transfers across domains.
struct ShiftSpec {
  TaskKind task = TaskKind::sequence;
  std::vector<std::string> labels;  // one hidden state per label
  size_t vocab_size = 150;
  std::vector<double> initial;                  // over states
  std::vector<std::vector<double>> transition;  // row per state
  std::vector<std::vector<double>> emission;    // row per state, over vocab
  double shift_rate = 0.0;
  size_t min_length = 5;  // uniform sequence-length distribution
  size_t max_length = 12;
  uint64_t seed = 0;

  void validate() const;
};

struct SynthOutput {
  Corpus source_labeled;
  Corpus target_unlabeled;
  Corpus target_test;
};

// Band-structured emission rows. The first quarter of the vocabulary is a
// shared function-word slice every state emits with identical Zipf weights
// carrying `shared_mass` probability; the rest is split into per-state bands
// with Zipf-decaying weights. Shared words force the learner to lean on
// context, which is what lets label knowledge transfer across the shift.
std::vector<std::vector<double>> banded_emissions(size_t num_states,
                                                  size_t vocab_size,
                                                  double shared_mass,
                                                  double zipf);

// Stable token string for a word type. Source tokens spell with a-m,
// target-only replacements with n-z, so a renamed type shares no prefix,
// suffix or character n-gram with any source word.
std::string token_name(size_t type, bool target_only);

// Samples the three corpora from the shared hidden chain. Labels are
// attached to the source and target-test corpora only. For classification
// specs the example class is the majority hidden state (ties toward the
// lower state index).
SynthOutput generate(const ShiftSpec& spec, size_t n_source_labeled,
                     size_t n_target_unlabeled, size_t n_target_test);

// Key-value spec file; see data/specs for the shipped examples.
ShiftSpec load_shift_spec(const std::string& path);

}  // namespace sttk
