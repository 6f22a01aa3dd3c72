#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sttk/corpus.hpp"
#include "sttk/crf.hpp"
#include "sttk/maxent.hpp"

namespace sttk {

enum class SelectionPolicy { threshold, top_k, class_balanced };
enum class LearnerKind { crf, maxent };

struct SelfTrainConfig {
  SelectionPolicy policy = SelectionPolicy::threshold;
  double tau = 0.9;  // threshold policy, in (0,1]
  int top_s = 100;   // top_k / class_balanced budget S
  int epochs_per_iteration = 5;
  int max_iterations = 50;
  int patience = 10;  // consecutive non-improving iterations; 0 disables
  bool warm_start = true;
  TrainOptions learner;  // epochs field is ignored; K above is used
  uint64_t seed = 0;
};

// Example id with its confidence: min per-token marginal for sequences, top
// class probability for classification.
struct ScoredExample {
  int id = 0;
  double confidence = 0.0;
};

struct ClassScoredExample {
  int id = 0;
  std::string predicted_class;
  double confidence = 0.0;
};

// Ids whose confidence reaches tau, ascending.
std::vector<int> select_by_threshold(const std::vector<ScoredExample>& scored,
                                     double tau);

// The s highest-confidence ids (ties toward the lower id), ascending. All of
// them when fewer than s exist.
std::vector<int> select_top_k(const std::vector<ScoredExample>& scored, int s);

// Per predicted class, the floor(s/num_classes) highest-confidence ids (all
// available when a class has fewer); union returned ascending.
std::vector<int> select_class_balanced(
    const std::vector<ClassScoredExample>& scored, int s, int num_classes);

struct IterationRecord {
  int iteration = 0;
  size_t labeled_size = 0;    // |L| after this iteration's move
  size_t unlabeled_size = 0;  // |U| after this iteration's move
  size_t selected = 0;
  double dev_metric = 0.0;
  double seconds = 0.0;
};

// L/U after an iteration; unlabeled ids are offset past the gold ids so the
// two pools share one id space.
struct SelfTrainState {
  Corpus labeled;
  Corpus unlabeled;
  int iteration = 0;
  std::vector<IterationRecord> log;
};

struct SelfTrainResult {
  std::optional<CrfModel> crf;        // engaged for LearnerKind::crf
  std::optional<MaxentModel> maxent;  // engaged for LearnerKind::maxent
  SelfTrainState state;
};

using IterationObserver = std::function<void(const SelfTrainState&)>;

// The iterative loop: train K epochs on L, predict all of U with the current
// model, admit examples per policy with their pseudo-labels frozen, repeat.
// Stops on empty U, an empty selection, max_iterations, or `patience`
// consecutive iterations without dev improvement. Returns the best-on-dev
// model. Dev metric is entity macro-F1 for bio-chunked label sets, token
// accuracy for flat ones, and macro-F1 for classification.
SelfTrainResult self_train(const SelfTrainConfig& config, const Corpus& gold,
                           const Corpus& unlabeled, const Corpus& dev,
                           LearnerKind learner,
                           const IterationObserver& observer = {});

std::string render_iteration_record(const IterationRecord& record);

}  // namespace sttk
