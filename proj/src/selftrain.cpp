#include "sttk/selftrain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "sttk/errors.hpp"
#include "sttk/eval.hpp"

namespace sttk {

namespace {

// Seed for one outer iteration. Iteration 1 trains with the configured seed
// itself, so a run with an empty pool matches plain training bit for bit.
uint64_t iteration_seed(uint64_t seed, int iteration) {
  if (iteration == 1) return seed;
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * static_cast<uint64_t>(iteration);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<int> ascending(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  return ids;
}

// One pseudo-labeled prediction for an unlabeled example.
struct PoolPrediction {
  int id = 0;
  std::vector<std::string> labels;  // per token, or one class label
  std::string predicted_class;
  double confidence = 0.0;
};

struct Learner {
  const SelfTrainConfig& config;
  LearnerKind kind;
  CrfModel crf_zero;
  MaxentModel maxent_zero;
  CrfModel crf_model;
  MaxentModel maxent_model;

  Learner(const SelfTrainConfig& cfg, LearnerKind k, const Corpus& gold)
      : config(cfg), kind(k) {
    if (kind == LearnerKind::crf) {
      crf_zero = crf_init(gold);
    } else {
      maxent_zero = maxent_init(gold);
    }
  }

  void train(const Corpus& labeled, const Corpus& dev, int iteration) {
    TrainOptions opt = config.learner;
    opt.epochs = config.epochs_per_iteration;
    opt.seed = iteration_seed(config.seed, iteration);
    bool warm = config.warm_start && iteration > 1;
    if (kind == LearnerKind::crf) {
      const CrfModel* start = warm ? &crf_model : &crf_zero;
      crf_model = crf_train(labeled, dev, opt, start);
    } else {
      const MaxentModel* start = warm ? &maxent_model : &maxent_zero;
      maxent_model = maxent_train(labeled, dev, opt, start);
    }
  }

  PoolPrediction predict(const Example& example) const {
    PoolPrediction out;
    out.id = example.id;
    if (kind == LearnerKind::crf) {
      auto pred = viterbi(crf_model, example.tokens);
      out.labels = std::move(pred.labels);
      out.confidence = pred.example_confidence;
    } else {
      auto pred = predict_proba(maxent_model, example.tokens);
      out.labels.push_back(pred.label);
      out.predicted_class = pred.label;
      out.confidence = pred.confidence;
    }
    return out;
  }

  double dev_metric(const Corpus& dev) const {
    if (kind == LearnerKind::crf) {
      std::vector<std::vector<std::string>> preds;
      preds.reserve(dev.size());
      for (const auto& example : dev.examples) {
        preds.push_back(viterbi(crf_model, example.tokens).labels);
      }
      if (infer_scheme_kind(dev.label_set) == SchemeKind::bio_chunked) {
        return entity_f1(dev, preds).macro_f1;
      }
      return token_accuracy(dev, preds);
    }
    std::vector<std::string> preds;
    preds.reserve(dev.size());
    for (const auto& example : dev.examples) {
      preds.push_back(predict_proba(maxent_model, example.tokens).label);
    }
    return classification_macro_f1(dev, preds).macro_f1;
  }
};

}  // namespace

std::vector<int> select_by_threshold(const std::vector<ScoredExample>& scored,
                                     double tau) {
  if (!(tau > 0.0 && tau <= 1.0))
    throw ConfigError("tau must be in (0, 1]");
  std::vector<int> ids;
  for (const auto& s : scored) {
    if (s.confidence >= tau) ids.push_back(s.id);
  }
  return ascending(std::move(ids));
}

std::vector<int> select_top_k(const std::vector<ScoredExample>& scored,
                              int s) {
  if (s < 1) throw ConfigError("top-k budget must be >= 1");
  std::vector<ScoredExample> order = scored;
  std::sort(order.begin(), order.end(),
            [](const ScoredExample& a, const ScoredExample& b) {
              if (a.confidence != b.confidence)
                return a.confidence > b.confidence;
              return a.id < b.id;
            });
  size_t take = std::min(static_cast<size_t>(s), order.size());
  std::vector<int> ids;
  ids.reserve(take);
  for (size_t i = 0; i < take; ++i) ids.push_back(order[i].id);
  return ascending(std::move(ids));
}

std::vector<int> select_class_balanced(
    const std::vector<ClassScoredExample>& scored, int s, int num_classes) {
  if (num_classes < 2) throw ConfigError("class balancing needs >= 2 classes");
  if (s < num_classes)
    throw ConfigError("budget must be at least the class count");
  const size_t per_class = static_cast<size_t>(s / num_classes);

  std::map<std::string, std::vector<ScoredExample>> by_class;
  for (const auto& item : scored) {
    by_class[item.predicted_class].push_back({item.id, item.confidence});
  }
  std::vector<int> ids;
  for (auto& [cls, members] : by_class) {
    std::sort(members.begin(), members.end(),
              [](const ScoredExample& a, const ScoredExample& b) {
                if (a.confidence != b.confidence)
                  return a.confidence > b.confidence;
                return a.id < b.id;
              });
    size_t take = std::min(per_class, members.size());
    for (size_t i = 0; i < take; ++i) ids.push_back(members[i].id);
  }
  return ascending(std::move(ids));
}

SelfTrainResult self_train(const SelfTrainConfig& config, const Corpus& gold,
                           const Corpus& unlabeled, const Corpus& dev,
                           LearnerKind learner,
                           const IterationObserver& observer) {
  if (gold.empty()) throw DataError("gold corpus is empty");
  if (dev.empty()) throw DataError("dev corpus is empty");
  if (config.max_iterations < 1)
    throw ConfigError("max_iterations must be >= 1");
  if (config.patience < 0) throw ConfigError("patience must be >= 0");
  if (config.policy == SelectionPolicy::class_balanced &&
      learner != LearnerKind::maxent) {
    throw ConfigError("class-balanced selection requires the classifier");
  }
  if (learner == LearnerKind::crf && gold.task_kind != TaskKind::sequence)
    throw ConfigError("crf learner needs a sequence corpus");
  if (learner == LearnerKind::maxent &&
      gold.task_kind != TaskKind::classification)
    throw ConfigError("maxent learner needs a classification corpus");

  SelfTrainResult result;
  SelfTrainState& state = result.state;
  state.labeled = gold;
  state.unlabeled = unlabeled;
  state.unlabeled.label_set = gold.label_set;

  // One id space for both pools: shift the pool past the gold ids.
  int id_offset = 0;
  for (const auto& example : gold.examples) {
    id_offset = std::max(id_offset, example.id + 1);
  }
  for (auto& example : state.unlabeled.examples) example.id += id_offset;

  Learner driver(config, learner, gold);

  double best_metric = -std::numeric_limits<double>::infinity();
  int stale_iterations = 0;

  for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
    auto started = std::chrono::steady_clock::now();
    state.iteration = iteration;

    driver.train(state.labeled, dev, iteration);
    double metric = driver.dev_metric(dev);

    std::vector<PoolPrediction> predictions;
    predictions.reserve(state.unlabeled.size());
    for (const auto& example : state.unlabeled.examples) {
      predictions.push_back(driver.predict(example));
    }

    std::vector<int> selected;
    switch (config.policy) {
      case SelectionPolicy::threshold: {
        std::vector<ScoredExample> scored;
        for (const auto& p : predictions)
          scored.push_back({p.id, p.confidence});
        selected = select_by_threshold(scored, config.tau);
        break;
      }
      case SelectionPolicy::top_k: {
        std::vector<ScoredExample> scored;
        for (const auto& p : predictions)
          scored.push_back({p.id, p.confidence});
        selected = select_top_k(scored, config.top_s);
        break;
      }
      case SelectionPolicy::class_balanced: {
        std::vector<ClassScoredExample> scored;
        for (const auto& p : predictions)
          scored.push_back({p.id, p.predicted_class, p.confidence});
        selected = select_class_balanced(
            scored, config.top_s,
            static_cast<int>(gold.label_set.size()));
        break;
      }
    }

    // Move the admitted examples with their pseudo-labels frozen as
    // predicted by this iteration's model.
    std::map<int, const PoolPrediction*> by_id;
    for (const auto& p : predictions) by_id[p.id] = &p;
    std::vector<Example> remaining;
    remaining.reserve(state.unlabeled.size());
    std::set<int> selected_set(selected.begin(), selected.end());
    for (const auto& example : state.unlabeled.examples) {
      if (selected_set.count(example.id)) {
        Example moved = example;
        moved.origin = Origin::pseudo;
        moved.labels = by_id[example.id]->labels;
        state.labeled.examples.push_back(std::move(moved));
      } else {
        remaining.push_back(example);
      }
    }
    state.unlabeled.examples = std::move(remaining);

    IterationRecord record;
    record.iteration = iteration;
    record.labeled_size = state.labeled.size();
    record.unlabeled_size = state.unlabeled.size();
    record.selected = selected.size();
    record.dev_metric = metric;
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    state.log.push_back(record);
    if (observer) observer(state);

    bool improved = metric > best_metric;
    if (improved) {
      best_metric = metric;
      stale_iterations = 0;
      if (learner == LearnerKind::crf) {
        result.crf = driver.crf_model;
      } else {
        result.maxent = driver.maxent_model;
      }
    } else {
      ++stale_iterations;
    }

    if (state.unlabeled.empty()) break;
    if (selected.empty()) break;
    if (config.patience > 0 && stale_iterations >= config.patience) break;
  }
  return result;
}

std::string render_iteration_record(const IterationRecord& record) {
  std::ostringstream out;
  out << "iter=" << record.iteration << " labeled=" << record.labeled_size
      << " unlabeled=" << record.unlabeled_size
      << " selected=" << record.selected << " dev_metric=" << std::fixed
      << std::setprecision(6) << record.dev_metric
      << " seconds=" << std::setprecision(3) << record.seconds;
  return out.str();
}

}  // namespace sttk
