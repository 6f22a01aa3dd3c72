#pragma once

#include <string>
#include <vector>

#include "sttk/corpus.hpp"

namespace sttk {

// Typed token span [begin, end).
struct Chunk {
  std::string type;
  size_t begin = 0;
  size_t end = 0;

  bool operator==(const Chunk&) const = default;
  auto operator<=>(const Chunk&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp = 0;
  long predicted = 0;
  long gold = 0;
};

// Shared report shape for both task families. The token-level tp/fp/fn/tn
// block is the binary entity-vs-O partition and is filled for sequence
// reports only.
struct EvalReport {
  std::vector<std::pair<std::string, ClassMetrics>> per_type;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double token_accuracy = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
  long total_tokens = 0;
};

struct ErrorCategoryReport {
  EvalReport a;
  EvalReport b;
  // Signed percent change, b relative to a: errors improve when they shrink,
  // correct counts improve when they grow.
  double tp_change = 0.0;
  double fp_change = 0.0;
  double fn_change = 0.0;
  double tn_change = 0.0;
};

// Lenient BIO reading: B-X starts a chunk, I-X extends a same-type chunk and
// otherwise starts one, anything else closes the open chunk.
std::vector<Chunk> extract_chunks(const std::vector<std::string>& labels);

// Entity-level scoring: a predicted chunk is correct iff type and span match
// exactly. Macro F1 averages over types present in gold; types only
// predicted still count against micro precision.
EvalReport entity_f1(const Corpus& gold,
                     const std::vector<std::vector<std::string>>& pred);

double token_accuracy(const Corpus& gold,
                      const std::vector<std::vector<std::string>>& pred);

EvalReport classification_macro_f1(const Corpus& gold,
                                   const std::vector<std::string>& pred);

ErrorCategoryReport error_category_report(
    const Corpus& gold, const std::vector<std::vector<std::string>>& pred_a,
    const std::vector<std::vector<std::string>>& pred_b);

// Aligned plain-text table / machine-readable key=value records.
std::string render_report(const EvalReport& report);
std::string render_report_kv(const EvalReport& report);
std::string render_error_categories(const ErrorCategoryReport& report);

}  // namespace sttk
