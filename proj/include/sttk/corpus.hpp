#pragma once

#include <string>
#include <vector>

namespace sttk {

enum class TaskKind { sequence, classification };
enum class Origin { gold, pseudo };
enum class SchemeKind { bio_chunked, flat };

// One example of either task family. labels is per-token for sequence tasks,
// a single class label for classification, and empty for unlabeled pools.
struct Example {
  int id = 0;
  Origin origin = Origin::gold;
  std::vector<std::string> tokens;
  std::vector<std::string> labels;

  bool labeled() const { return !labels.empty(); }
  bool operator==(const Example&) const = default;
};

struct Corpus {
  TaskKind task_kind = TaskKind::sequence;
  std::vector<std::string> label_set;
  std::vector<Example> examples;

  size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  bool operator==(const Corpus&) const = default;
};

// Tag inventory for sequence tasks. For bio_chunked schemes the labels are
// "O" plus "B-X"/"I-X" pairs per entity type X.
struct LabelScheme {
  SchemeKind kind = SchemeKind::flat;
  std::vector<std::string> labels;

  bool contains(const std::string& label) const;

  // "O" present and every I-X paired with a B-X; throws DataError otherwise.
  void validate() const;

  // Builds O + B-X/I-X labels from entity type names.
  static LabelScheme bio(const std::vector<std::string>& entity_types);
  static LabelScheme flat(std::vector<std::string> labels);
};

// bio_chunked when the set is "O" plus only B-/I- labels, flat otherwise.
SchemeKind infer_scheme_kind(const std::vector<std::string>& labels);

// One label per line; kind is bio_chunked when "O" plus only B-/I- labels
// are present, flat otherwise.
LabelScheme read_label_scheme(const std::string& path);
void write_label_scheme(const LabelScheme& scheme, const std::string& path);

// CoNLL-style file: `token<TAB>label` lines, blank line ends a sequence.
// Label column must be absent throughout for unlabeled pools. When repair is
// set, an I-X with no B-X/I-X predecessor is rewritten to B-X; otherwise it
// is a DataError. Empty sequences are skipped.
Corpus read_sequence_corpus(const std::string& path, const LabelScheme& scheme,
                            bool repair);
void write_sequence_corpus(const Corpus& corpus, const std::string& path);

// One example per line: `text<TAB>label` when labeled, bare text otherwise.
// Text is split on whitespace runs; the class label set is inferred in
// first-seen order and frozen.
Corpus read_text_corpus(const std::string& path, bool labeled);
void write_text_corpus(const Corpus& corpus, const std::string& path);

// Seeded shuffle, then consecutive blocks of floor(f*n) examples (remainder
// goes to the first split). Each split is re-sorted by id; ids are preserved.
std::vector<Corpus> split_corpus(const Corpus& corpus,
                                 const std::vector<double>& fractions,
                                 uint64_t seed);

}  // namespace sttk
