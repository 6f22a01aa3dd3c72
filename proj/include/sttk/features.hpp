#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sttk {

// Sparse feature vector: (index, weight) pairs, indices strictly increasing.
struct SparseVector {
  std::vector<std::pair<int, double>> entries;

  bool operator==(const SparseVector&) const = default;
};

// Feature-string -> dense-index mapping. Grows until frozen; once frozen,
// unseen features are dropped so the parameter space stays fixed across
// self-training iterations.
class FeatureVocab {
 public:
  // Index of the feature, adding it when unfrozen. -1 for unknown+frozen.
  int lookup_or_add(const std::string& feature);
  std::optional<int> lookup(const std::string& feature) const;

  size_t size() const { return names_.size(); }
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  const std::vector<std::string>& names() const { return names_; }

  // Header line with version, frozen flag and entry count, then one
  // `feature<TAB>index` line per entry in index order.
  void save(std::ostream& out) const;
  static FeatureVocab load(std::istream& in);
  void save_file(const std::string& path) const;
  static FeatureVocab load_file(const std::string& path);

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> names_;
  bool frozen_ = false;
};

// Template features for one position of a token sequence: current word
// (case-folded), neighbors or <BOS>/<EOS>, prefixes/suffixes of length 1-3,
// a contains-digit flag and a letters/digits/punct shape class.
std::vector<std::string> token_features(const std::vector<std::string>& tokens,
                                        size_t position);

// Bag features for a whole text: unigrams, bigrams and per-token character
// trigrams, case-folded, repeated per occurrence.
std::vector<std::string> text_features(const std::vector<std::string>& tokens);

// Repeated features accumulate weight 1 per occurrence.
SparseVector vectorize(const std::vector<std::string>& features,
                       FeatureVocab& vocab);

}  // namespace sttk
