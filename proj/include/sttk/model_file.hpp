#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sttk/features.hpp"

namespace sttk {

// Task-kind tag ("crf" or "maxent") from a model file header, so callers can
// dispatch before loading.
std::string model_file_kind(const std::string& path);

namespace detail {

// Model file envelope, shared by both learners:
//   sttk-model <version> <kind>
//   labels <n>          followed by one label per line
//   <vocab>             FeatureVocab::save format
//   weights <count>     followed by count doubles, little-endian
void write_model_header(std::ostream& out, const std::string& kind,
                        const std::vector<std::string>& labels,
                        const FeatureVocab& vocab);

struct ModelFileHead {
  std::string kind;
  std::vector<std::string> labels;
  FeatureVocab vocab;
};
ModelFileHead read_model_header(std::istream& in, const std::string& path);

void write_weight_block(std::ostream& out, const std::vector<double>& weights);
std::vector<double> read_weight_block(std::istream& in, size_t expected,
                                      const std::string& path);

}  // namespace detail
}  // namespace sttk
