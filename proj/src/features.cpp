#include "sttk/features.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "sttk/errors.hpp"

namespace sttk {

namespace {

constexpr int kVocabVersion = 1;

// Simple lowercase mapping (ASCII only); tokens are otherwise taken as given.
std::string fold_case(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Byte offsets of UTF-8 codepoint starts, plus the end offset.
std::vector<size_t> codepoint_starts(const std::string& s) {
  std::vector<size_t> starts;
  for (size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xc0) != 0x80) starts.push_back(i);
  }
  starts.push_back(s.size());
  return starts;
}

std::string shape_of(const std::string& s) {
  std::string shape;
  auto starts = codepoint_starts(s);
  for (size_t k = 0; k + 1 < starts.size(); ++k) {
    char c = s[starts[k]];
    unsigned char uc = static_cast<unsigned char>(c);
    if (uc >= 0x80) {
      shape += 'x';  // non-ASCII treated as a letter
    } else if (c >= 'A' && c <= 'Z') {
      shape += 'X';
    } else if (c >= 'a' && c <= 'z') {
      shape += 'x';
    } else if (c >= '0' && c <= '9') {
      shape += 'd';
    } else {
      shape += 'p';
    }
  }
  return shape;
}

bool contains_digit(const std::string& s) {
  return std::any_of(s.begin(), s.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

int FeatureVocab::lookup_or_add(const std::string& feature) {
  auto it = index_.find(feature);
  if (it != index_.end()) return it->second;
  if (frozen_) return -1;
  int idx = static_cast<int>(names_.size());
  index_.emplace(feature, idx);
  names_.push_back(feature);
  return idx;
}

std::optional<int> FeatureVocab::lookup(const std::string& feature) const {
  auto it = index_.find(feature);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void FeatureVocab::save(std::ostream& out) const {
  out << "sttk-vocab " << kVocabVersion << " frozen=" << (frozen_ ? 1 : 0)
      << " entries=" << names_.size() << "\n";
  for (size_t i = 0; i < names_.size(); ++i) {
    out << names_[i] << '\t' << i << '\n';
  }
}

FeatureVocab FeatureVocab::load(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("vocab: missing header");
  std::istringstream hs(header);
  std::string magic, frozen_kv, entries_kv;
  int version = 0;
  hs >> magic >> version >> frozen_kv >> entries_kv;
  if (magic != "sttk-vocab" || version != kVocabVersion)
    throw DataError("vocab: unsupported header '" + header + "'");
  if (frozen_kv.rfind("frozen=", 0) != 0 || entries_kv.rfind("entries=", 0) != 0)
    throw DataError("vocab: malformed header '" + header + "'");
  bool frozen = frozen_kv.substr(7) == "1";
  size_t entries = std::stoul(entries_kv.substr(8));

  FeatureVocab vocab;
  vocab.names_.resize(entries);
  std::vector<bool> seen(entries, false);
  std::string line;
  for (size_t k = 0; k < entries; ++k) {
    if (!std::getline(in, line)) throw DataError("vocab: truncated");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t tab = line.rfind('\t');
    if (tab == std::string::npos) throw DataError("vocab: bad entry: " + line);
    size_t idx = std::stoul(line.substr(tab + 1));
    if (idx >= entries || seen[idx])
      throw DataError("vocab: index out of range or duplicated: " + line);
    seen[idx] = true;
    vocab.names_[idx] = line.substr(0, tab);
  }
  for (size_t i = 0; i < entries; ++i) {
    vocab.index_.emplace(vocab.names_[i], static_cast<int>(i));
  }
  if (vocab.index_.size() != entries)
    throw DataError("vocab: duplicate feature strings");
  vocab.frozen_ = frozen;
  return vocab;
}

void FeatureVocab::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocab file: " + path);
  save(out);
}

FeatureVocab FeatureVocab::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocab file: " + path);
  return load(in);
}

std::vector<std::string> token_features(const std::vector<std::string>& tokens,
                                        size_t position) {
  if (position >= tokens.size())
    throw DataError("token_features: position out of range");

  const std::string folded = fold_case(tokens[position]);
  std::vector<std::string> feats;
  feats.push_back("w0=" + folded);
  feats.push_back("w-1=" + (position > 0 ? tokens[position - 1]
                                         : std::string("<BOS>")));
  feats.push_back("w+1=" + (position + 1 < tokens.size()
                                ? tokens[position + 1]
                                : std::string("<EOS>")));

  auto starts = codepoint_starts(folded);
  size_t cp_len = starts.size() - 1;
  for (size_t n = 1; n <= 3 && n <= cp_len; ++n) {
    feats.push_back("pre" + std::to_string(n) + "=" +
                    folded.substr(0, starts[n]));
    feats.push_back("suf" + std::to_string(n) + "=" +
                    folded.substr(starts[cp_len - n]));
  }
  if (contains_digit(tokens[position])) feats.push_back("has_digit");
  feats.push_back("shape=" + shape_of(tokens[position]));
  return feats;
}

std::vector<std::string> text_features(
    const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw DataError("text_features: empty text");
  std::vector<std::string> feats;
  std::vector<std::string> folded;
  folded.reserve(tokens.size());
  for (const auto& tok : tokens) folded.push_back(fold_case(tok));

  for (const auto& tok : folded) feats.push_back("u=" + tok);
  for (size_t i = 0; i + 1 < folded.size(); ++i) {
    feats.push_back("b=" + folded[i] + "_" + folded[i + 1]);
  }
  for (const auto& tok : folded) {
    auto starts = codepoint_starts(tok);
    size_t cp_len = starts.size() - 1;
    for (size_t i = 0; i + 3 <= cp_len; ++i) {
      feats.push_back("c3=" +
                      tok.substr(starts[i], starts[i + 3] - starts[i]));
    }
  }
  return feats;
}

SparseVector vectorize(const std::vector<std::string>& features,
                       FeatureVocab& vocab) {
  std::map<int, double> acc;
  for (const auto& feature : features) {
    int idx = vocab.lookup_or_add(feature);
    if (idx >= 0) acc[idx] += 1.0;
  }
  SparseVector vec;
  vec.entries.assign(acc.begin(), acc.end());
  return vec;
}

}  // namespace sttk
