#include "sttk/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sttk/errors.hpp"
#include "sttk/rng.hpp"

namespace sttk {

namespace {

bool has_whitespace(const std::string& s) {
  return s.find_first_of(" \t\r\n\v\f") != std::string::npos;
}

std::vector<std::string> split_tab(const std::string& line) {
  std::vector<std::string> cols;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::vector<std::string> split_whitespace(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// The entity type of "B-X"/"I-X", empty for anything else.
std::string bio_type(const std::string& label) {
  if (label.size() > 2 && (label[0] == 'B' || label[0] == 'I') &&
      label[1] == '-') {
    return label.substr(2);
  }
  return {};
}

}  // namespace

bool LabelScheme::contains(const std::string& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

void LabelScheme::validate() const {
  if (labels.empty()) throw DataError("label scheme is empty");
  std::set<std::string> unique(labels.begin(), labels.end());
  if (unique.size() != labels.size())
    throw DataError("label scheme contains duplicates");
  if (kind != SchemeKind::bio_chunked) return;
  if (!contains("O")) throw DataError("bio-chunked scheme must contain 'O'");
  for (const auto& label : labels) {
    if (label == "O") continue;
    std::string type = bio_type(label);
    if (type.empty())
      throw DataError("bio-chunked scheme has non-BIO label '" + label + "'");
    if (label[0] == 'I' && !contains("B-" + type))
      throw DataError("scheme has '" + label + "' without matching 'B-" +
                      type + "'");
  }
}

LabelScheme LabelScheme::bio(const std::vector<std::string>& entity_types) {
  LabelScheme scheme;
  scheme.kind = SchemeKind::bio_chunked;
  scheme.labels.push_back("O");
  for (const auto& type : entity_types) {
    scheme.labels.push_back("B-" + type);
    scheme.labels.push_back("I-" + type);
  }
  scheme.validate();
  return scheme;
}

LabelScheme LabelScheme::flat(std::vector<std::string> labels) {
  LabelScheme scheme;
  scheme.kind = SchemeKind::flat;
  scheme.labels = std::move(labels);
  scheme.validate();
  return scheme;
}

SchemeKind infer_scheme_kind(const std::vector<std::string>& labels) {
  bool has_outside = false;
  for (const auto& label : labels) {
    if (label == "O") {
      has_outside = true;
    } else if (bio_type(label).empty()) {
      return SchemeKind::flat;
    }
  }
  return has_outside ? SchemeKind::bio_chunked : SchemeKind::flat;
}

LabelScheme read_label_scheme(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label scheme file: " + path);
  LabelScheme scheme;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    if (has_whitespace(line))
      throw DataError("label contains whitespace: '" + line + "'");
    scheme.labels.push_back(line);
  }
  scheme.kind = infer_scheme_kind(scheme.labels);
  scheme.validate();
  return scheme;
}

void write_label_scheme(const LabelScheme& scheme, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write label scheme file: " + path);
  for (const auto& label : scheme.labels) out << label << "\n";
}

Corpus read_sequence_corpus(const std::string& path, const LabelScheme& scheme,
                            bool repair) {
  scheme.validate();
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);

  Corpus corpus;
  corpus.task_kind = TaskKind::sequence;
  corpus.label_set = scheme.labels;

  Example current;
  int next_id = 0;
  int labeled = -1;  // -1 undecided, 0 unlabeled, 1 labeled
  size_t line_no = 0;
  std::string line;

  auto where = [&] { return path + ":" + std::to_string(line_no); };

  auto flush = [&] {
    if (current.tokens.empty()) return;  // consecutive blank lines
    current.id = next_id++;
    current.origin = Origin::gold;
    corpus.examples.push_back(std::move(current));
    current = Example{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) {
      flush();
      continue;
    }
    auto cols = split_tab(line);
    if (cols.size() > 2)
      throw DataError("malformed line (expected 1 or 2 columns) at " +
                      where());
    if (cols[0].empty() || has_whitespace(cols[0]))
      throw DataError("bad token '" + cols[0] + "' at " + where());

    int line_labeled = cols.size() == 2 ? 1 : 0;
    if (labeled == -1) labeled = line_labeled;
    if (labeled != line_labeled)
      throw DataError("mixed labeled and unlabeled lines at " + where());

    current.tokens.push_back(cols[0]);
    if (labeled == 1) {
      const std::string& label = cols[1];
      if (label.empty() || !scheme.contains(label))
        throw DataError("unknown label '" + label + "' at " + where());
      current.labels.push_back(label);
    }
  }
  flush();

  if (corpus.examples.empty()) throw DataError("empty corpus: " + path);

  if (labeled == 1 && scheme.kind == SchemeKind::bio_chunked) {
    for (auto& example : corpus.examples) {
      for (size_t j = 0; j < example.labels.size(); ++j) {
        std::string& label = example.labels[j];
        if (label[0] != 'I') continue;
        std::string type = bio_type(label);
        bool legal = j > 0 && (example.labels[j - 1] == "B-" + type ||
                               example.labels[j - 1] == "I-" + type);
        if (legal) continue;
        if (!repair)
          throw DataError("illegal BIO transition to '" + label +
                          "' in sequence " + std::to_string(example.id) +
                          " of " + path);
        label = "B-" + type;
      }
    }
  }
  return corpus;
}

void write_sequence_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path);
  for (const auto& example : corpus.examples) {
    for (size_t j = 0; j < example.tokens.size(); ++j) {
      out << example.tokens[j];
      if (example.labeled()) out << '\t' << example.labels[j];
      out << '\n';
    }
    out << '\n';
  }
}

Corpus read_text_corpus(const std::string& path, bool labeled) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);

  Corpus corpus;
  corpus.task_kind = TaskKind::classification;

  std::string line;
  size_t line_no = 0;
  int next_id = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto where = path + ":" + std::to_string(line_no);

    Example example;
    example.id = next_id++;
    if (labeled) {
      auto cols = split_tab(line);
      if (cols.size() != 2)
        throw DataError("expected `text<TAB>label` at " + where);
      example.tokens = split_whitespace(cols[0]);
      if (example.tokens.empty())
        throw DataError("empty text field at " + where);
      if (cols[1].empty() || has_whitespace(cols[1]))
        throw DataError("bad class label at " + where);
      example.labels.push_back(cols[1]);
      if (!std::count(corpus.label_set.begin(), corpus.label_set.end(),
                      cols[1]))
        corpus.label_set.push_back(cols[1]);
    } else {
      example.tokens = split_whitespace(line);
      if (example.tokens.empty())
        throw DataError("empty text field at " + where);
    }
    corpus.examples.push_back(std::move(example));
  }
  if (corpus.examples.empty()) throw DataError("empty corpus: " + path);
  return corpus;
}

void write_text_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path);
  for (const auto& example : corpus.examples) {
    for (size_t j = 0; j < example.tokens.size(); ++j) {
      if (j > 0) out << ' ';
      out << example.tokens[j];
    }
    if (example.labeled()) out << '\t' << example.labels[0];
    out << '\n';
  }
}

std::vector<Corpus> split_corpus(const Corpus& corpus,
                                 const std::vector<double>& fractions,
                                 uint64_t seed) {
  if (fractions.empty()) throw ConfigError("no split fractions given");
  double total = 0.0;
  for (double f : fractions) {
    if (f <= 0.0) throw ConfigError("split fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");

  std::vector<size_t> order(corpus.examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const size_t n = order.size();
  std::vector<size_t> sizes;
  size_t assigned = 0;
  for (double f : fractions) {
    size_t s = static_cast<size_t>(std::floor(f * static_cast<double>(n)));
    sizes.push_back(s);
    assigned += s;
  }
  sizes.front() += n - assigned;  // remainder to the first split

  std::vector<Corpus> splits;
  size_t cursor = 0;
  for (size_t s : sizes) {
    Corpus part;
    part.task_kind = corpus.task_kind;
    part.label_set = corpus.label_set;
    std::vector<size_t> picked(order.begin() + cursor,
                               order.begin() + cursor + s);
    std::sort(picked.begin(), picked.end());
    for (size_t idx : picked) part.examples.push_back(corpus.examples[idx]);
    cursor += s;
    splits.push_back(std::move(part));
  }
  return splits;
}

}  // namespace sttk
