#include "sttk/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "sttk/errors.hpp"

namespace sttk {

namespace {

std::string bio_type(const std::string& label) {
  if (label.size() > 2 && (label[0] == 'B' || label[0] == 'I') &&
      label[1] == '-') {
    return label.substr(2);
  }
  return {};
}

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r); }

void check_shapes(const Corpus& gold,
                  const std::vector<std::vector<std::string>>& pred) {
  if (gold.size() != pred.size())
    throw DataError("prediction count does not match corpus size");
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold.examples[i].labels.size() != gold.examples[i].tokens.size())
      throw DataError("gold corpus is not fully labeled");
    if (pred[i].size() != gold.examples[i].tokens.size())
      throw DataError("prediction length mismatch at example " +
                      std::to_string(gold.examples[i].id));
  }
}

// Percent change of an error count (smaller b is an improvement).
double error_change(long a, long b) {
  return a == 0 ? 0.0 : 100.0 * static_cast<double>(a - b) / a;
}

// Percent change of a correct count (larger b is an improvement).
double correct_change(long a, long b) {
  return a == 0 ? 0.0 : 100.0 * static_cast<double>(b - a) / a;
}

}  // namespace

std::vector<Chunk> extract_chunks(const std::vector<std::string>& labels) {
  std::vector<Chunk> chunks;
  bool open = false;
  Chunk current;

  auto close = [&](size_t end) {
    if (open) {
      current.end = end;
      chunks.push_back(current);
      open = false;
    }
  };

  for (size_t j = 0; j < labels.size(); ++j) {
    const std::string& label = labels[j];
    std::string type = bio_type(label);
    if (type.empty()) {  // "O" or anything non-BIO
      close(j);
      continue;
    }
    if (label[0] == 'B' || !open || current.type != type) {
      close(j);
      current = Chunk{type, j, j};
      open = true;
    }
  }
  close(labels.size());
  return chunks;
}

EvalReport entity_f1(const Corpus& gold,
                     const std::vector<std::vector<std::string>>& pred) {
  check_shapes(gold, pred);

  std::map<std::string, ClassMetrics> per_type;
  EvalReport report;
  long matched = 0;

  for (size_t i = 0; i < gold.size(); ++i) {
    const auto& gold_labels = gold.examples[i].labels;
    auto gold_chunks = extract_chunks(gold_labels);
    auto pred_chunks = extract_chunks(pred[i]);
    std::set<Chunk> gold_set(gold_chunks.begin(), gold_chunks.end());

    for (const auto& chunk : gold_chunks) ++per_type[chunk.type].gold;
    for (const auto& chunk : pred_chunks) {
      auto& m = per_type[chunk.type];
      ++m.predicted;
      if (gold_set.count(chunk)) ++m.tp;
    }

    for (size_t j = 0; j < gold_labels.size(); ++j) {
      bool gold_entity = gold_labels[j] != "O";
      bool pred_entity = pred[i][j] != "O";
      matched += gold_labels[j] == pred[i][j];
      report.tp += gold_entity && pred_entity;
      report.fp += !gold_entity && pred_entity;
      report.fn += gold_entity && !pred_entity;
      report.tn += !gold_entity && !pred_entity;
    }
  }

  report.total_tokens = report.tp + report.fp + report.fn + report.tn;
  report.token_accuracy =
      safe_div(static_cast<double>(matched), report.total_tokens);

  long micro_tp = 0, micro_pred = 0, micro_gold = 0;
  double macro_sum = 0.0;
  long gold_types = 0;
  for (auto& [type, m] : per_type) {
    m.precision = safe_div(m.tp, m.predicted);
    m.recall = safe_div(m.tp, m.gold);
    m.f1 = f1_of(m.precision, m.recall);
    micro_tp += m.tp;
    micro_pred += m.predicted;
    micro_gold += m.gold;
    if (m.gold > 0) {  // types never in gold stay out of the macro mean
      macro_sum += m.f1;
      ++gold_types;
    }
    report.per_type.emplace_back(type, m);
  }
  report.macro_f1 = safe_div(macro_sum, gold_types);
  report.micro_f1 =
      f1_of(safe_div(micro_tp, micro_pred), safe_div(micro_tp, micro_gold));
  return report;
}

double token_accuracy(const Corpus& gold,
                      const std::vector<std::vector<std::string>>& pred) {
  check_shapes(gold, pred);
  long matched = 0;
  long total = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    for (size_t j = 0; j < pred[i].size(); ++j) {
      matched += gold.examples[i].labels[j] == pred[i][j];
      ++total;
    }
  }
  return safe_div(matched, total);
}

EvalReport classification_macro_f1(const Corpus& gold,
                                   const std::vector<std::string>& pred) {
  if (gold.empty() || pred.empty())
    throw DataError("empty corpus or prediction list");
  if (gold.size() != pred.size())
    throw DataError("prediction count does not match corpus size");

  std::map<std::string, ClassMetrics> per_class;
  long matched = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold.examples[i].labels.size() != 1)
      throw DataError("gold corpus is not single-label");
    const std::string& g = gold.examples[i].labels[0];
    const std::string& p = pred[i];
    if (!std::count(gold.label_set.begin(), gold.label_set.end(), p))
      throw DataError("predicted class '" + p + "' outside the class set");
    ++per_class[g].gold;
    ++per_class[p].predicted;
    if (g == p) {
      ++per_class[g].tp;
      ++matched;
    }
  }

  EvalReport report;
  report.total_tokens = static_cast<long>(gold.size());
  report.token_accuracy = safe_div(matched, gold.size());
  report.micro_f1 = report.token_accuracy;  // single-label micro F1

  double macro_sum = 0.0;
  long gold_classes = 0;
  // Emit classes in class-set order rather than alphabetically.
  for (const auto& cls : gold.label_set) {
    auto it = per_class.find(cls);
    if (it == per_class.end()) continue;
    auto& m = it->second;
    m.precision = safe_div(m.tp, m.predicted);
    m.recall = safe_div(m.tp, m.gold);
    m.f1 = f1_of(m.precision, m.recall);
    if (m.gold > 0) {
      macro_sum += m.f1;
      ++gold_classes;
    }
    report.per_type.emplace_back(cls, m);
  }
  report.macro_f1 = safe_div(macro_sum, gold_classes);
  return report;
}

ErrorCategoryReport error_category_report(
    const Corpus& gold, const std::vector<std::vector<std::string>>& pred_a,
    const std::vector<std::vector<std::string>>& pred_b) {
  ErrorCategoryReport report;
  report.a = entity_f1(gold, pred_a);
  report.b = entity_f1(gold, pred_b);
  report.tp_change = correct_change(report.a.tp, report.b.tp);
  report.fp_change = error_change(report.a.fp, report.b.fp);
  report.fn_change = error_change(report.a.fn, report.b.fn);
  report.tn_change = correct_change(report.a.tn, report.b.tn);
  return report;
}

std::string render_report(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  size_t width = 10;
  for (const auto& [type, m] : report.per_type) {
    width = std::max(width, type.size() + 2);
  }
  out << std::left << std::setw(static_cast<int>(width)) << "type"
      << std::right << std::setw(10) << "prec" << std::setw(10) << "rec"
      << std::setw(10) << "f1" << std::setw(8) << "gold" << "\n";
  for (const auto& [type, m] : report.per_type) {
    out << std::left << std::setw(static_cast<int>(width)) << type
        << std::right << std::setw(10) << m.precision << std::setw(10)
        << m.recall << std::setw(10) << m.f1 << std::setw(8) << m.gold << "\n";
  }
  out << "macro_f1       " << report.macro_f1 << "\n";
  out << "micro_f1       " << report.micro_f1 << "\n";
  out << "token_accuracy " << report.token_accuracy << "\n";
  if (report.tp + report.fp + report.fn + report.tn > 0) {
    out << "tokens tp=" << report.tp << " fp=" << report.fp
        << " fn=" << report.fn << " tn=" << report.tn << "\n";
  }
  return out.str();
}

std::string render_report_kv(const EvalReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "macro_f1=" << report.macro_f1 << "\n";
  out << "micro_f1=" << report.micro_f1 << "\n";
  out << "token_accuracy=" << report.token_accuracy << "\n";
  out << "tp=" << report.tp << "\nfp=" << report.fp << "\nfn=" << report.fn
      << "\ntn=" << report.tn << "\n";
  out << "total_tokens=" << report.total_tokens << "\n";
  for (const auto& [type, m] : report.per_type) {
    out << type << ".precision=" << m.precision << "\n";
    out << type << ".recall=" << m.recall << "\n";
    out << type << ".f1=" << m.f1 << "\n";
  }
  return out.str();
}

std::string render_error_categories(const ErrorCategoryReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << std::left << std::setw(16) << "measure" << std::right << std::setw(10)
      << "a" << std::setw(10) << "b" << std::setw(14) << "% improve" << "\n";
  auto row = [&](const char* name, long a, long b, double change) {
    out << std::left << std::setw(16) << name << std::right << std::setw(10)
        << a << std::setw(10) << b << std::setw(13) << std::showpos << change
        << std::noshowpos << "%\n";
  };
  row("true_positives", report.a.tp, report.b.tp, report.tp_change);
  row("false_positives", report.a.fp, report.b.fp, report.fp_change);
  row("false_negatives", report.a.fn, report.b.fn, report.fn_change);
  row("true_negatives", report.a.tn, report.b.tn, report.tn_change);
  return out.str();
}

}  // namespace sttk
