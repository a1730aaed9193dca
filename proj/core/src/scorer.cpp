#include "polysrl/scorer.h"

#include <algorithm>
#include <ostream>
#include <set>
#include <vector>

namespace polysrl {

PrfScore prf(long correct, long predicted, long gold) {
  PrfScore s;
  s.precision = predicted > 0 ? 100.0 * correct / predicted : 0.0;
  s.recall = gold > 0 ? 100.0 * correct / gold : 0.0;
  s.f1 = s.precision + s.recall > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

void check_aligned(const Corpus& gold, const Corpus& predicted) {
  if (gold.sentences.size() != predicted.sentences.size()) {
    throw ConllError("corpora differ in sentence count: " +
                     std::to_string(gold.sentences.size()) + " vs " +
                     std::to_string(predicted.sentences.size()));
  }
  for (size_t s = 0; s < gold.sentences.size(); ++s) {
    const Sentence& gs = gold.sentences[s];
    const Sentence& ps = predicted.sentences[s];
    if (gs.tokens.size() != ps.tokens.size() ||
        gs.predicate_positions() != ps.predicate_positions()) {
      throw ConllError("corpora diverge at sentence " + std::to_string(s + 1));
    }
  }
}

}  // namespace

EvalReport score(const Corpus& gold, const Corpus& predicted) {
  check_aligned(gold, predicted);
  EvalReport report;
  report.language = gold.language;

  long lab_correct = 0, lab_pred = 0, lab_gold = 0;
  long unl_correct = 0, unl_pred = 0, unl_gold = 0;
  long sense_correct = 0;

  std::vector<PredicateInstance> gold_insts = extract_instances(gold);
  std::vector<PredicateInstance> pred_insts = extract_instances(predicted);
  for (size_t i = 0; i < gold_insts.size(); ++i) {
    const PredicateInstance& gi = gold_insts[i];
    const PredicateInstance& pi = pred_insts[i];

    // One sense item per predicate. The predicate is given, so the
    // unlabeled item is always correct.
    ++report.n_predicates;
    ++lab_pred;
    ++lab_gold;
    ++unl_pred;
    ++unl_gold;
    ++unl_correct;
    if (trim(pi.gold_sense) == trim(gi.gold_sense)) {
      ++lab_correct;
      ++sense_correct;
    }

    // One argument item per non-NULL cell.
    for (const auto& [pos, label] : gi.gold_args) {
      ++lab_gold;
      ++unl_gold;
      ++report.per_label[label].gold_count;
      auto it = pi.gold_args.find(pos);
      if (it != pi.gold_args.end()) {
        ++unl_correct;
        if (it->second == label) {
          ++lab_correct;
          ++report.per_label[label].correct;
        }
      }
    }
    for (const auto& [pos, label] : pi.gold_args) {
      ++lab_pred;
      ++unl_pred;
      ++report.per_label[label].predicted;
    }
  }

  report.labeled = prf(lab_correct, lab_pred, lab_gold);
  report.unlabeled = prf(unl_correct, unl_pred, unl_gold);
  report.sense_accuracy =
      report.n_predicates > 0
          ? static_cast<double>(sense_correct) / report.n_predicates
          : 0.0;
  return report;
}

void per_label_table(const EvalReport& report, std::ostream& out) {
  std::vector<std::pair<std::string, LabelCounts>> rows(report.per_label.begin(),
                                                        report.per_label.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.second.gold_count > b.second.gold_count;
  });
  out << "label,gold_count,precision,recall,f1\n";
  for (const auto& [label, counts] : rows) {
    PrfScore s = counts.score();
    out << label << ',' << counts.gold_count << ',' << s.precision << ','
        << s.recall << ',' << s.f1 << '\n';
  }
}

std::vector<ImprovementRow> compare(const EvalReport& a, const EvalReport& b) {
  if (a.language != b.language) {
    throw ConllError("cannot compare reports for " + a.language + " and " + b.language);
  }
  std::vector<ImprovementRow> rows;
  ImprovementRow overall;
  overall.label = "OVERALL";
  overall.f1_a = a.labeled.f1;
  overall.f1_b = b.labeled.f1;
  overall.delta = b.labeled.f1 - a.labeled.f1;
  rows.push_back(overall);

  std::set<std::string> labels;
  for (const auto& [label, c] : a.per_label) labels.insert(label);
  for (const auto& [label, c] : b.per_label) labels.insert(label);
  for (const std::string& label : labels) {
    ImprovementRow row;
    row.label = label;
    auto ia = a.per_label.find(label);
    auto ib = b.per_label.find(label);
    row.f1_a = ia == a.per_label.end() ? 0.0 : ia->second.score().f1;
    row.f1_b = ib == b.per_label.end() ? 0.0 : ib->second.score().f1;
    row.delta = row.f1_b - row.f1_a;
    rows.push_back(row);
  }
  return rows;
}

void write_comparison(const std::vector<ImprovementRow>& rows, std::ostream& out) {
  out << "label,f1_a,f1_b,delta\n";
  for (const ImprovementRow& row : rows) {
    out << row.label << ',' << row.f1_a << ',' << row.f1_b << ',' << row.delta << '\n';
  }
}

}  // namespace polysrl
