#ifndef POLYSRL_SCORER_H
#define POLYSRL_SCORER_H

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "polysrl/conll.h"

namespace polysrl {

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

PrfScore prf(long correct, long predicted, long gold);

struct LabelCounts {
  long gold_count = 0;
  long correct = 0;
  long predicted = 0;
  PrfScore score() const { return prf(correct, predicted, gold_count); }
};

// CoNLL 2009 semantic scores: items are argument dependencies plus one
// sense item per predicate. Per-label rows cover argument labels only.
struct EvalReport {
  std::string language;
  PrfScore labeled;
  PrfScore unlabeled;
  std::map<std::string, LabelCounts> per_label;
  double sense_accuracy = 0.0;
  long n_predicates = 0;
};

EvalReport score(const Corpus& gold, const Corpus& predicted);

// CSV rows (label, gold_count, P, R, F1), sorted by gold_count descending.
void per_label_table(const EvalReport& report, std::ostream& out);

struct ImprovementRow {
  std::string label;  // "OVERALL" for the headline delta
  double f1_a = 0.0;
  double f1_b = 0.0;
  double delta = 0.0;
};

// Per-label and overall F1 deltas (B - A).
std::vector<ImprovementRow> compare(const EvalReport& a, const EvalReport& b);
void write_comparison(const std::vector<ImprovementRow>& rows, std::ostream& out);

}  // namespace polysrl

#endif  // POLYSRL_SCORER_H
