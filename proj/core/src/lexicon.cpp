#include "polysrl/lexicon.h"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace polysrl {

namespace {

// Sense suffix after the last '.', numeric when parseable.
std::pair<bool, long> numeric_suffix(const std::string& sense) {
  auto dot = sense.rfind('.');
  if (dot == std::string::npos || dot + 1 == sense.size()) return {false, 0};
  const std::string suffix = sense.substr(dot + 1);
  for (char c : suffix)
    if (!std::isdigit(static_cast<unsigned char>(c))) return {false, 0};
  return {true, std::stol(suffix)};
}

}  // namespace

bool default_identity_mode(const std::string& language) {
  return language == "ces" || language == "jpn";
}

SenseLexicon build_lexicon(const Corpus& corpus,
                           const std::vector<PredicateInstance>& instances,
                           bool identity_mode) {
  SenseLexicon lex(corpus.language, identity_mode);
  std::map<std::string, std::set<std::string>> by_lemma;
  for (const PredicateInstance& inst : instances) {
    const Sentence& sent = corpus.sentences[inst.sentence_index];
    const std::string& lemma = sent.tokens[inst.predicate_index - 1].lemma;
    const std::string& sense = identity_mode ? lemma : inst.gold_sense;
    by_lemma[lemma].insert(sense);
    ++lex.counts_[sense];
  }
  for (auto& [lemma, sense_set] : by_lemma) {
    std::vector<std::string> ordered(sense_set.begin(), sense_set.end());
    // Ascending sense suffix, ties broken by corpus frequency descending.
    std::stable_sort(ordered.begin(), ordered.end(),
                     [&lex](const std::string& a, const std::string& b) {
                       auto [an, av] = numeric_suffix(a);
                       auto [bn, bv] = numeric_suffix(b);
                       if (an && bn) {
                         if (av != bv) return av < bv;
                       } else if (a != b) {
                         return a < b;
                       }
                       long ca = lex.counts_.at(a), cb = lex.counts_.at(b);
                       if (ca != cb) return ca > cb;
                       return a < b;
                     });
    lex.senses_[lemma] = std::move(ordered);
  }
  return lex;
}

bool SenseLexicon::knows(const std::string& lemma) const {
  return senses_.count(lemma) > 0;
}

std::vector<std::string> SenseLexicon::valid_senses(const std::string& lemma) const {
  auto it = senses_.find(lemma);
  if (it != senses_.end()) return it->second;
  if (identity_mode_) return {lemma};
  return {};
}

std::string SenseLexicon::fallback_sense(const std::string& lemma) const {
  if (identity_mode_) return lemma;
  return lemma + ".01";
}

long SenseLexicon::count(const std::string& sense) const {
  auto it = counts_.find(sense);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<std::string> SenseLexicon::sense_inventory() const {
  std::set<std::string> all;
  for (const auto& [lemma, list] : senses_) all.insert(list.begin(), list.end());
  return {all.begin(), all.end()};
}

double SenseLexicon::average_senses_per_lemma() const {
  if (senses_.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [lemma, list] : senses_) total += static_cast<double>(list.size());
  return total / static_cast<double>(senses_.size());
}

void SenseLexicon::serialize(std::ostream& out) const {
  for (const auto& [lemma, list] : senses_) {
    for (const std::string& sense : list) {
      out << lemma << '\t' << sense << '\t' << count(sense) << '\n';
    }
  }
}

SenseLexicon SenseLexicon::deserialize(std::istream& in, const std::string& language,
                                       bool identity_mode) {
  SenseLexicon lex(language, identity_mode);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string lemma, sense, count_str;
    if (!std::getline(row, lemma, '\t') || !std::getline(row, sense, '\t') ||
        !std::getline(row, count_str)) {
      throw ConllError("lexicon line " + std::to_string(line_no) + ": expected 3 fields");
    }
    lex.senses_[lemma].push_back(sense);
    lex.counts_[sense] = std::stol(count_str);
  }
  return lex;
}

}  // namespace polysrl
