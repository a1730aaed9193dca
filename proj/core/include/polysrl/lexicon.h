#ifndef POLYSRL_LEXICON_H
#define POLYSRL_LEXICON_H

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "polysrl/conll.h"

namespace polysrl {

// Lemma -> ordered valid senses, built from training data. For identity-mode
// languages (Czech, Japanese) the "sense" is just the lemma.
class SenseLexicon {
 public:
  SenseLexicon() = default;
  SenseLexicon(std::string language, bool identity_mode)
      : language_(std::move(language)), identity_mode_(identity_mode) {}

  const std::string& language() const { return language_; }
  bool identity_mode() const { return identity_mode_; }

  // Stored list for known lemmas; [lemma] in identity mode; empty otherwise.
  std::vector<std::string> valid_senses(const std::string& lemma) const;
  bool knows(const std::string& lemma) const;
  // First-sense heuristic for lemmas unseen in training.
  std::string fallback_sense(const std::string& lemma) const;

  long count(const std::string& sense) const;
  const std::map<std::string, std::vector<std::string>>& senses() const { return senses_; }
  // All distinct senses, in deterministic order.
  std::vector<std::string> sense_inventory() const;
  double average_senses_per_lemma() const;

  void serialize(std::ostream& out) const;
  static SenseLexicon deserialize(std::istream& in, const std::string& language,
                                  bool identity_mode);

  friend SenseLexicon build_lexicon(const Corpus&,
                                    const std::vector<PredicateInstance>&,
                                    bool);

 private:
  std::string language_;
  bool identity_mode_ = false;
  std::map<std::string, std::vector<std::string>> senses_;  // lemma -> ordered
  std::map<std::string, long> counts_;                      // sense -> frequency
};

bool default_identity_mode(const std::string& language);

SenseLexicon build_lexicon(const Corpus& corpus,
                           const std::vector<PredicateInstance>& instances,
                           bool identity_mode);
inline SenseLexicon build_lexicon(const Corpus& corpus,
                                  const std::vector<PredicateInstance>& instances) {
  return build_lexicon(corpus, instances, default_identity_mode(corpus.language));
}

}  // namespace polysrl

#endif  // POLYSRL_LEXICON_H
