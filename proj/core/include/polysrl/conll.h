#ifndef POLYSRL_CONLL_H
#define POLYSRL_CONLL_H

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polysrl {

// CoNLL 2009 token row. The first 12 columns (ID..PDEPREL) are kept
// verbatim in `raw` so that files round-trip losslessly; the model only
// reads form, lemma and the semantic columns.
struct Token {
  int id = 0;  // 1-based position
  std::string form;
  std::string lemma;
  std::string pos;  // carried but unused by the model
  bool fill_pred = false;
  std::optional<std::string> pred_sense;
  std::vector<std::optional<std::string>> apreds;  // one slot per predicate
  std::vector<std::string> raw;                    // columns 1..12 verbatim
};

struct Sentence {
  std::vector<Token> tokens;
  std::string language;  // ISO 639-3

  int predicate_count() const;
  // 1-based token positions of predicates, in surface order.
  std::vector<int> predicate_positions() const;
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::string language;
};

// One training instance per marked predicate.
struct PredicateInstance {
  int sentence_index = 0;   // index into Corpus::sentences
  int predicate_index = 0;  // 1-based token position
  std::string gold_sense;
  std::map<int, std::string> gold_args;  // token position -> label; absent = NULL
};

struct CorpusStats {
  long n_sentences = 0;
  long n_sentences_with_pred = 0;
  long n_predicates = 0;
};

struct LabeledPrediction {
  std::string sense;
  std::map<int, std::string> args;  // NULL omitted
};

class ConllError : public std::runtime_error {
 public:
  explicit ConllError(const std::string& what) : std::runtime_error(what) {}
};

Corpus parse_conll09(std::istream& in, const std::string& language);
Corpus parse_conll09_file(const std::string& path, const std::string& language);

std::vector<PredicateInstance> extract_instances(const Corpus& corpus);

CorpusStats corpus_stats(const Corpus& corpus);

// Returns a copy of `corpus` whose PRED/APRED cells carry `predictions`
// (indexed like extract_instances). Every instance must be covered.
Corpus apply_predictions(const Corpus& corpus,
                         const std::vector<LabeledPrediction>& predictions);

void write_conll09(const Corpus& corpus, std::ostream& out);
void write_conll09(const Corpus& corpus,
                   const std::vector<LabeledPrediction>& predictions,
                   std::ostream& out);

}  // namespace polysrl

#endif  // POLYSRL_CONLL_H
