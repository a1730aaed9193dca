#ifndef POLYSRL_MODEL_H
#define POLYSRL_MODEL_H

#include <map>
#include <random>
#include <string>
#include <vector>

#include "polysrl/conll.h"
#include "polysrl/embeddings.h"
#include "polysrl/graph.h"
#include "polysrl/lexicon.h"

namespace polysrl {

enum class Variant { kMono, kSimplePolyglot, kLangId, kLangSpecificLstm };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct ModelConfig {
  Variant variant = Variant::kMono;
  int shared_layers = 4;
  int hidden_size = 300;  // per direction
  int indicator_dim = 2;
  int lang_id_dim = 8;
  double dropout_rate = 0.1;
  int embedding_dim = 100;
  std::vector<std::string> languages;

  bool uses_lang_id() const {
    return variant == Variant::kLangId || variant == Variant::kLangSpecificLstm;
  }
  int input_dim() const {
    return embedding_dim + indicator_dim + (uses_lang_id() ? lang_id_dim : 0);
  }
  void validate() const;
};

// Per-language output spaces. Argument labels get a trailing NULL slot;
// label sets of different languages are entirely separate heads.
struct LanguageVocab {
  std::vector<std::string> arg_labels;  // NULL excluded; its index is size()
  std::vector<std::string> senses;

  int null_index() const { return static_cast<int>(arg_labels.size()); }
  int arg_index(const std::string& label) const;    // -1 if unknown
  int sense_index(const std::string& sense) const;  // -1 if unknown
};

LanguageVocab build_vocab(const Corpus& corpus,
                          const std::vector<PredicateInstance>& instances,
                          const SenseLexicon& lexicon);

struct ModelParams {
  std::map<std::string, Mat> tensors;
};

class SrlModel {
 public:
  SrlModel() = default;
  SrlModel(ModelConfig config, std::map<std::string, LanguageVocab> vocabs,
           std::map<std::string, SenseLexicon> lexicons);

  void init_params(uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }
  const std::map<std::string, LanguageVocab>& vocabs() const { return vocabs_; }
  const std::map<std::string, SenseLexicon>& lexicons() const { return lexicons_; }
  const LanguageVocab& vocab(const std::string& language) const;
  const SenseLexicon& lexicon(const std::string& language) const;

  // Input row t = embedding(token t) ++ predicate-indicator ++ language ID.
  int build_input(Graph& g, const Sentence& sentence, int predicate_index,
                  const EmbeddingTable& embeddings,
                  const std::string& language) const;

  // Shared highway-biLSTM stack; for the language-specific variant the
  // private 2-layer stack joins the shared stack at layer 3's input.
  int encode(Graph& g, int input, const std::string& language,
             bool train = false, std::mt19937_64* dropout_rng = nullptr) const;

  // Scalar training loss: mean per-token argument cross-entropy plus the
  // masked predicate-sense cross-entropy (omitted for identity-sense
  // languages).
  int loss(Graph& g, const Sentence& sentence, const PredicateInstance& instance,
           const EmbeddingTable& embeddings, const std::string& language,
           bool train = false, std::mt19937_64* dropout_rng = nullptr) const;
  double loss_value(const Sentence& sentence, const PredicateInstance& instance,
                    const EmbeddingTable& embeddings,
                    const std::string& language) const;

  LabeledPrediction predict(const Sentence& sentence,
                            const PredicateInstance& instance,
                            const EmbeddingTable& embeddings,
                            const std::string& language) const;

  // Convenience wrappers used by tests.
  Mat input_matrix(const Sentence& sentence, int predicate_index,
                   const EmbeddingTable& embeddings,
                   const std::string& language) const;
  Mat encode_matrix(const Mat& input, const std::string& language) const;

 private:
  int lstm_direction(Graph& g, int input, const std::string& prefix,
                     bool reverse) const;
  int bilstm_layer(Graph& g, int input, const std::string& prefix) const;
  int graph_param(Graph& g, const std::string& name) const;
  int sense_logits(Graph& g, int hidden, const PredicateInstance& instance,
                   const std::string& language,
                   const std::vector<std::string>& valid,
                   Mat* mask_out) const;

  ModelConfig config_;
  std::map<std::string, LanguageVocab> vocabs_;
  std::map<std::string, SenseLexicon> lexicons_;
  ModelParams params_;
};

}  // namespace polysrl

#endif  // POLYSRL_MODEL_H
