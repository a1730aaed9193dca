#include "polysrl/model.h"

#include <algorithm>
#include <set>

namespace polysrl {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kMono: return "MONO";
    case Variant::kSimplePolyglot: return "SIMPLE_POLYGLOT";
    case Variant::kLangId: return "LANG_ID";
    case Variant::kLangSpecificLstm: return "LANG_SPECIFIC_LSTM";
  }
  return "MONO";
}

Variant variant_from_name(const std::string& name) {
  if (name == "MONO") return Variant::kMono;
  if (name == "SIMPLE_POLYGLOT") return Variant::kSimplePolyglot;
  if (name == "LANG_ID") return Variant::kLangId;
  if (name == "LANG_SPECIFIC_LSTM") return Variant::kLangSpecificLstm;
  throw GraphError("unknown model variant '" + name + "'");
}

void ModelConfig::validate() const {
  if (languages.empty()) throw GraphError("model config: no languages");
  if (shared_layers < 1) throw GraphError("model config: shared_layers must be >= 1");
  if (hidden_size < 1) throw GraphError("model config: hidden_size must be >= 1");
  if (variant == Variant::kLangSpecificLstm && shared_layers < 3) {
    throw GraphError(
        "LANG_SPECIFIC_LSTM needs shared_layers >= 3 (private stack joins at layer 3)");
  }
  if (variant == Variant::kMono && languages.size() != 1) {
    throw GraphError("MONO variant takes exactly one language");
  }
}

int LanguageVocab::arg_index(const std::string& label) const {
  auto it = std::find(arg_labels.begin(), arg_labels.end(), label);
  return it == arg_labels.end() ? -1 : static_cast<int>(it - arg_labels.begin());
}

int LanguageVocab::sense_index(const std::string& sense) const {
  auto it = std::find(senses.begin(), senses.end(), sense);
  return it == senses.end() ? -1 : static_cast<int>(it - senses.begin());
}

LanguageVocab build_vocab(const Corpus& corpus,
                          const std::vector<PredicateInstance>& instances,
                          const SenseLexicon& lexicon) {
  LanguageVocab vocab;
  std::set<std::string> labels;
  for (const PredicateInstance& inst : instances) {
    for (const auto& [pos, label] : inst.gold_args) labels.insert(label);
  }
  vocab.arg_labels.assign(labels.begin(), labels.end());
  vocab.senses = lexicon.sense_inventory();
  return vocab;
}

SrlModel::SrlModel(ModelConfig config, std::map<std::string, LanguageVocab> vocabs,
                   std::map<std::string, SenseLexicon> lexicons)
    : config_(std::move(config)),
      vocabs_(std::move(vocabs)),
      lexicons_(std::move(lexicons)) {
  config_.validate();
  for (const std::string& lang : config_.languages) {
    if (!vocabs_.count(lang)) throw GraphError("no vocabulary for language " + lang);
    if (!lexicons_.count(lang)) throw GraphError("no lexicon for language " + lang);
  }
}

const LanguageVocab& SrlModel::vocab(const std::string& language) const {
  auto it = vocabs_.find(language);
  if (it == vocabs_.end()) throw GraphError("unknown language " + language);
  return it->second;
}

const SenseLexicon& SrlModel::lexicon(const std::string& language) const {
  auto it = lexicons_.find(language);
  if (it == lexicons_.end()) throw GraphError("unknown language " + language);
  return it->second;
}

namespace {

Mat glorot(int rows, int cols, std::mt19937_64& rng) {
  double r = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-r, r);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

}  // namespace

void SrlModel::init_params(uint64_t seed) {
  std::mt19937_64 rng(seed);
  int h = config_.hidden_size;
  auto lstm = [&](const std::string& prefix, int d_in) {
    for (const char* dir : {"fwd", "bwd"}) {
      params_.tensors[prefix + "/" + dir + "/Wx"] = glorot(d_in, 4 * h, rng);
      params_.tensors[prefix + "/" + dir + "/Wh"] = glorot(h, 4 * h, rng);
      params_.tensors[prefix + "/" + dir + "/b"] = Mat::Zero(1, 4 * h);
    }
    params_.tensors[prefix + "/highway/Wr"] = glorot(d_in + 2 * h, 2 * h, rng);
    params_.tensors[prefix + "/highway/br"] = Mat::Zero(1, 2 * h);
    params_.tensors[prefix + "/highway/Wc"] = glorot(d_in, 2 * h, rng);
  };

  params_.tensors["indicator"] = glorot(2, config_.indicator_dim, rng);
  if (config_.uses_lang_id()) {
    for (const std::string& lang : config_.languages) {
      params_.tensors["langid/" + lang] = glorot(1, config_.lang_id_dim, rng);
    }
  }
  for (int l = 0; l < config_.shared_layers; ++l) {
    int d_in = l == 0 ? config_.input_dim() : 2 * h;
    if (config_.variant == Variant::kLangSpecificLstm && l == 2) d_in = 4 * h;
    lstm("shared/layer" + std::to_string(l), d_in);
  }
  if (config_.variant == Variant::kLangSpecificLstm) {
    for (const std::string& lang : config_.languages) {
      lstm("private/" + lang + "/layer0", config_.input_dim());
      lstm("private/" + lang + "/layer1", 2 * h);
    }
  }
  for (const std::string& lang : config_.languages) {
    const LanguageVocab& v = vocab(lang);
    int n_labels = static_cast<int>(v.arg_labels.size()) + 1;  // + NULL
    params_.tensors["head/" + lang + "/arg/W"] = glorot(2 * h, n_labels, rng);
    params_.tensors["head/" + lang + "/arg/b"] = Mat::Zero(1, n_labels);
    int n_senses = std::max<int>(1, static_cast<int>(v.senses.size()));
    params_.tensors["head/" + lang + "/sense/W"] = glorot(2 * h, n_senses, rng);
    params_.tensors["head/" + lang + "/sense/b"] = Mat::Zero(1, n_senses);
  }
}

int SrlModel::graph_param(Graph& g, const std::string& name) const {
  auto it = params_.tensors.find(name);
  if (it == params_.tensors.end()) throw GraphError("missing parameter " + name);
  return g.param(name, it->second);
}

int SrlModel::build_input(Graph& g, const Sentence& sentence, int predicate_index,
                          const EmbeddingTable& embeddings,
                          const std::string& language) const {
  if (std::find(config_.languages.begin(), config_.languages.end(), language) ==
      config_.languages.end()) {
    throw GraphError("unknown language code " + language);
  }
  if (embeddings.dim() != config_.embedding_dim) {
    throw GraphError("embedding table dim " + std::to_string(embeddings.dim()) +
                     " does not match configured dim " +
                     std::to_string(config_.embedding_dim));
  }
  int n = static_cast<int>(sentence.tokens.size());
  Mat emb(n, embeddings.dim());
  for (int t = 0; t < n; ++t) {
    emb.row(t) = embeddings.lookup(sentence.tokens[t].form).transpose();
  }
  int x = g.constant(emb);

  int indicator = graph_param(g, "indicator");
  int ind_rows = -1;
  for (int t = 0; t < n; ++t) {
    int row = sentence.tokens[t].id == predicate_index ? 1 : 0;
    int slice = g.slice_rows(indicator, row, row + 1);
    ind_rows = t == 0 ? slice : g.concat_rows(ind_rows, slice);
  }
  x = g.concat_cols(x, ind_rows);

  if (config_.uses_lang_id()) {
    int ones = g.constant(Mat::Ones(n, 1));
    x = g.concat_cols(x, g.matmul(ones, graph_param(g, "langid/" + language)));
  }
  return x;
}

int SrlModel::lstm_direction(Graph& g, int input, const std::string& prefix,
                             bool reverse) const {
  int n = g.rows(input);
  int h = config_.hidden_size;
  int wx = graph_param(g, prefix + "/Wx");
  int wh = graph_param(g, prefix + "/Wh");
  int b = graph_param(g, prefix + "/b");
  int xw = g.add(g.matmul(input, wx), b);  // n x 4h, bias broadcast

  int h_prev = g.constant(Mat::Zero(1, h));
  int c_prev = g.constant(Mat::Zero(1, h));
  std::vector<int> states(n);
  for (int step = 0; step < n; ++step) {
    int t = reverse ? n - 1 - step : step;
    int pre = g.add(g.slice_rows(xw, t, t + 1), g.matmul(h_prev, wh));
    int i_gate = g.sigmoid(g.slice_cols(pre, 0, h));
    int f_gate = g.sigmoid(g.slice_cols(pre, h, 2 * h));
    int o_gate = g.sigmoid(g.slice_cols(pre, 2 * h, 3 * h));
    int g_cell = g.tanh(g.slice_cols(pre, 3 * h, 4 * h));
    c_prev = g.add(g.mul(f_gate, c_prev), g.mul(i_gate, g_cell));
    h_prev = g.mul(o_gate, g.tanh(c_prev));
    states[t] = h_prev;
  }
  int out = states[0];
  for (int t = 1; t < n; ++t) out = g.concat_rows(out, states[t]);
  return out;
}

int SrlModel::bilstm_layer(Graph& g, int input, const std::string& prefix) const {
  int fwd = lstm_direction(g, input, prefix + "/fwd", false);
  int bwd = lstm_direction(g, input, prefix + "/bwd", true);
  int hidden = g.concat_cols(fwd, bwd);  // n x 2h
  // Highway gate over [x; h]; carry path is a linear transform of x.
  int gate = g.sigmoid(g.add(g.matmul(g.concat_cols(input, hidden),
                                      graph_param(g, prefix + "/highway/Wr")),
                             graph_param(g, prefix + "/highway/br")));
  int carry = g.matmul(input, graph_param(g, prefix + "/highway/Wc"));
  int ones = g.constant(Mat::Ones(g.rows(gate), g.cols(gate)));
  int inv_gate = g.add(ones, g.scale(gate, -1.0));
  return g.add(g.mul(gate, hidden), g.mul(inv_gate, carry));
}

int SrlModel::encode(Graph& g, int input, const std::string& language, bool train,
                     std::mt19937_64* dropout_rng) const {
  auto maybe_dropout = [&](int node) {
    if (train && dropout_rng && config_.dropout_rate > 0.0) {
      return g.dropout(node, config_.dropout_rate, *dropout_rng);
    }
    return node;
  };

  int private_out = -1;
  if (config_.variant == Variant::kLangSpecificLstm) {
    if (!lexicons_.count(language)) throw GraphError("unknown language " + language);
    int p = input;
    for (int l = 0; l < 2; ++l) {
      p = bilstm_layer(g, p, "private/" + language + "/layer" + std::to_string(l));
      p = maybe_dropout(p);
    }
    private_out = p;
  }

  int x = input;
  for (int l = 0; l < config_.shared_layers; ++l) {
    if (config_.variant == Variant::kLangSpecificLstm && l == 2) {
      x = g.concat_cols(x, private_out);
    }
    x = bilstm_layer(g, x, "shared/layer" + std::to_string(l));
    x = maybe_dropout(x);
  }
  return x;
}

int SrlModel::sense_logits(Graph& g, int hidden, const PredicateInstance& instance,
                           const std::string& language,
                           const std::vector<std::string>& valid,
                           Mat* mask_out) const {
  const LanguageVocab& v = vocab(language);
  int h_pred = g.slice_rows(hidden, instance.predicate_index - 1, instance.predicate_index);
  int logits = g.add(g.matmul(h_pred, graph_param(g, "head/" + language + "/sense/W")),
                     graph_param(g, "head/" + language + "/sense/b"));
  Mat mask = Mat::Ones(1, g.cols(logits));
  for (const std::string& s : valid) {
    int idx = v.sense_index(s);
    if (idx >= 0) mask(0, idx) = 0.0;
  }
  *mask_out = mask;
  return logits;
}

int SrlModel::loss(Graph& g, const Sentence& sentence,
                   const PredicateInstance& instance,
                   const EmbeddingTable& embeddings, const std::string& language,
                   bool train, std::mt19937_64* dropout_rng) const {
  const LanguageVocab& v = vocab(language);
  const SenseLexicon& lex = lexicon(language);
  int n = static_cast<int>(sentence.tokens.size());

  int input = build_input(g, sentence, instance.predicate_index, embeddings, language);
  int hidden = encode(g, input, language, train, dropout_rng);

  int arg_logits = g.add(g.matmul(hidden, graph_param(g, "head/" + language + "/arg/W")),
                         graph_param(g, "head/" + language + "/arg/b"));
  std::vector<int> gold(n, v.null_index());
  for (const auto& [pos, label] : instance.gold_args) {
    int idx = v.arg_index(label);
    if (idx < 0) {
      throw GraphError("gold label '" + label + "' outside " + language + " label set");
    }
    gold[pos - 1] = idx;
  }
  int arg_term = g.scale(g.cross_entropy(g.softmax_rows(arg_logits), gold), 1.0 / n);

  if (lex.identity_mode()) return arg_term;  // sense term identically 0

  const std::string& lemma = sentence.tokens[instance.predicate_index - 1].lemma;
  std::vector<std::string> valid = lex.valid_senses(lemma);
  if (valid.empty()) {
    throw GraphError("lemma '" + lemma + "' unknown to lexicon during training");
  }
  int gold_sense = v.sense_index(instance.gold_sense);
  if (gold_sense < 0 ||
      std::find(valid.begin(), valid.end(), instance.gold_sense) == valid.end()) {
    throw GraphError("gold sense '" + instance.gold_sense +
                     "' outside lexicon for lemma '" + lemma + "'");
  }
  Mat mask;
  int logits = sense_logits(g, hidden, instance, language, valid, &mask);
  int sense_term =
      g.cross_entropy(g.masked_softmax_rows(logits, mask), {gold_sense});
  return g.add(arg_term, sense_term);
}

double SrlModel::loss_value(const Sentence& sentence,
                            const PredicateInstance& instance,
                            const EmbeddingTable& embeddings,
                            const std::string& language) const {
  Graph g;
  return g.value(loss(g, sentence, instance, embeddings, language))(0, 0);
}

LabeledPrediction SrlModel::predict(const Sentence& sentence,
                                    const PredicateInstance& instance,
                                    const EmbeddingTable& embeddings,
                                    const std::string& language) const {
  const LanguageVocab& v = vocab(language);
  const SenseLexicon& lex = lexicon(language);
  int n = static_cast<int>(sentence.tokens.size());

  Graph g;
  int input = build_input(g, sentence, instance.predicate_index, embeddings, language);
  int hidden = encode(g, input, language);

  LabeledPrediction pred;
  int arg_logits = g.add(g.matmul(hidden, graph_param(g, "head/" + language + "/arg/W")),
                         graph_param(g, "head/" + language + "/arg/b"));
  const Mat& scores = g.value(arg_logits);
  for (int t = 0; t < n; ++t) {
    int best;
    scores.row(t).maxCoeff(&best);
    if (best != v.null_index()) pred.args[t + 1] = v.arg_labels[best];
  }

  const std::string& lemma = sentence.tokens[instance.predicate_index - 1].lemma;
  std::vector<std::string> valid = lex.valid_senses(lemma);
  if (valid.empty()) {
    pred.sense = lex.fallback_sense(lemma);
    return pred;
  }
  if (valid.size() == 1) {
    pred.sense = valid[0];
    return pred;
  }
  bool any_in_vocab = false;
  for (const std::string& s : valid) any_in_vocab |= v.sense_index(s) >= 0;
  if (!any_in_vocab) {
    pred.sense = lex.fallback_sense(lemma);
    return pred;
  }
  Mat mask;
  int logits = sense_logits(g, hidden, instance, language, valid, &mask);
  const Mat& sense_scores = g.value(logits);
  int best = -1;
  double best_score = 0.0;
  for (int i = 0; i < sense_scores.cols(); ++i) {
    if (mask(0, i) != 0.0) continue;
    if (best < 0 || sense_scores(0, i) > best_score) {
      best = i;
      best_score = sense_scores(0, i);
    }
  }
  pred.sense = v.senses[best];
  return pred;
}

Mat SrlModel::input_matrix(const Sentence& sentence, int predicate_index,
                           const EmbeddingTable& embeddings,
                           const std::string& language) const {
  Graph g;
  return g.value(build_input(g, sentence, predicate_index, embeddings, language));
}

Mat SrlModel::encode_matrix(const Mat& input, const std::string& language) const {
  Graph g;
  return g.value(encode(g, g.constant(input), language));
}

}  // namespace polysrl
