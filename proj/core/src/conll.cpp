#include "polysrl/conll.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace polysrl {

namespace {

const char kEmpty[] = "_";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

void finish_sentence(std::vector<Token>& tokens, const std::string& language,
                     long first_line, Corpus& corpus) {
  if (tokens.empty()) return;
  int n_preds = 0;
  for (const auto& t : tokens) n_preds += t.fill_pred ? 1 : 0;
  size_t apred_cols = tokens.front().apreds.size();
  for (const auto& t : tokens) {
    if (t.apreds.size() != apred_cols) {
      throw ConllError("sentence starting at line " + std::to_string(first_line) +
                       ": inconsistent APRED column count (" +
                       std::to_string(t.apreds.size()) + " vs " +
                       std::to_string(apred_cols) + ")");
    }
  }
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].id != static_cast<int>(i) + 1) {
      throw ConllError("sentence starting at line " + std::to_string(first_line) +
                       ": token ids not contiguous from 1");
    }
  }
  Sentence sent;
  sent.tokens = std::move(tokens);
  sent.language = language;
  corpus.sentences.push_back(std::move(sent));
  tokens.clear();
}

}  // namespace

int Sentence::predicate_count() const {
  int n = 0;
  for (const auto& t : tokens) n += t.fill_pred ? 1 : 0;
  return n;
}

std::vector<int> Sentence::predicate_positions() const {
  std::vector<int> positions;
  for (const auto& t : tokens)
    if (t.fill_pred) positions.push_back(t.id);
  return positions;
}

Corpus parse_conll09(std::istream& in, const std::string& language) {
  Corpus corpus;
  corpus.language = language;
  std::vector<Token> tokens;
  std::string line;
  long line_no = 0;
  long sentence_first_line = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish_sentence(tokens, language, sentence_first_line, corpus);
      sentence_first_line = line_no + 1;
      continue;
    }
    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() < 14) {
      throw ConllError("line " + std::to_string(line_no) + ": expected >=14 columns, got " +
                       std::to_string(fields.size()));
    }
    Token tok;
    tok.raw.assign(fields.begin(), fields.begin() + 12);
    try {
      tok.id = std::stoi(fields[0]);
    } catch (const std::exception&) {
      throw ConllError("line " + std::to_string(line_no) + ": bad token id '" + fields[0] + "'");
    }
    tok.form = fields[1];
    tok.lemma = fields[2];
    tok.pos = fields[4];
    tok.fill_pred = fields[12] == "Y";
    if (tok.fill_pred) {
      if (fields[13] == kEmpty || fields[13].empty()) {
        throw ConllError("line " + std::to_string(line_no) + ": FILLPRED=Y with empty PRED");
      }
      tok.pred_sense = fields[13];
    } else if (fields[13] != kEmpty && !fields[13].empty()) {
      throw ConllError("line " + std::to_string(line_no) + ": PRED set without FILLPRED=Y");
    }
    for (size_t c = 14; c < fields.size(); ++c) {
      if (fields[c] == kEmpty || fields[c].empty()) {
        tok.apreds.push_back(std::nullopt);
      } else {
        tok.apreds.push_back(fields[c]);
      }
    }
    if (tokens.empty()) sentence_first_line = line_no;
    tokens.push_back(std::move(tok));
  }
  finish_sentence(tokens, language, sentence_first_line, corpus);
  // APRED width must match the sentence's predicate count.
  for (size_t s = 0; s < corpus.sentences.size(); ++s) {
    const Sentence& sent = corpus.sentences[s];
    int n_preds = sent.predicate_count();
    if (!sent.tokens.empty() &&
        static_cast<int>(sent.tokens.front().apreds.size()) != n_preds) {
      throw ConllError("sentence " + std::to_string(s + 1) + ": " +
                       std::to_string(sent.tokens.front().apreds.size()) +
                       " APRED columns but " + std::to_string(n_preds) + " predicates");
    }
  }
  return corpus;
}

Corpus parse_conll09_file(const std::string& path, const std::string& language) {
  std::ifstream in(path);
  if (!in) throw ConllError("cannot open " + path);
  return parse_conll09(in, language);
}

std::vector<PredicateInstance> extract_instances(const Corpus& corpus) {
  std::vector<PredicateInstance> instances;
  for (size_t s = 0; s < corpus.sentences.size(); ++s) {
    const Sentence& sent = corpus.sentences[s];
    std::vector<int> pred_positions = sent.predicate_positions();
    for (size_t k = 0; k < pred_positions.size(); ++k) {
      PredicateInstance inst;
      inst.sentence_index = static_cast<int>(s);
      inst.predicate_index = pred_positions[k];
      inst.gold_sense = *sent.tokens[pred_positions[k] - 1].pred_sense;
      for (const Token& t : sent.tokens) {
        if (t.apreds[k]) inst.gold_args[t.id] = *t.apreds[k];
      }
      instances.push_back(std::move(inst));
    }
  }
  return instances;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.n_sentences = static_cast<long>(corpus.sentences.size());
  for (const Sentence& sent : corpus.sentences) {
    int n = sent.predicate_count();
    if (n > 0) ++stats.n_sentences_with_pred;
    stats.n_predicates += n;
  }
  return stats;
}

Corpus apply_predictions(const Corpus& corpus,
                         const std::vector<LabeledPrediction>& predictions) {
  Corpus out = corpus;
  size_t next = 0;
  for (Sentence& sent : out.sentences) {
    std::vector<int> pred_positions = sent.predicate_positions();
    for (size_t k = 0; k < pred_positions.size(); ++k) {
      if (next >= predictions.size()) {
        throw ConllError("missing prediction for instance " + std::to_string(next));
      }
      const LabeledPrediction& pred = predictions[next++];
      sent.tokens[pred_positions[k] - 1].pred_sense = pred.sense;
      for (Token& t : sent.tokens) {
        auto it = pred.args.find(t.id);
        t.apreds[k] = it == pred.args.end()
                          ? std::nullopt
                          : std::optional<std::string>(it->second);
      }
    }
  }
  if (next != predictions.size()) {
    throw ConllError("got " + std::to_string(predictions.size()) +
                     " predictions for " + std::to_string(next) + " instances");
  }
  return out;
}

void write_conll09(const Corpus& corpus, std::ostream& out) {
  for (const Sentence& sent : corpus.sentences) {
    for (const Token& t : sent.tokens) {
      for (size_t c = 0; c < t.raw.size(); ++c) {
        if (c) out << '\t';
        out << t.raw[c];
      }
      out << '\t' << (t.fill_pred ? "Y" : kEmpty);
      out << '\t' << (t.pred_sense ? *t.pred_sense : kEmpty);
      for (const auto& a : t.apreds) out << '\t' << (a ? *a : kEmpty);
      out << '\n';
    }
    out << '\n';
  }
}

void write_conll09(const Corpus& corpus,
                   const std::vector<LabeledPrediction>& predictions,
                   std::ostream& out) {
  write_conll09(apply_predictions(corpus, predictions), out);
}

}  // namespace polysrl
