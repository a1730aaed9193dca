#include <doctest.h>

#include <random>
#include <sstream>

#include "polysrl/checkpoint.h"
#include "polysrl/model.h"
#include "testutil.h"

using namespace polysrl;
namespace tu = polysrl::testutil;

namespace {

// Desk-scale model over the fixture vocabulary.
struct Fixture {
  Corpus corpus;
  std::vector<PredicateInstance> instances;
  EmbeddingTable embeddings;
  SrlModel model;

  static Fixture make(Variant variant, int hidden = 6, int emb_dim = 4,
                      uint64_t seed = 1, bool identity = false) {
    Fixture f{tu::overfit_corpus(12, seed), {}, tu::fixture_embeddings(emb_dim, seed), {}};
    f.instances = extract_instances(f.corpus);

    ModelConfig config;
    config.variant = variant;
    config.shared_layers = 3;
    config.hidden_size = hidden;
    config.embedding_dim = emb_dim;
    config.dropout_rate = 0.0;
    config.languages = variant == Variant::kMono
                           ? std::vector<std::string>{"xxx"}
                           : std::vector<std::string>{"xxx", "eng"};

    std::map<std::string, LanguageVocab> vocabs;
    std::map<std::string, SenseLexicon> lexicons;
    for (const std::string& lang : config.languages) {
      Corpus c = f.corpus;
      c.language = lang;
      SenseLexicon lex = build_lexicon(c, f.instances, identity);
      vocabs[lang] = build_vocab(c, f.instances, lex);
      lexicons[lang] = std::move(lex);
    }
    f.model = SrlModel(config, std::move(vocabs), std::move(lexicons));
    f.model.init_params(seed);
    return f;
  }
};

Sentence three_tokens() {
  Corpus c = tu::parse_text(tu::render({{{{"a0", "a0", false, "", {"A0"}},
                                          {"v1", "v1", true, "v1.01", {"_"}},
                                          {"x", "x", false, "", {"_"}}}}}));
  return c.sentences[0];
}

}  // namespace

TEST_CASE("input assembly shapes") {
  Sentence sent = three_tokens();

  SUBCASE("MONO: embedding + indicator") {
    auto f = Fixture::make(Variant::kMono, 4, 100);
    Mat input = f.model.input_matrix(sent, 2, tu::fixture_embeddings(100, 3), "xxx");
    CHECK(input.rows() == 3);
    CHECK(input.cols() == 102);
  }
  SUBCASE("LANG_ID adds the language vector") {
    auto f = Fixture::make(Variant::kLangId, 4, 100);
    Mat input = f.model.input_matrix(sent, 2, tu::fixture_embeddings(100, 3), "xxx");
    CHECK(input.cols() == 110);
  }
  SUBCASE("indicator rows differ only at the predicate") {
    auto f = Fixture::make(Variant::kMono);
    Mat with_p2 = f.model.input_matrix(sent, 2, f.embeddings, "xxx");
    Mat with_p3 = f.model.input_matrix(sent, 3, f.embeddings, "xxx");
    int emb = f.embeddings.dim();
    // Rows 0 agree (non-predicate in both), rows 1 and 2 flip.
    CHECK((with_p2.row(0) - with_p3.row(0)).norm() == 0.0);
    CHECK((with_p2.row(1).segment(emb, 2) - with_p3.row(2).segment(emb, 2)).norm() == 0.0);
    CHECK((with_p2.row(1) - with_p3.row(1)).segment(emb, 2).norm() > 0.0);
  }
  SUBCASE("unknown language is an error") {
    auto f = Fixture::make(Variant::kMono);
    CHECK_THROWS_AS(f.model.input_matrix(sent, 2, f.embeddings, "zzz"), GraphError);
  }
}

TEST_CASE("encoder degenerate and structural cases") {
  auto f = Fixture::make(Variant::kMono, 5);
  int d = f.model.config().input_dim();

  SUBCASE("single-step sequence") {
    Mat out = f.model.encode_matrix(Mat::Random(1, d), "xxx");
    CHECK(out.rows() == 1);
    CHECK(out.cols() == 10);
  }
  SUBCASE("zero input with zero biases gives zero states") {
    for (auto& [name, tensor] : f.model.params().tensors) {
      if (name.find("/b") != std::string::npos || name.find("Wc") != std::string::npos) {
        tensor.setZero();
      }
    }
    // Zero LSTM states and zero carry leave the highway mix at zero.
    Mat out = f.model.encode_matrix(Mat::Zero(4, d), "xxx");
    CHECK(out.norm() == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("swapping direction parameters mirrors a reversed input") {
    Mat input = Mat::Random(5, d);
    Mat forward_out = f.model.encode_matrix(input, "xxx");

    SrlModel& m = f.model;
    for (int l = 0; l < m.config().shared_layers; ++l) {
      std::string base = "shared/layer" + std::to_string(l) + "/";
      for (const char* w : {"Wx", "Wh", "b"}) {
        std::swap(m.params().tensors.at(base + "fwd/" + w),
                  m.params().tensors.at(base + "bwd/" + w));
      }
      // Highway gate reads [x; h_fwd; h_bwd]: swap the gate rows that act
      // on the two direction halves, and the corresponding output columns.
      int h = m.config().hidden_size;
      auto swap_row_halves = [h](Mat& t, int offset) {
        Mat top = t.middleRows(offset, h);
        t.middleRows(offset, h) = t.middleRows(offset + h, h);
        t.middleRows(offset + h, h) = top;
      };
      Mat& wr = m.params().tensors.at(base + "highway/Wr");
      int d_in = static_cast<int>(wr.rows()) - 2 * h;
      swap_row_halves(wr, d_in);
      for (const char* name : {"highway/Wr", "highway/br", "highway/Wc"}) {
        Mat& t = m.params().tensors.at(base + name);
        Mat left = t.leftCols(h);
        t.leftCols(h) = t.middleCols(h, h);
        t.middleCols(h, h) = left;
      }
      // From layer 1 on, the incoming activations carry swapped direction
      // halves too, so the input-facing rows must swap along with them.
      if (d_in == 2 * h) {
        swap_row_halves(wr, 0);
        swap_row_halves(m.params().tensors.at(base + "highway/Wc"), 0);
        for (const char* dir : {"fwd", "bwd"}) {
          swap_row_halves(m.params().tensors.at(base + dir + "/Wx"), 0);
        }
      }
    }
    Mat reversed_out = m.encode_matrix(input.colwise().reverse(), "xxx");
    // Undo: reverse rows, swap direction halves.
    Mat undone(5, reversed_out.cols());
    int h = m.config().hidden_size;
    for (int t = 0; t < 5; ++t) {
      undone.row(t).segment(0, h) = reversed_out.row(4 - t).segment(h, h);
      undone.row(t).segment(h, h) = reversed_out.row(4 - t).segment(0, h);
    }
    CHECK((forward_out - undone).norm() == doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("prediction logic") {
  auto f = Fixture::make(Variant::kMono);
  const Sentence& sent = f.corpus.sentences[f.instances[0].sentence_index];
  const PredicateInstance& inst = f.instances[0];

  SUBCASE("all-NULL argmax leaves args empty") {
    const LanguageVocab& v = f.model.vocab("xxx");
    Mat& w = f.model.params().tensors.at("head/xxx/arg/W");
    Mat& b = f.model.params().tensors.at("head/xxx/arg/b");
    w.setZero();
    b.setZero();
    b(0, v.null_index()) = 10.0;
    LabeledPrediction pred = f.model.predict(sent, inst, f.embeddings, "xxx");
    CHECK(pred.args.empty());
  }
  SUBCASE("masked sense is always within valid_senses") {
    std::mt19937_64 rng(5);
    for (int draw = 0; draw < 50; ++draw) {
      f.model.init_params(rng());
      LabeledPrediction pred = f.model.predict(sent, inst, f.embeddings, "xxx");
      const std::string& lemma = sent.tokens[inst.predicate_index - 1].lemma;
      auto valid = f.model.lexicon("xxx").valid_senses(lemma);
      CHECK(std::find(valid.begin(), valid.end(), pred.sense) != valid.end());
    }
  }
  SUBCASE("argument labels come from the language's own label set") {
    std::mt19937_64 rng(7);
    const LanguageVocab& v = f.model.vocab("xxx");
    for (int draw = 0; draw < 20; ++draw) {
      f.model.init_params(rng());
      LabeledPrediction pred = f.model.predict(sent, inst, f.embeddings, "xxx");
      for (const auto& [pos, label] : pred.args) {
        CHECK(v.arg_index(label) >= 0);
      }
    }
  }
  SUBCASE("unseen lemma falls back to the first-sense heuristic") {
    Sentence unseen = sent;
    unseen.tokens[inst.predicate_index - 1].lemma = "flurbl";
    unseen.tokens[inst.predicate_index - 1].form = "flurbl";
    LabeledPrediction pred = f.model.predict(unseen, inst, f.embeddings, "xxx");
    CHECK(pred.sense == "flurbl.01");
  }
  SUBCASE("identity-mode sense is the lemma") {
    auto fi = Fixture::make(Variant::kMono, 6, 4, 1, /*identity=*/true);
    const Sentence& s = fi.corpus.sentences[fi.instances[0].sentence_index];
    LabeledPrediction pred = fi.model.predict(s, fi.instances[0], fi.embeddings, "xxx");
    CHECK(pred.sense == s.tokens[fi.instances[0].predicate_index - 1].lemma);
  }
}

TEST_CASE("loss values") {
  auto f = Fixture::make(Variant::kMono);
  const Sentence& sent = f.corpus.sentences[f.instances[0].sentence_index];
  const PredicateInstance& inst = f.instances[0];

  SUBCASE("uniform logits give ln(K) per token") {
    // Zeroing every parameter leaves all argument logits equal.
    for (auto& [name, tensor] : f.model.params().tensors) tensor.setZero();
    const LanguageVocab& v = f.model.vocab("xxx");
    int k = static_cast<int>(v.arg_labels.size()) + 1;
    double value = f.model.loss_value(sent, inst, f.embeddings, "xxx");
    // The fixture predicate has one valid sense per lemma, so the sense
    // term is identically zero and only the argument term remains.
    CHECK(f.model.lexicon("xxx").valid_senses(
              sent.tokens[inst.predicate_index - 1].lemma).size() == 1);
    CHECK(value == doctest::Approx(std::log(k)).epsilon(1e-9));
  }
  SUBCASE("loss is non-negative across random draws") {
    std::mt19937_64 rng(11);
    for (int draw = 0; draw < 10; ++draw) {
      f.model.init_params(rng());
      CHECK(f.model.loss_value(sent, inst, f.embeddings, "xxx") >= 0.0);
    }
  }
  SUBCASE("a confident correct model has near-zero loss") {
    // One-token sentence: the bias alone can pin the gold label.
    Corpus c = tu::parse_text(tu::render({{{{"v1", "v1", true, "v1.01", {"_"}}}}}));
    auto insts = extract_instances(c);
    const LanguageVocab& v = f.model.vocab("xxx");
    Mat& w = f.model.params().tensors.at("head/xxx/arg/W");
    Mat& b = f.model.params().tensors.at("head/xxx/arg/b");
    w.setZero();
    b.setZero();
    b(0, v.null_index()) = 50.0;
    double value = f.model.loss_value(c.sentences[0], insts[0], f.embeddings, "xxx");
    CHECK(value == doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("gold label outside the label set is an error") {
    PredicateInstance bad = inst;
    bad.gold_args[1] = "NOT_A_LABEL";
    CHECK_THROWS_WITH_AS(f.model.loss_value(sent, bad, f.embeddings, "xxx"),
                         doctest::Contains("label set"), GraphError);
  }
}

TEST_CASE("end-to-end gradient check per variant") {
  for (Variant variant : {Variant::kMono, Variant::kSimplePolyglot, Variant::kLangId,
                          Variant::kLangSpecificLstm}) {
    auto f = Fixture::make(variant, 3, 3, 2);
    // Pick an instance whose sentence has 5 tokens if available.
    const PredicateInstance* inst = &f.instances[0];
    for (const auto& i : f.instances) {
      if (f.corpus.sentences[i.sentence_index].tokens.size() == 5) {
        inst = &i;
        break;
      }
    }
    const Sentence& sent = f.corpus.sentences[inst->sentence_index];
    double err = grad_check(
        [&](Graph& g, const std::map<std::string, Mat>& p) {
          f.model.params().tensors = p;
          return f.model.loss(g, sent, *inst, f.embeddings, "xxx");
        },
        f.model.params().tensors);
    INFO("variant ", variant_name(variant));
    CHECK(err < 1e-4);
  }
}

TEST_CASE("determinism: fixed seed gives identical predictions") {
  auto f1 = Fixture::make(Variant::kLangId, 4, 4, 9);
  auto f2 = Fixture::make(Variant::kLangId, 4, 4, 9);
  for (const auto& inst : f1.instances) {
    const Sentence& sent = f1.corpus.sentences[inst.sentence_index];
    LabeledPrediction a = f1.model.predict(sent, inst, f1.embeddings, "xxx");
    LabeledPrediction b = f2.model.predict(sent, inst, f2.embeddings, "xxx");
    CHECK(a.sense == b.sense);
    CHECK(a.args == b.args);
  }
}

TEST_CASE("config validation") {
  ModelConfig config;
  config.variant = Variant::kLangSpecificLstm;
  config.shared_layers = 2;
  config.languages = {"xxx", "eng"};
  CHECK_THROWS_AS(config.validate(), GraphError);
  config.shared_layers = 3;
  CHECK_NOTHROW(config.validate());
  ModelConfig mono;
  mono.variant = Variant::kMono;
  mono.languages = {"a", "b"};
  CHECK_THROWS_AS(mono.validate(), GraphError);
}

TEST_CASE("checkpoint round trip preserves parameters and predictions") {
  auto f = Fixture::make(Variant::kLangId, 4, 4, 13);
  RunManifest manifest;
  manifest.command = "test";
  manifest.seed = 13;

  std::stringstream buffer;
  save_checkpoint(f.model, manifest, buffer);
  RunManifest loaded_manifest;
  SrlModel loaded = load_checkpoint(buffer, &loaded_manifest);

  CHECK(loaded_manifest.command == "test");
  CHECK(loaded.config().hidden_size == f.model.config().hidden_size);
  CHECK(loaded.params().tensors.size() == f.model.params().tensors.size());
  for (const auto& [name, tensor] : f.model.params().tensors) {
    CHECK(tensor == loaded.params().tensors.at(name));
  }
  for (const auto& inst : f.instances) {
    const Sentence& sent = f.corpus.sentences[inst.sentence_index];
    LabeledPrediction a = f.model.predict(sent, inst, f.embeddings, "xxx");
    LabeledPrediction b = loaded.predict(sent, inst, f.embeddings, "xxx");
    CHECK(a.sense == b.sense);
    CHECK(a.args == b.args);
  }
}
