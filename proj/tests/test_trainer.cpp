#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "polysrl/lexicon.h"
#include "polysrl/trainer.h"
#include "testutil.h"

using namespace polysrl;
namespace tu = polysrl::testutil;

namespace {

constexpr int kEmbDim = 8;

struct TrainFixture {
  SrlModel model;
  std::vector<LanguageData> data;
  EmbeddingTable embeddings = tu::fixture_embeddings(kEmbDim, 99);

  static TrainFixture make(Variant variant, const std::vector<std::string>& langs,
                           int n_sentences = 12, uint64_t seed = 1) {
    TrainFixture f;
    ModelConfig config;
    config.variant = variant;
    config.shared_layers = variant == Variant::kLangSpecificLstm ? 3 : 1;
    config.hidden_size = 8;
    config.embedding_dim = kEmbDim;
    config.dropout_rate = 0.0;
    config.languages = langs;

    std::map<std::string, LanguageVocab> vocabs;
    std::map<std::string, SenseLexicon> lexicons;
    for (size_t i = 0; i < langs.size(); ++i) {
      LanguageData d;
      d.language = langs[i];
      d.train = tu::overfit_corpus(n_sentences, seed + i, langs[i]);
      d.train_instances = extract_instances(d.train);
      d.dev = d.train;
      d.dev_instances = d.train_instances;
      d.embeddings = &f.embeddings;
      lexicons.emplace(langs[i], build_lexicon(d.train, d.train_instances, false));
      vocabs.emplace(langs[i],
                     build_vocab(d.train, d.train_instances, lexicons.at(langs[i])));
      f.data.push_back(std::move(d));
    }
    f.model = SrlModel(config, std::move(vocabs), std::move(lexicons));
    f.model.init_params(seed);
    return f;
  }
};

TrainConfig quick_config(int max_epochs, uint64_t seed = 7) {
  TrainConfig c;
  c.batch_size = 4;
  c.max_epochs = max_epochs;
  c.patience = max_epochs;
  c.seed = seed;
  return c;
}

double mean_train_loss(const std::vector<EpochRecord>& log, long epoch) {
  for (const EpochRecord& r : log) {
    if (r.split == "train" && r.epoch == epoch) return r.loss;
  }
  REQUIRE(false);
  return 0.0;
}

}  // namespace

TEST_CASE("adam minimizes a quadratic") {
  ModelParams params;
  params.tensors["w"] = Mat::Constant(2, 3, 4.0);
  AdamOptimizer opt(0.05, 1e9);
  for (int i = 0; i < 600; ++i) {
    std::map<std::string, Mat> grads{{"w", 2.0 * params.tensors["w"]}};
    opt.step(params, grads);
  }
  CHECK(params.tensors["w"].cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("gradient clipping bounds the applied update") {
  // With a huge gradient and clip norm 1, Adam's first moment is fed the
  // rescaled gradient, so the first step stays near lr * g / |g|.
  ModelParams params;
  params.tensors["w"] = Mat::Zero(1, 1);
  AdamOptimizer opt(0.1, 1.0);
  std::map<std::string, Mat> grads{{"w", Mat::Constant(1, 1, 1e6)}};
  opt.step(params, grads);
  CHECK(std::abs(params.tensors["w"](0, 0)) < 0.2);
}

TEST_CASE("mono training drives the loss down and overfits a small corpus") {
  TrainFixture f = TrainFixture::make(Variant::kMono, {"xxx"});
  TrainResult result = train(f.model, f.data, quick_config(60));

  double first = mean_train_loss(result.log, 1);
  double last = mean_train_loss(result.log, result.log.back().epoch);
  CHECK(last < 0.5 * first);
  CHECK(result.best_dev_f1 > 80.0);
  CHECK(result.best_epoch >= 1);
}

TEST_CASE("best dev F1 is the running max over dev epochs") {
  TrainFixture f = TrainFixture::make(Variant::kMono, {"xxx"});
  TrainResult result = train(f.model, f.data, quick_config(12));
  double max_f1 = 0.0;
  for (const EpochRecord& r : result.log) {
    if (r.split == "dev" && r.language == "xxx") max_f1 = std::max(max_f1, r.f1);
  }
  CHECK(result.best_dev_f1 == doctest::Approx(max_f1));
}

TEST_CASE("training is deterministic in the seed") {
  auto run = []() {
    TrainFixture f = TrainFixture::make(Variant::kMono, {"xxx"});
    return train(f.model, f.data, quick_config(5));
  };
  TrainResult a = run();
  TrainResult b = run();
  REQUIRE(a.log.size() == b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].loss == b.log[i].loss);
    CHECK(a.log[i].f1 == b.log[i].f1);
  }
  for (const auto& [name, tensor] : a.best_params.tensors) {
    CHECK(tensor == b.best_params.tensors.at(name));
  }
}

TEST_CASE("polyglot training logs a joint train row and per-language dev rows") {
  TrainFixture f = TrainFixture::make(Variant::kSimplePolyglot, {"eng", "xxx"}, 6);
  TrainResult result = train(f.model, f.data, quick_config(2));
  bool saw_all = false, saw_eng = false, saw_xxx = false;
  for (const EpochRecord& r : result.log) {
    if (r.split == "train") CHECK(r.language == "all");
    if (r.split == "train" && r.language == "all") saw_all = true;
    if (r.split == "dev" && r.language == "eng") saw_eng = true;
    if (r.split == "dev" && r.language == "xxx") saw_xxx = true;
  }
  CHECK(saw_all);
  CHECK(saw_eng);
  CHECK(saw_xxx);
}

TEST_CASE("polyglot selection tracks the non-pivot language") {
  TrainFixture f = TrainFixture::make(Variant::kSimplePolyglot, {"eng", "xxx"}, 6);
  TrainResult result = train(f.model, f.data, quick_config(4));
  double max_xxx = 0.0;
  for (const EpochRecord& r : result.log) {
    if (r.split == "dev" && r.language == "xxx") max_xxx = std::max(max_xxx, r.f1);
  }
  CHECK(result.best_dev_f1 == doctest::Approx(max_xxx));
}

TEST_CASE("polyglot training requires exactly two languages") {
  TrainFixture f = TrainFixture::make(Variant::kSimplePolyglot, {"eng", "xxx"}, 4);
  std::vector<LanguageData> one = {f.data[0]};
  CHECK_THROWS_AS(train(f.model, one, quick_config(1)), GraphError);
}

TEST_CASE("predict_corpus yields one prediction per instance") {
  TrainFixture f = TrainFixture::make(Variant::kMono, {"xxx"});
  const LanguageData& d = f.data[0];
  auto preds = predict_corpus(f.model, d.train, d.train_instances, f.embeddings, "xxx");
  CHECK(preds.size() == d.train_instances.size());
  // Every prediction must be applicable back onto the corpus.
  Corpus annotated = apply_predictions(d.train, preds);
  CHECK(annotated.sentences.size() == d.train.sentences.size());
}

TEST_CASE("log CSV has the expected header and row count") {
  TrainFixture f = TrainFixture::make(Variant::kMono, {"xxx"}, 4);
  TrainResult result = train(f.model, f.data, quick_config(2));
  std::ostringstream out;
  write_log_csv(result.log, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,split,language,loss,precision,recall,f1");
  size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == result.log.size());
}

TEST_CASE("train config validation") {
  TrainConfig c;
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), GraphError);
  c = TrainConfig{};
  c.learning_rate = -1.0;
  CHECK_THROWS_AS(c.validate(), GraphError);
  c = TrainConfig{};
  CHECK_NOTHROW(c.validate());
}
