#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "polysrl/conll.h"
#include "polysrl/graph.h"
#include "polysrl/lexicon.h"
#include "polysrl/model.h"
#include "polysrl/sampler.h"
#include "polysrl/scorer.h"
#include "testutil.h"

using namespace polysrl;
namespace tu = polysrl::testutil;

namespace {

struct BenchModel {
  Corpus corpus;
  std::vector<PredicateInstance> instances;
  EmbeddingTable embeddings;
  SrlModel model;

  static BenchModel make(int hidden, int emb_dim, int layers) {
    BenchModel b{tu::overfit_corpus(40, 1), {}, tu::fixture_embeddings(emb_dim, 1), {}};
    b.instances = extract_instances(b.corpus);

    ModelConfig config;
    config.variant = Variant::kMono;
    config.shared_layers = layers;
    config.hidden_size = hidden;
    config.embedding_dim = emb_dim;
    config.dropout_rate = 0.0;
    config.languages = {"xxx"};

    SenseLexicon lex = build_lexicon(b.corpus, b.instances, false);
    std::map<std::string, LanguageVocab> vocabs{
        {"xxx", build_vocab(b.corpus, b.instances, lex)}};
    std::map<std::string, SenseLexicon> lexicons{{"xxx", std::move(lex)}};
    b.model = SrlModel(config, std::move(vocabs), std::move(lexicons));
    b.model.init_params(1);
    return b;
  }
};

void BM_ParseConll(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::ostringstream text;
  for (int i = 0; i < 200; ++i) {
    write_conll09(tu::random_corpus(rng, 5), text);
  }
  std::string payload = text.str();
  long tokens = 0;
  for (auto _ : state) {
    std::istringstream in(payload);
    Corpus corpus = parse_conll09(in, "xxx");
    for (const Sentence& s : corpus.sentences) tokens += s.tokens.size();
    benchmark::DoNotOptimize(corpus);
  }
  state.SetItemsProcessed(tokens);
}
BENCHMARK(BM_ParseConll);

void BM_Score(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::vector<Corpus> corpora;
  for (int i = 0; i < 50; ++i) corpora.push_back(tu::random_corpus(rng, 5));
  for (auto _ : state) {
    for (const Corpus& c : corpora) {
      EvalReport report = score(c, c);
      benchmark::DoNotOptimize(report);
    }
  }
  state.SetItemsProcessed(state.iterations() * corpora.size());
}
BENCHMARK(BM_Score);

void BM_EncodeForward(benchmark::State& state) {
  BenchModel b = BenchModel::make(static_cast<int>(state.range(0)), 32, 2);
  Mat input = Mat::Random(20, b.model.config().input_dim());
  for (auto _ : state) {
    Mat out = b.model.encode_matrix(input, "xxx");
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_EncodeForward)->Arg(32)->Arg(100)->Arg(300);

void BM_LossBackward(benchmark::State& state) {
  BenchModel b = BenchModel::make(static_cast<int>(state.range(0)), 32, 2);
  const PredicateInstance& inst = b.instances[0];
  const Sentence& sent = b.corpus.sentences[inst.sentence_index];
  for (auto _ : state) {
    Graph g;
    int loss = b.model.loss(g, sent, inst, b.embeddings, "xxx");
    g.backward(loss);
    benchmark::DoNotOptimize(g.grads());
  }
}
BENCHMARK(BM_LossBackward)->Arg(32)->Arg(100);

void BM_StratifiedSchedule(benchmark::State& state) {
  long epoch = 0;
  for (auto _ : state) {
    EpochSchedule s = stratified_schedule(14329, 39279, 7, ++epoch);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_StratifiedSchedule);

}  // namespace

BENCHMARK_MAIN();
