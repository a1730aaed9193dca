#ifndef POLYSRL_TRAINER_H
#define POLYSRL_TRAINER_H

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "polysrl/conll.h"
#include "polysrl/embeddings.h"
#include "polysrl/model.h"
#include "polysrl/sampler.h"
#include "polysrl/scorer.h"

namespace polysrl {

struct TrainConfig {
  int batch_size = 8;
  int max_epochs = 50;
  int patience = 5;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  uint64_t seed = 1;
  void validate() const;
};

struct LanguageData {
  std::string language;
  Corpus train;
  std::vector<PredicateInstance> train_instances;
  Corpus dev;
  std::vector<PredicateInstance> dev_instances;
  const EmbeddingTable* embeddings = nullptr;
};

struct EpochRecord {
  long epoch = 0;
  std::string split;  // "train" or "dev"
  std::string language;
  double loss = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct TrainResult {
  ModelParams best_params;
  long best_epoch = 0;
  double best_dev_f1 = 0.0;
  std::vector<EpochRecord> log;
};

class AdamOptimizer {
 public:
  AdamOptimizer(double learning_rate, double clip_norm, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);
  void step(ModelParams& params, const std::map<std::string, Mat>& grads);

 private:
  double lr_, clip_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::map<std::string, Mat> m_, v_;
};

// Trains the model in place; `model` keeps the last-epoch parameters while
// the returned result carries the best (dev-selected) checkpoint. For
// polyglot variants `data` must hold exactly two languages; model selection
// uses the non-pivot language's dev F1 (pivot = "eng" when present).
TrainResult train(SrlModel& model, std::vector<LanguageData>& data,
                  const TrainConfig& config);

// Predicts every instance of `corpus` in extraction order.
std::vector<LabeledPrediction> predict_corpus(
    const SrlModel& model, const Corpus& corpus,
    const std::vector<PredicateInstance>& instances,
    const EmbeddingTable& embeddings, const std::string& language);

void write_log_csv(const std::vector<EpochRecord>& log, std::ostream& out);

}  // namespace polysrl

#endif  // POLYSRL_TRAINER_H
