#include "polysrl/trainer.h"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace polysrl {

void TrainConfig::validate() const {
  if (batch_size < 1 || max_epochs < 1 || patience < 1 || learning_rate <= 0.0 ||
      clip_norm <= 0.0) {
    throw GraphError("train config: all values must be positive");
  }
}

AdamOptimizer::AdamOptimizer(double learning_rate, double clip_norm, double beta1,
                             double beta2, double eps)
    : lr_(learning_rate), clip_(clip_norm), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(ModelParams& params,
                         const std::map<std::string, Mat>& grads) {
  double norm_sq = 0.0;
  for (const auto& [name, g] : grads) norm_sq += g.squaredNorm();
  double scale = 1.0;
  double norm = std::sqrt(norm_sq);
  if (norm > clip_) scale = clip_ / norm;

  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, t_);
  double bc2 = 1.0 - std::pow(beta2_, t_);
  for (const auto& [name, grad] : grads) {
    Mat g = grad * scale;
    auto& m = m_[name];
    auto& v = v_[name];
    if (m.size() == 0) {
      m = Mat::Zero(g.rows(), g.cols());
      v = Mat::Zero(g.rows(), g.cols());
    }
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    Mat m_hat = m / bc1;
    Mat v_hat = v / bc2;
    params.tensors.at(name) -=
        lr_ * m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + eps_).matrix());
  }
}

std::vector<LabeledPrediction> predict_corpus(
    const SrlModel& model, const Corpus& corpus,
    const std::vector<PredicateInstance>& instances,
    const EmbeddingTable& embeddings, const std::string& language) {
  std::vector<LabeledPrediction> predictions;
  predictions.reserve(instances.size());
  for (const PredicateInstance& inst : instances) {
    predictions.push_back(model.predict(corpus.sentences[inst.sentence_index], inst,
                                        embeddings, language));
  }
  return predictions;
}

namespace {

EvalReport evaluate(const SrlModel& model, const LanguageData& data) {
  std::vector<LabeledPrediction> predictions = predict_corpus(
      model, data.dev, data.dev_instances, *data.embeddings, data.language);
  return score(data.dev, apply_predictions(data.dev, predictions));
}

}  // namespace

TrainResult train(SrlModel& model, std::vector<LanguageData>& data,
                  const TrainConfig& config) {
  config.validate();
  bool polyglot = model.config().variant != Variant::kMono;
  if (polyglot && data.size() != 2) {
    throw GraphError("polyglot training needs exactly two languages");
  }
  if (!polyglot && data.size() != 1) {
    throw GraphError("monolingual training takes exactly one language");
  }
  for (LanguageData& d : data) {
    if (!d.embeddings) throw GraphError("no embeddings for " + d.language);
    if (d.dev.sentences.empty()) {
      throw GraphError("language " + d.language + " has no dev set");
    }
    if (d.train_instances.empty()) {
      throw GraphError("language " + d.language + " has no training instances");
    }
  }
  // Model selection tracks the non-pivot language.
  size_t select_idx = 0;
  if (polyglot && data[0].language == "eng") select_idx = 1;

  AdamOptimizer optimizer(config.learning_rate, config.clip_norm);
  std::mt19937_64 dropout_rng(config.seed ^ 0xd1b54a32d192ed03ULL);

  TrainResult result;
  result.best_dev_f1 = -1.0;
  long epochs_without_gain = 0;

  for (long epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochSchedule schedule =
        polyglot ? stratified_schedule(data[0].train_instances.size(),
                                       data[1].train_instances.size(),
                                       config.seed, epoch)
                 : mono_schedule(data[0].train_instances.size(), config.seed, epoch);

    double epoch_loss = 0.0;
    long n_seen = 0;
    std::map<std::string, Mat> batch_grads;
    int batch_count = 0;
    auto flush_batch = [&]() {
      if (batch_count == 0) return;
      for (auto& [name, g] : batch_grads) g /= static_cast<double>(batch_count);
      optimizer.step(model.params(), batch_grads);
      batch_grads.clear();
      batch_count = 0;
    };

    for (const auto& [slot, index] : schedule.order) {
      LanguageData& d = data[slot];
      const PredicateInstance& inst = d.train_instances[index];
      Graph g;
      int loss_node = model.loss(g, d.train.sentences[inst.sentence_index], inst,
                                 *d.embeddings, d.language, /*train=*/true,
                                 &dropout_rng);
      double loss = g.value(loss_node)(0, 0);
      if (!std::isfinite(loss)) {
        throw GraphError("non-finite loss at epoch " + std::to_string(epoch) +
                         ", language " + d.language + ", instance " +
                         std::to_string(index));
      }
      epoch_loss += loss;
      ++n_seen;
      g.backward(loss_node);
      for (const auto& [name, grad] : g.grads()) {
        auto it = batch_grads.find(name);
        if (it == batch_grads.end()) {
          batch_grads[name] = grad;
        } else {
          it->second += grad;
        }
      }
      if (++batch_count >= config.batch_size) flush_batch();
    }
    flush_batch();

    EpochRecord train_rec;
    train_rec.epoch = epoch;
    train_rec.split = "train";
    train_rec.language = polyglot ? "all" : data[0].language;
    train_rec.loss = n_seen > 0 ? epoch_loss / n_seen : 0.0;
    result.log.push_back(train_rec);

    double selection_f1 = 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
      EvalReport report = evaluate(model, data[i]);
      EpochRecord rec;
      rec.epoch = epoch;
      rec.split = "dev";
      rec.language = data[i].language;
      rec.precision = report.labeled.precision;
      rec.recall = report.labeled.recall;
      rec.f1 = report.labeled.f1;
      result.log.push_back(rec);
      if (i == select_idx) selection_f1 = report.labeled.f1;
    }

    if (selection_f1 > result.best_dev_f1) {
      result.best_dev_f1 = selection_f1;
      result.best_epoch = epoch;
      result.best_params = model.params();
      epochs_without_gain = 0;
    } else {
      ++epochs_without_gain;
      if (epochs_without_gain >= config.patience) break;
    }
  }
  return result;
}

void write_log_csv(const std::vector<EpochRecord>& log, std::ostream& out) {
  out << "epoch,split,language,loss,precision,recall,f1\n";
  for (const EpochRecord& rec : log) {
    out << rec.epoch << ',' << rec.split << ',' << rec.language << ',' << rec.loss
        << ',' << rec.precision << ',' << rec.recall << ',' << rec.f1 << '\n';
  }
}

}  // namespace polysrl
