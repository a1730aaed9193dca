// polysrl: polyglot semantic role labeling toolkit.
//
// Subcommands: stats, embed prepare, train, predict, score, analyze.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "polysrl/checkpoint.h"
#include "polysrl/conll.h"
#include "polysrl/embeddings.h"
#include "polysrl/lexicon.h"
#include "polysrl/manifest.h"
#include "polysrl/model.h"
#include "polysrl/scorer.h"
#include "polysrl/trainer.h"

namespace {

using namespace polysrl;
using nlohmann::json;

// Paths in config files may be relative to POLYSRL_DATA_DIR.
std::string resolve_path(const std::string& path) {
  if (path.empty() || std::filesystem::path(path).is_absolute() ||
      std::filesystem::exists(path)) {
    return path;
  }
  const char* data_dir = std::getenv("POLYSRL_DATA_DIR");
  if (!data_dir) return path;
  std::filesystem::path candidate = std::filesystem::path(data_dir) / path;
  return candidate.string();
}

void write_manifest_sidecar(const RunManifest& manifest, const std::string& artifact) {
  std::ofstream out(artifact + ".manifest.json");
  out << manifest.to_json() << '\n';
}

int cmd_stats(const std::string& file, const std::string& lang,
              const std::string& output) {
  Corpus corpus = parse_conll09_file(resolve_path(file), lang);
  CorpusStats stats = corpus_stats(corpus);
  std::ostringstream row;
  row << "language,n_sentences,n_sentences_with_pred,n_predicates\n"
      << lang << ',' << stats.n_sentences << ',' << stats.n_sentences_with_pred
      << ',' << stats.n_predicates << '\n';
  if (output.empty()) {
    std::cout << row.str();
  } else {
    std::ofstream out(output);
    out << row.str();
  }
  return 0;
}

int cmd_embed_prepare(const std::string& vectors_path, int pca_dim,
                      const std::string& align_to, const std::string& dict_path,
                      int cca_dim, double lambda, const std::string& output,
                      uint64_t seed) {
  std::vector<std::string> inputs = {resolve_path(vectors_path)};
  EmbeddingTable table = load_vectors_file(resolve_path(vectors_path));
  if (pca_dim > 0) table = pca_reduce(table, pca_dim);

  std::map<std::string, std::string> config = {
      {"vectors", vectors_path}, {"pca", std::to_string(pca_dim)}};
  if (!align_to.empty()) {
    if (dict_path.empty()) {
      throw EmbeddingError("--align-to requires --dict");
    }
    inputs.push_back(resolve_path(align_to));
    inputs.push_back(resolve_path(dict_path));
    EmbeddingTable pivot = load_vectors_file(resolve_path(align_to));
    if (pca_dim > 0) pivot = pca_reduce(pivot, pca_dim);
    BilingualDictionary dict = load_dictionary_file(resolve_path(dict_path));
    int k = cca_dim > 0 ? cca_dim : table.dim();
    CcaProjection cca;
    table = align_to_pivot(table, pivot, dict, k, lambda, &cca);
    std::cout << "aligned " << table.size() << " vectors through " << k
              << " canonical directions; mean canonical correlation "
              << cca.correlations.mean() << '\n';
    config["align_to"] = align_to;
    config["dict"] = dict_path;
    config["cca_dim"] = std::to_string(k);
  }

  std::ofstream out(output);
  if (!out) throw EmbeddingError("cannot open " + output + " for writing");
  save_vectors(table, out);
  write_manifest_sidecar(make_manifest("embed prepare", seed, config, inputs), output);
  std::cout << "wrote " << table.size() << " vectors of dim " << table.dim()
            << " to " << output << '\n';
  return 0;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line without '=': " + line);
    }
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_train(const std::string& config_path, uint64_t seed_override,
              bool have_seed_override) {
  auto kv = parse_config_file(config_path);
  auto need = [&](const std::string& key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("config missing key '" + key + "'");
    return it->second;
  };
  auto get = [&](const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };

  ModelConfig mc;
  mc.variant = variant_from_name(need("variant"));
  mc.languages = split_commas(need("languages"));
  mc.shared_layers = std::stoi(get("shared_layers", "4"));
  mc.hidden_size = std::stoi(get("hidden_size", "300"));
  mc.indicator_dim = std::stoi(get("indicator_dim", "2"));
  mc.lang_id_dim = std::stoi(get("lang_id_dim", "8"));
  mc.dropout_rate = std::stod(get("dropout_rate", "0.1"));

  TrainConfig tc;
  tc.batch_size = std::stoi(get("batch_size", "8"));
  tc.max_epochs = std::stoi(get("max_epochs", "50"));
  tc.patience = std::stoi(get("patience", "5"));
  tc.learning_rate = std::stod(get("learning_rate", "1e-3"));
  tc.clip_norm = std::stod(get("clip_norm", "5.0"));
  tc.seed = have_seed_override ? seed_override : std::stoull(get("seed", "1"));

  std::vector<std::string> inputs = {config_path};
  std::vector<EmbeddingTable> tables;
  std::vector<LanguageData> data;
  tables.reserve(mc.languages.size());
  std::map<std::string, LanguageVocab> vocabs;
  std::map<std::string, SenseLexicon> lexicons;
  for (const std::string& lang : mc.languages) {
    std::string train_path = resolve_path(need("train." + lang));
    std::string dev_path = resolve_path(need("dev." + lang));
    std::string vec_path = resolve_path(need("vectors." + lang));
    inputs.push_back(train_path);
    inputs.push_back(dev_path);
    inputs.push_back(vec_path);

    LanguageData d;
    d.language = lang;
    d.train = parse_conll09_file(train_path, lang);
    d.train_instances = extract_instances(d.train);
    d.dev = parse_conll09_file(dev_path, lang);
    d.dev_instances = extract_instances(d.dev);
    tables.push_back(load_vectors_file(vec_path));

    SenseLexicon lexicon = build_lexicon(d.train, d.train_instances);
    vocabs[lang] = build_vocab(d.train, d.train_instances, lexicon);
    lexicons[lang] = std::move(lexicon);
    data.push_back(std::move(d));
  }
  for (size_t i = 0; i < data.size(); ++i) data[i].embeddings = &tables[i];

  mc.embedding_dim = tables.front().dim();
  for (const EmbeddingTable& t : tables) {
    if (t.dim() != mc.embedding_dim) {
      throw EmbeddingError("embedding tables disagree on dimensionality");
    }
  }

  SrlModel model(mc, std::move(vocabs), std::move(lexicons));
  model.init_params(tc.seed);

  TrainResult result = train(model, data, tc);
  std::cerr << "best dev F1 " << result.best_dev_f1 << " at epoch "
            << result.best_epoch << '\n';

  std::string checkpoint_path = get("checkpoint", "model.ckpt");
  std::string log_path = get("log", "train_log.csv");
  model.params() = result.best_params;

  std::map<std::string, std::string> echo(kv.begin(), kv.end());
  RunManifest manifest = make_manifest("train", tc.seed, echo, inputs);
  save_checkpoint_file(model, manifest, checkpoint_path);
  std::ofstream log_out(log_path);
  write_log_csv(result.log, log_out);
  std::cout << "checkpoint " << checkpoint_path << "\nlog " << log_path << '\n';
  return 0;
}

int cmd_predict(const std::string& checkpoint_path, const std::string& input_path,
                const std::string& vectors_path, const std::string& lang,
                const std::string& output) {
  SrlModel model = load_checkpoint_file(resolve_path(checkpoint_path));
  Corpus corpus = parse_conll09_file(resolve_path(input_path), lang);
  EmbeddingTable embeddings = load_vectors_file(resolve_path(vectors_path));
  std::vector<PredicateInstance> instances = extract_instances(corpus);
  std::vector<LabeledPrediction> predictions =
      predict_corpus(model, corpus, instances, embeddings, lang);

  std::ofstream out(output);
  if (!out) throw ConllError("cannot open " + output + " for writing");
  write_conll09(corpus, predictions, out);
  RunManifest manifest = make_manifest(
      "predict", 0, {{"checkpoint", checkpoint_path}, {"lang", lang}},
      {resolve_path(checkpoint_path), resolve_path(input_path), resolve_path(vectors_path)});
  write_manifest_sidecar(manifest, output);
  std::cout << "wrote predictions for " << instances.size() << " instances to "
            << output << '\n';
  return 0;
}

json report_to_json(const EvalReport& report) {
  json j;
  j["language"] = report.language;
  j["labeled"] = {{"precision", report.labeled.precision},
                  {"recall", report.labeled.recall},
                  {"f1", report.labeled.f1}};
  j["unlabeled"] = {{"precision", report.unlabeled.precision},
                    {"recall", report.unlabeled.recall},
                    {"f1", report.unlabeled.f1}};
  j["sense_accuracy"] = report.sense_accuracy;
  j["n_predicates"] = report.n_predicates;
  for (const auto& [label, counts] : report.per_label) {
    j["per_label"][label] = {{"gold_count", counts.gold_count},
                             {"correct", counts.correct},
                             {"predicted", counts.predicted}};
  }
  return j;
}

EvalReport report_from_json(const json& j) {
  EvalReport report;
  report.language = j.at("language").get<std::string>();
  report.labeled.precision = j.at("labeled").at("precision").get<double>();
  report.labeled.recall = j.at("labeled").at("recall").get<double>();
  report.labeled.f1 = j.at("labeled").at("f1").get<double>();
  report.unlabeled.precision = j.at("unlabeled").at("precision").get<double>();
  report.unlabeled.recall = j.at("unlabeled").at("recall").get<double>();
  report.unlabeled.f1 = j.at("unlabeled").at("f1").get<double>();
  report.sense_accuracy = j.at("sense_accuracy").get<double>();
  report.n_predicates = j.at("n_predicates").get<long>();
  if (j.contains("per_label")) {
    for (const auto& [label, counts] : j.at("per_label").items()) {
      LabelCounts c;
      c.gold_count = counts.at("gold_count").get<long>();
      c.correct = counts.at("correct").get<long>();
      c.predicted = counts.at("predicted").get<long>();
      report.per_label[label] = c;
    }
  }
  return report;
}

int cmd_score(const std::string& gold_path, const std::string& pred_path,
              const std::string& lang, const std::string& output_prefix) {
  Corpus gold = parse_conll09_file(resolve_path(gold_path), lang);
  Corpus pred = parse_conll09_file(resolve_path(pred_path), lang);
  EvalReport report = score(gold, pred);

  std::cout << "labeled   P " << report.labeled.precision << "  R "
            << report.labeled.recall << "  F1 " << report.labeled.f1 << '\n'
            << "unlabeled P " << report.unlabeled.precision << "  R "
            << report.unlabeled.recall << "  F1 " << report.unlabeled.f1 << '\n'
            << "sense accuracy " << 100.0 * report.sense_accuracy << '\n';

  json j = report_to_json(report);
  RunManifest manifest =
      make_manifest("score", 0, {{"gold", gold_path}, {"pred", pred_path}},
                    {resolve_path(gold_path), resolve_path(pred_path)});
  j["manifest"] = json::parse(manifest.to_json());
  std::ofstream json_out(output_prefix + ".json");
  json_out << j.dump(2) << '\n';
  std::ofstream csv_out(output_prefix + ".per_label.csv");
  per_label_table(report, csv_out);
  std::cout << "report " << output_prefix << ".json\n";
  return 0;
}

int cmd_analyze(const std::string& report_a, const std::string& report_b,
                const std::string& output) {
  auto load = [](const std::string& path) {
    std::ifstream in(resolve_path(path));
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return report_from_json(j);
  };
  std::vector<ImprovementRow> rows = compare(load(report_a), load(report_b));
  if (output.empty()) {
    write_comparison(rows, std::cout);
  } else {
    std::ofstream out(output);
    write_comparison(rows, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polyglot semantic role labeling toolkit"};
  app.require_subcommand(1);

  std::string file, lang = "eng", output, vectors, align_to, dict, config_path;
  std::string checkpoint, input, gold, pred, report_a, report_b;
  std::string output_prefix = "score";
  int pca_dim = 0, cca_dim = 0;
  double lambda = 1e-3;
  uint64_t seed = 1;
  bool have_seed = false;

  auto* stats = app.add_subcommand("stats", "Per-language corpus statistics");
  stats->add_option("file", file, "CoNLL 2009 file")->required();
  stats->add_option("--lang", lang, "ISO 639-3 language code")->required();
  stats->add_option("--output", output, "CSV output path (default stdout)");

  auto* embed = app.add_subcommand("embed", "embedding preparation");
  auto* prepare = embed->add_subcommand("prepare", "PCA-reduce and optionally CCA-align");
  prepare->add_option("--vectors", vectors, "input vector file")->required();
  prepare->add_option("--pca", pca_dim, "PCA output dimension (0 = keep)");
  prepare->add_option("--align-to", align_to, "pivot (English) vector file");
  prepare->add_option("--dict", dict, "bilingual dictionary file");
  prepare->add_option("--cca-dim", cca_dim, "retained CCA dimension (default = dim)");
  prepare->add_option("--lambda", lambda, "CCA whitening ridge");
  prepare->add_option("--output", output, "output vector file")->required();

  auto* train_cmd = app.add_subcommand("train", "train a tagger from a config file");
  train_cmd->add_option("--config", config_path, "key=value config file")->required();
  auto* seed_opt = train_cmd->add_option("--seed", seed, "override config seed");

  auto* predict_cmd = app.add_subcommand("predict", "label a CoNLL file");
  predict_cmd->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  predict_cmd->add_option("--input", input, "input CoNLL file")->required();
  predict_cmd->add_option("--vectors", vectors, "embedding file")->required();
  predict_cmd->add_option("--lang", lang, "language code")->required();
  predict_cmd->add_option("--output", output, "output CoNLL file")->required();

  auto* score_cmd = app.add_subcommand("score", "semantic F1 evaluation");
  score_cmd->add_option("--gold", gold, "gold CoNLL file")->required();
  score_cmd->add_option("--pred", pred, "predicted CoNLL file")->required();
  score_cmd->add_option("--lang", lang, "language code");
  score_cmd->add_option("--output-prefix", output_prefix, "report path prefix");

  std::vector<std::string> reports;
  auto* analyze = app.add_subcommand("analyze", "compare two score reports");
  analyze->add_option("--reports", reports, "baseline and comparison report JSON")
      ->expected(2)
      ->required();
  analyze->add_option("--output", output, "comparison CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats->parsed()) return cmd_stats(file, lang, output);
    if (embed->parsed() && prepare->parsed()) {
      return cmd_embed_prepare(vectors, pca_dim, align_to, dict, cca_dim, lambda,
                               output, seed);
    }
    if (train_cmd->parsed()) {
      have_seed = seed_opt->count() > 0;
      return cmd_train(config_path, seed, have_seed);
    }
    if (predict_cmd->parsed()) {
      return cmd_predict(checkpoint, input, vectors, lang, output);
    }
    if (score_cmd->parsed()) return cmd_score(gold, pred, lang, output_prefix);
    if (analyze->parsed()) return cmd_analyze(reports[0], reports[1], output);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "no subcommand given\n";
  return 1;
}
