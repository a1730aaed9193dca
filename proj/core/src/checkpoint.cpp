#include "polysrl/checkpoint.h"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace polysrl {

namespace {

constexpr char kMagic[8] = {'P', 'S', 'R', 'L', 'C', 'K', 'P', 'T'};
constexpr uint32_t kFormatVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw GraphError("checkpoint: truncated stream");
  return value;
}

nlohmann::json config_to_json(const ModelConfig& c) {
  nlohmann::json j;
  j["variant"] = variant_name(c.variant);
  j["shared_layers"] = c.shared_layers;
  j["hidden_size"] = c.hidden_size;
  j["indicator_dim"] = c.indicator_dim;
  j["lang_id_dim"] = c.lang_id_dim;
  j["dropout_rate"] = c.dropout_rate;
  j["embedding_dim"] = c.embedding_dim;
  j["languages"] = c.languages;
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.variant = variant_from_name(j.at("variant").get<std::string>());
  c.shared_layers = j.at("shared_layers").get<int>();
  c.hidden_size = j.at("hidden_size").get<int>();
  c.indicator_dim = j.at("indicator_dim").get<int>();
  c.lang_id_dim = j.at("lang_id_dim").get<int>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.embedding_dim = j.at("embedding_dim").get<int>();
  c.languages = j.at("languages").get<std::vector<std::string>>();
  return c;
}

}  // namespace

void save_checkpoint(const SrlModel& model, const RunManifest& manifest,
                     std::ostream& out) {
  nlohmann::json header;
  header["config"] = config_to_json(model.config());
  for (const auto& [lang, vocab] : model.vocabs()) {
    header["vocabs"][lang]["arg_labels"] = vocab.arg_labels;
    header["vocabs"][lang]["senses"] = vocab.senses;
  }
  for (const auto& [lang, lexicon] : model.lexicons()) {
    std::ostringstream lex_text;
    lexicon.serialize(lex_text);
    header["lexicons"][lang]["identity_mode"] = lexicon.identity_mode();
    header["lexicons"][lang]["entries"] = lex_text.str();
  }
  header["manifest"] = nlohmann::json::parse(manifest.to_json());
  std::string header_text = header.dump();

  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kFormatVersion);
  write_pod(out, static_cast<uint64_t>(header_text.size()));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

  const auto& tensors = model.params().tensors;
  write_pod(out, static_cast<uint64_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    write_pod(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod(out, static_cast<uint64_t>(tensor.rows()));
    write_pod(out, static_cast<uint64_t>(tensor.cols()));
    for (int r = 0; r < tensor.rows(); ++r) {
      for (int c = 0; c < tensor.cols(); ++c) write_pod(out, tensor(r, c));
    }
  }
}

void save_checkpoint_file(const SrlModel& model, const RunManifest& manifest,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GraphError("cannot open " + path + " for writing");
  save_checkpoint(model, manifest, out);
}

SrlModel load_checkpoint(std::istream& in, RunManifest* manifest) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw GraphError("checkpoint: bad magic");
  }
  uint32_t version = read_pod<uint32_t>(in);
  if (version != kFormatVersion) {
    throw GraphError("checkpoint: unsupported format version " + std::to_string(version));
  }
  uint64_t header_len = read_pod<uint64_t>(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw GraphError("checkpoint: truncated header");
  nlohmann::json header = nlohmann::json::parse(header_text);

  ModelConfig config = config_from_json(header.at("config"));
  std::map<std::string, LanguageVocab> vocabs;
  for (const auto& [lang, j] : header.at("vocabs").items()) {
    LanguageVocab vocab;
    vocab.arg_labels = j.at("arg_labels").get<std::vector<std::string>>();
    vocab.senses = j.at("senses").get<std::vector<std::string>>();
    vocabs[lang] = std::move(vocab);
  }
  std::map<std::string, SenseLexicon> lexicons;
  for (const auto& [lang, j] : header.at("lexicons").items()) {
    std::istringstream lex_text(j.at("entries").get<std::string>());
    lexicons[lang] = SenseLexicon::deserialize(lex_text, lang,
                                               j.at("identity_mode").get<bool>());
  }
  if (manifest && header.contains("manifest")) {
    *manifest = RunManifest::from_json(header.at("manifest").dump());
  }

  SrlModel model(config, std::move(vocabs), std::move(lexicons));
  uint64_t n_tensors = read_pod<uint64_t>(in);
  for (uint64_t i = 0; i < n_tensors; ++i) {
    uint32_t name_len = read_pod<uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    uint64_t rows = read_pod<uint64_t>(in);
    uint64_t cols = read_pod<uint64_t>(in);
    Mat tensor(rows, cols);
    for (uint64_t r = 0; r < rows; ++r) {
      for (uint64_t c = 0; c < cols; ++c) tensor(r, c) = read_pod<double>(in);
    }
    model.params().tensors[name] = std::move(tensor);
  }
  return model;
}

SrlModel load_checkpoint_file(const std::string& path, RunManifest* manifest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open " + path);
  return load_checkpoint(in, manifest);
}

}  // namespace polysrl
