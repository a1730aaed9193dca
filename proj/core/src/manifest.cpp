#include "polysrl/manifest.h"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace polysrl {

std::string fnv1a_hex(const std::string& bytes) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << hash;
  return out.str();
}

std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for digest");
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a_hex(buf.str());
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["toolkit_version"] = toolkit_version;
  j["command"] = command;
  j["seed"] = seed;
  j["timestamp"] = timestamp;
  j["config"] = config;
  j["input_digests"] = input_digests;
  return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RunManifest m;
  m.toolkit_version = j.value("toolkit_version", "");
  m.command = j.value("command", "");
  m.seed = j.value("seed", 0ULL);
  m.timestamp = j.value("timestamp", "");
  if (j.contains("config")) m.config = j["config"].get<std::map<std::string, std::string>>();
  if (j.contains("input_digests")) {
    m.input_digests = j["input_digests"].get<std::map<std::string, std::string>>();
  }
  return m;
}

RunManifest make_manifest(const std::string& command, uint64_t seed,
                          const std::map<std::string, std::string>& config,
                          const std::vector<std::string>& input_paths) {
  RunManifest m;
  m.command = command;
  m.seed = seed;
  m.timestamp = utc_timestamp();
  m.config = config;
  for (const std::string& path : input_paths) m.input_digests[path] = digest_file(path);
  return m;
}

}  // namespace polysrl
