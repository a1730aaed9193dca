#ifndef POLYSRL_MANIFEST_H
#define POLYSRL_MANIFEST_H

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace polysrl {

inline constexpr char kToolkitVersion[] = "0.1.0";

// Provenance record embedded in every produced artifact.
struct RunManifest {
  std::string toolkit_version = kToolkitVersion;
  std::string command;
  uint64_t seed = 0;
  std::string timestamp;  // ISO 8601 UTC
  std::map<std::string, std::string> config;        // flag/config echo
  std::map<std::string, std::string> input_digests; // path -> fnv1a-64 hex

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

// FNV-1a 64-bit over raw bytes, hex-encoded.
std::string fnv1a_hex(const std::string& bytes);
std::string digest_file(const std::string& path);

std::string utc_timestamp();

RunManifest make_manifest(const std::string& command, uint64_t seed,
                          const std::map<std::string, std::string>& config,
                          const std::vector<std::string>& input_paths);

}  // namespace polysrl

#endif  // POLYSRL_MANIFEST_H
