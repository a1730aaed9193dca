#ifndef POLYSRL_CHECKPOINT_H
#define POLYSRL_CHECKPOINT_H

#include <iosfwd>
#include <string>

#include "polysrl/manifest.h"
#include "polysrl/model.h"

namespace polysrl {

// Checkpoint container, little-endian:
//   magic "PSRLCKPT" | u32 format version | u64 header length | JSON header
//   | u64 tensor count | per tensor: u32 name length, name bytes,
//     u64 rows, u64 cols, rows*cols doubles (row-major)
// The JSON header echoes the model config, per-language label and sense
// vocabularies, serialized lexicons, and the run manifest.
void save_checkpoint(const SrlModel& model, const RunManifest& manifest,
                     std::ostream& out);
void save_checkpoint_file(const SrlModel& model, const RunManifest& manifest,
                          const std::string& path);

SrlModel load_checkpoint(std::istream& in, RunManifest* manifest = nullptr);
SrlModel load_checkpoint_file(const std::string& path,
                              RunManifest* manifest = nullptr);

}  // namespace polysrl

#endif  // POLYSRL_CHECKPOINT_H
