#ifndef POLYSRL_SAMPLER_H
#define POLYSRL_SAMPLER_H

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace polysrl {

// One epoch's instance order for bilingual training: (language slot, index).
// Slot 0 is dataset A, slot 1 dataset B.
struct EpochSchedule {
  std::vector<std::pair<int, long>> order;
};

// Gives two datasets equal effective weight: the larger appears exactly once
// per instance; the smaller is oversampled so every instance shows up at
// least once, truncated to the larger size. Deterministic in (seed, epoch).
EpochSchedule stratified_schedule(long n_a, long n_b, uint64_t seed, long epoch);

// Single-dataset epoch, shuffled. Deterministic in (seed, epoch).
EpochSchedule mono_schedule(long n, uint64_t seed, long epoch);

}  // namespace polysrl

#endif  // POLYSRL_SAMPLER_H
