#include "polysrl/sampler.h"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace polysrl {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 epoch_rng(uint64_t seed, long epoch) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<uint64_t>(epoch))));
}

// ceil(max/min) independent permutations truncated to `target`; the first
// block survives whole, so every instance appears at least once.
std::vector<long> oversampled(long n, long target, std::mt19937_64& rng) {
  std::vector<long> out;
  out.reserve(((target + n - 1) / n) * n);
  while (static_cast<long>(out.size()) < target) {
    std::vector<long> block(n);
    for (long i = 0; i < n; ++i) block[i] = i;
    std::shuffle(block.begin(), block.end(), rng);
    out.insert(out.end(), block.begin(), block.end());
  }
  out.resize(target);
  return out;
}

}  // namespace

EpochSchedule stratified_schedule(long n_a, long n_b, uint64_t seed, long epoch) {
  if (n_a < 1 || n_b < 1) {
    throw std::invalid_argument("stratified_schedule: datasets must be non-empty");
  }
  std::mt19937_64 rng = epoch_rng(seed, epoch);
  long target = std::max(n_a, n_b);
  std::vector<long> a = oversampled(n_a, target, rng);
  std::vector<long> b = oversampled(n_b, target, rng);

  EpochSchedule schedule;
  schedule.order.reserve(2 * target);
  for (long i : a) schedule.order.emplace_back(0, i);
  for (long i : b) schedule.order.emplace_back(1, i);
  std::shuffle(schedule.order.begin(), schedule.order.end(), rng);
  return schedule;
}

EpochSchedule mono_schedule(long n, uint64_t seed, long epoch) {
  if (n < 1) throw std::invalid_argument("mono_schedule: dataset must be non-empty");
  std::mt19937_64 rng = epoch_rng(seed, epoch);
  EpochSchedule schedule;
  schedule.order.reserve(n);
  for (long i = 0; i < n; ++i) schedule.order.emplace_back(0, i);
  std::shuffle(schedule.order.begin(), schedule.order.end(), rng);
  return schedule;
}

}  // namespace polysrl
