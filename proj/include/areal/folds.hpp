#pragma once

#include <cstdint>
#include <vector>

#include "areal/error.hpp"
#include "areal/rng.hpp"
#include "areal/text.hpp"

namespace areal {

// Deterministic k-fold partition: a seeded shuffle of the canonical row
// order chunked into k contiguous folds, the first n mod k folds one larger.
struct FoldSpec {
  std::size_t n = 0;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<int> assignment;  // per row, fold index in [0, k)

  std::vector<std::size_t> fold_rows(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (assignment[i] == fold) out.push_back(i);
    }
    return out;
  }

  // Content fingerprint recorded in reports to assert both experiment
  // conditions consumed the same partition.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xff;
        h *= 0x100000001b3ULL;
      }
    };
    mix(n);
    mix(static_cast<std::uint64_t>(k));
    mix(seed);
    for (const int a : assignment) mix(static_cast<std::uint64_t>(a));
    return h;
  }
};

inline FoldSpec kfold_split(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("kfold_split: need k >= 2");
  if (static_cast<std::size_t>(k) > n) {
    throw ValidationError("kfold_split: k exceeds row count");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  FoldSpec spec;
  spec.n = n;
  spec.k = k;
  spec.seed = seed;
  spec.assignment.assign(n, -1);
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) {
      spec.assignment[order[pos++]] = f;
    }
  }
  return spec;
}

}  // namespace areal
