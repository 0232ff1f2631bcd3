#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "mssit/common.hpp"
#include "mssit/rng.hpp"

namespace mssit {

// Balancing sampler for skewed regression targets: equal-width bins over
// [min, max], each draw picks a non-empty bin uniformly and then a member
// uniformly. Deterministic per seed; the stream is infinite.
class BalancedSampler {
 public:
  BalancedSampler(const std::vector<double>& targets, int bins, std::uint64_t seed)
      : rng_(seed) {
    require(!targets.empty(), "balanced sampler needs a non-empty target list");
    require(bins >= 1, "bin count must be >= 1");
    const double lo = *std::min_element(targets.begin(), targets.end());
    const double hi = *std::max_element(targets.begin(), targets.end());
    std::vector<std::vector<std::uint32_t>> all_bins(bins);
    const double width = hi - lo;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      int b = 0;
      if (width > 0.0) {
        b = static_cast<int>((targets[i] - lo) / width * bins);
        b = std::clamp(b, 0, bins - 1);
      }
      all_bins[b].push_back(static_cast<std::uint32_t>(i));
    }
    for (auto& b : all_bins)
      if (!b.empty()) bins_.push_back(std::move(b));
  }

  std::uint32_t next() {
    const auto& bin = bins_[rng_.index(bins_.size())];
    return bin[rng_.index(bin.size())];
  }

  std::size_t nonempty_bins() const { return bins_.size(); }

 private:
  std::vector<std::vector<std::uint32_t>> bins_;
  Rng rng_;
};

// Epoch-shuffled sequential order used for segmentation training.
inline std::vector<std::uint32_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::uint32_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
  return idx;
}

}  // namespace mssit
