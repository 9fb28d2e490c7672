#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stemcalyx/image.hpp"

namespace stemcalyx {

enum class SeedLabel : std::uint8_t { Unlabeled = 0, Foreground = 1, Background = 2 };

class SeedMask {
 public:
  SeedMask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  SeedLabel at(int x, int y) const { return labels_[index(x, y)]; }
  void set(int x, int y, SeedLabel label) { labels_[index(x, y)] = label; }
  SeedLabel at_index(std::size_t i) const { return labels_[i]; }
  std::size_t count(SeedLabel label) const;

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }
  int width_;
  int height_;
  std::vector<SeedLabel> labels_;
};

// Border ring of `border` pixels is background; a centred square of side
// round(core_fraction * min(width, height)) is foreground.
SeedMask auto_seed(int width, int height, int border = 2, double core_fraction = 0.25);
inline SeedMask auto_seed(const GrayImage& image, int border = 2, double core_fraction = 0.25) {
  return auto_seed(image.width(), image.height(), border, core_fraction);
}

struct GrowCutResult {
  BinaryMask foreground;
  int passes = 0;  // passes executed, including the final no-change pass
  bool converged = false;
};

// Synchronous grow-cut automaton over the 4-neighbourhood. max_iters <= 0
// selects width + height.
GrowCutResult grow_cut(const GrayImage& image, const SeedMask& seeds, int max_iters = 0);
GrowCutResult grow_cut(const ColorImage& image, const SeedMask& seeds, int max_iters = 0);

using Thresholds = std::array<int, 3>;
inline constexpr Thresholds kDefaultThresholds = {30, 50, 65};

// Per-pixel count of thresholds the intensity falls strictly below.
struct LayerImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> counts;

  std::uint8_t at(int x, int y) const { return counts[static_cast<std::size_t>(y) * width + x]; }
  // Debug view: counts scaled by 85.
  GrayImage to_gray() const;
};

LayerImage multi_threshold(const GrayImage& image, const Thresholds& thresholds = kDefaultThresholds);

BinaryMask marker_from_layers(const LayerImage& layers, int min_layers = 2);

// Grows the marker through 8-neighbours whose gradient is >= grad_threshold.
BinaryMask gradient_refine(const BinaryMask& marker, const GrayImage& gradient,
                           int grad_threshold = 40);

// Candidates are the components of (refined AND fruit).
std::vector<CandidateObject> detect_candidates(const BinaryMask& fruit, const BinaryMask& refined,
                                               std::size_t min_area = 20);

}  // namespace stemcalyx
