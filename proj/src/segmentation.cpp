#include "stemcalyx/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stemcalyx/error.hpp"

namespace stemcalyx {

SeedMask::SeedMask(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw Error(ErrorKind::Parameter, "seed mask dimensions must be >= 1");
  labels_.assign(static_cast<std::size_t>(width) * height, SeedLabel::Unlabeled);
}

std::size_t SeedMask::count(SeedLabel label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

SeedMask auto_seed(int width, int height, int border, double core_fraction) {
  if (border < 1) throw Error(ErrorKind::Parameter, "seed border must be >= 1");
  if (!(core_fraction > 0.0 && core_fraction < 1.0)) {
    throw Error(ErrorKind::Parameter, "core_fraction must lie in (0, 1)");
  }
  const int side = static_cast<int>(std::lround(core_fraction * std::min(width, height)));
  const int x0 = (width - side) / 2;
  const int y0 = (height - side) / 2;
  if (side < 1 || x0 < border || y0 < border || x0 + side > width - border ||
      y0 + side > height - border) {
    throw Error(ErrorKind::Parameter, "seed geometry overlaps: image " + std::to_string(width) +
                                          "x" + std::to_string(height) + " too small for border " +
                                          std::to_string(border));
  }
  SeedMask seeds(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (x < border || y < border || x >= width - border || y >= height - border) {
        seeds.set(x, y, SeedLabel::Background);
      } else if (x >= x0 && x < x0 + side && y >= y0 && y < y0 + side) {
        seeds.set(x, y, SeedLabel::Foreground);
      }
    }
  }
  return seeds;
}

namespace {

// `distance(p, q)` returns the feature distance already divided by its
// maximum, so g = 1 - distance.
template <class Distance>
GrowCutResult run_grow_cut(int width, int height, const SeedMask& seeds, int max_iters,
                           Distance distance) {
  if (seeds.width() != width || seeds.height() != height) {
    throw Error(ErrorKind::Parameter, "seed mask dimensions do not match the image");
  }
  if (seeds.count(SeedLabel::Foreground) == 0 || seeds.count(SeedLabel::Background) == 0) {
    throw Error(ErrorKind::Parameter, "grow-cut needs at least one foreground and one background seed");
  }
  if (max_iters <= 0) max_iters = width + height;

  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<SeedLabel> label(n);
  std::vector<double> strength(n);
  for (std::size_t i = 0; i < n; ++i) {
    label[i] = seeds.at_index(i);
    strength[i] = label[i] == SeedLabel::Unlabeled ? 0.0 : 1.0;
  }

  struct Update {
    std::size_t cell;
    SeedLabel label;
    double strength;
  };
  std::vector<Update> updates;
  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;
  std::vector<int> stamp(n, -1);

  GrowCutResult result{BinaryMask(width, height), 0, false};
  while (result.passes < max_iters) {
    ++result.passes;
    updates.clear();
    // Reads only the previous pass's state; writes are deferred.
    for (std::size_t p : active) {
      const int x = static_cast<int>(p % width);
      const int y = static_cast<int>(p / width);
      double best = strength[p];
      SeedLabel best_label = SeedLabel::Unlabeled;
      auto attack = [&](std::size_t q) {
        if (label[q] == SeedLabel::Unlabeled) return;
        const double force = (1.0 - distance(p, q)) * strength[q];
        if (force > best) {
          best = force;
          best_label = label[q];
        }
      };
      if (y > 0) attack(p - width);
      if (x > 0) attack(p - 1);
      if (x + 1 < width) attack(p + 1);
      if (y + 1 < height) attack(p + width);
      if (best_label != SeedLabel::Unlabeled) updates.push_back({p, best_label, best});
    }
    if (updates.empty()) {
      result.converged = true;
      break;
    }
    active.clear();
    const int pass = result.passes;
    auto activate = [&](std::size_t q) {
      if (stamp[q] != pass) {
        stamp[q] = pass;
        active.push_back(q);
      }
    };
    for (const Update& u : updates) {
      label[u.cell] = u.label;
      strength[u.cell] = u.strength;
      const int x = static_cast<int>(u.cell % width);
      const int y = static_cast<int>(u.cell / width);
      if (y > 0) activate(u.cell - width);
      if (x > 0) activate(u.cell - 1);
      if (x + 1 < width) activate(u.cell + 1);
      if (y + 1 < height) activate(u.cell + width);
    }
    std::sort(active.begin(), active.end());
  }
  for (std::size_t i = 0; i < n; ++i) {
    result.foreground.set_index(i, label[i] == SeedLabel::Foreground);
  }
  return result;
}

}  // namespace

GrowCutResult grow_cut(const GrayImage& image, const SeedMask& seeds, int max_iters) {
  const auto px = image.data();
  return run_grow_cut(image.width(), image.height(), seeds, max_iters,
                      [px](std::size_t p, std::size_t q) {
                        return std::abs(static_cast<int>(px[p]) - static_cast<int>(px[q])) / 255.0;
                      });
}

GrowCutResult grow_cut(const ColorImage& image, const SeedMask& seeds, int max_iters) {
  const auto px = image.data();
  const double max_norm = 255.0 * std::sqrt(3.0);
  return run_grow_cut(image.width(), image.height(), seeds, max_iters,
                      [px, max_norm](std::size_t p, std::size_t q) {
                        double sum = 0.0;
                        for (std::size_t c = 0; c < 3; ++c) {
                          const double d = static_cast<double>(px[3 * p + c]) - px[3 * q + c];
                          sum += d * d;
                        }
                        return std::sqrt(sum) / max_norm;
                      });
}

GrayImage LayerImage::to_gray() const {
  GrayImage out(width, height);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.data()[i] = static_cast<std::uint8_t>(std::min(255, counts[i] * 85));
  }
  return out;
}

LayerImage multi_threshold(const GrayImage& image, const Thresholds& thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] < 1 || thresholds[i] > 255) {
      throw Error(ErrorKind::Parameter, "thresholds must lie in [1, 255]");
    }
    if (i > 0 && thresholds[i] <= thresholds[i - 1]) {
      throw Error(ErrorKind::Parameter, "thresholds must be strictly ascending");
    }
  }
  LayerImage layers{image.width(), image.height(), std::vector<std::uint8_t>(image.data().size())};
  const auto px = image.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    std::uint8_t c = 0;
    for (int t : thresholds) c += px[i] < t ? 1 : 0;
    layers.counts[i] = c;
  }
  return layers;
}

BinaryMask marker_from_layers(const LayerImage& layers, int min_layers) {
  if (min_layers < 1 || min_layers > 3) throw Error(ErrorKind::Parameter, "min_layers must be in [1, 3]");
  BinaryMask out(layers.width, layers.height);
  for (std::size_t i = 0; i < layers.counts.size(); ++i) {
    out.set_index(i, layers.counts[i] >= min_layers);
  }
  return out;
}

BinaryMask gradient_refine(const BinaryMask& marker, const GrayImage& gradient, int grad_threshold) {
  if (marker.width() != gradient.width() || marker.height() != gradient.height()) {
    throw Error(ErrorKind::Parameter, "marker and gradient dimensions differ");
  }
  const int w = marker.width();
  BinaryMask out = marker;
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < marker.size(); ++i)
    if (marker.test(i)) frontier.push_back(i);
  while (!frontier.empty()) {
    const std::size_t p = frontier.back();
    frontier.pop_back();
    const int px = static_cast<int>(p % w);
    const int py = static_cast<int>(p / w);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = px + dx;
        const int ny = py + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= marker.height() || out.at(nx, ny)) continue;
        if (gradient.at(nx, ny) >= grad_threshold) {
          out.set(nx, ny);
          frontier.push_back(static_cast<std::size_t>(ny) * w + nx);
        }
      }
    }
  }
  return out;
}

std::vector<CandidateObject> detect_candidates(const BinaryMask& fruit, const BinaryMask& refined,
                                               std::size_t min_area) {
  if (fruit.width() != refined.width() || fruit.height() != refined.height()) {
    throw Error(ErrorKind::Parameter, "fruit and candidate masks differ in size");
  }
  BinaryMask both(fruit.width(), fruit.height());
  for (std::size_t i = 0; i < both.size(); ++i) both.set_index(i, fruit.test(i) && refined.test(i));
  return connected_components(both, min_area);
}

}  // namespace stemcalyx
