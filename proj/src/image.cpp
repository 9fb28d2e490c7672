#include "stemcalyx/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "stemcalyx/error.hpp"

namespace stemcalyx {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::Parameter, "image dimensions must be at least 1x1, got " +
                                          std::to_string(width) + "x" +
                                          std::to_string(height));
  }
}

std::size_t pixel_count(int width, int height) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

}  // namespace

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(pixel_count(width, height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != pixel_count(width, height)) {
    throw Error(ErrorKind::Parameter, "gray image data length does not match dimensions");
  }
}

std::uint8_t GrayImage::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return data_[index(x, y)];
}

ColorImage::ColorImage(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(3 * pixel_count(width, height), 0);
}

ColorImage::ColorImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != 3 * pixel_count(width, height)) {
    throw Error(ErrorKind::Parameter, "color image data length does not match dimensions");
  }
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(pixel_count(width, height), fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

GrayImage mask_to_gray(const BinaryMask& mask) {
  GrayImage out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) out.data()[i] = mask.test(i) ? 255 : 0;
  return out;
}

BinaryMask binarize(const GrayImage& image, std::uint8_t above) {
  BinaryMask out(image.width(), image.height());
  auto px = image.data();
  for (std::size_t i = 0; i < px.size(); ++i) out.set_index(i, px[i] > above);
  return out;
}

GrayImage to_grayscale(const ColorImage& image) {
  GrayImage out(image.width(), image.height());
  auto src = image.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double luma = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(luma), 0, 255));
  }
  return out;
}

GrayImage median_filter(const GrayImage& image, int radius) {
  if (radius < 1) {
    throw Error(ErrorKind::Parameter, "median radius must be >= 1");
  }
  const int side = 2 * radius + 1;
  if (side > image.width() && side > image.height()) {
    throw Error(ErrorKind::Parameter, "median window " + std::to_string(side) +
                                          " exceeds both image dimensions");
  }
  GrayImage out(image.width(), image.height());
  std::vector<std::uint8_t> window(static_cast<std::size_t>(side) * side);
  const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      std::size_t n = 0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) window[n++] = image.clamped(x + dx, y + dy);
      std::nth_element(window.begin(), mid, window.end());
      out.at(x, y) = *mid;
    }
  }
  return out;
}

GrayImage sobel_magnitude(const GrayImage& image) {
  if (image.width() < 3 || image.height() < 3) {
    throw Error(ErrorKind::Parameter, "sobel requires an image of at least 3x3");
  }
  GrayImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      auto p = [&](int dx, int dy) { return static_cast<int>(image.clamped(x + dx, y + dy)); };
      const int gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
      const int gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      const long mag = std::lround(std::sqrt(static_cast<double>(gx * gx + gy * gy)));
      out.at(x, y) = static_cast<std::uint8_t>(std::min<long>(mag, 255));
    }
  }
  return out;
}

namespace {

// Clockwise on screen (y down), starting west.
constexpr std::array<Point, 8> kMoore = {{
    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1},
}};

int moore_index(Point d) {
  for (int i = 0; i < 8; ++i)
    if (kMoore[i] == d) return i;
  return -1;
}

}  // namespace

BoundaryChain trace_boundary(const BinaryMask& mask, Point origin) {
  // One-pixel zero padding so every neighbour read is in range.
  const int pw = mask.width() + 2;
  const int ph = mask.height() + 2;
  std::vector<std::uint8_t> padded(static_cast<std::size_t>(pw) * ph, 0);
  Point start{-1, -1};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      padded[static_cast<std::size_t>(y + 1) * pw + x + 1] = 1;
      if (start.x < 0) start = {x + 1, y + 1};
    }
  }
  if (start.x < 0) throw Error(ErrorKind::EmptyRegion, "cannot trace the boundary of an empty mask");

  auto inside = [&](Point p) { return padded[static_cast<std::size_t>(p.y) * pw + p.x] != 0; };
  auto shift = [&](Point p) { return Point{p.x - 1 + origin.x, p.y - 1 + origin.y}; };

  // The trace stops when it stands on the start pixel and is about to repeat
  // its first move. Stopping on the first re-entry with the original backtrack
  // pixel can cycle forever when the start pixel joins two loops.
  BoundaryChain chain;
  Point current = start;
  Point back{start.x - 1, start.y};
  Point first_move{-1, -1};
  const std::size_t limit = 4 * mask.count() + 8;
  while (chain.size() <= limit) {
    const int from = moore_index({back.x - current.x, back.y - current.y});
    Point next{-1, -1};
    Point next_back{};
    for (int k = 1; k <= 8; ++k) {
      const Point d = kMoore[(from + k) % 8];
      const Point c{current.x + d.x, current.y + d.y};
      if (inside(c)) {
        next = c;
        const Point pd = kMoore[(from + k - 1) % 8];
        next_back = {current.x + pd.x, current.y + pd.y};
        break;
      }
    }
    if (next.x < 0) {  // isolated pixel
      chain.push_back(shift(current));
      break;
    }
    if (current == start) {
      if (first_move.x < 0) {
        first_move = next;
      } else if (next == first_move) {
        break;
      }
    }
    chain.push_back(shift(current));
    current = next;
    back = next_back;
  }
  return chain;
}

BoundaryChain outer_contour(const BinaryMask& mask, Point origin) {
  Point start{-1, -1};
  for (int y = 0; y < mask.height() && start.x < 0; ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) {
        start = {x, y};
        break;
      }
    }
  }
  if (start.x < 0) throw Error(ErrorKind::EmptyRegion, "cannot trace the contour of an empty mask");

  // Walk corner to corner with the object on the right. At each corner look
  // at the two pixels ahead: turn left onto a left pixel (diagonal contact
  // counts as connected), go straight along a right pixel, else turn right.
  auto object_at = [&](int twice_x, int twice_y) {
    return mask.get((twice_x - 1) / 2, (twice_y - 1) / 2);  // doubled centres are odd
  };
  BoundaryChain contour;
  Point v = start;
  Point d{1, 0};
  const std::size_t limit = 4 * mask.count() + 4;
  while (contour.size() <= limit) {
    const Point r{-d.y, d.x};
    // Pixel centres, doubled to stay on integers: 2v + d -+ r.
    const bool ahead_left = object_at(2 * v.x + d.x - r.x, 2 * v.y + d.y - r.y);
    const bool ahead_right = object_at(2 * v.x + d.x + r.x, 2 * v.y + d.y + r.y);
    const Point next = ahead_left ? Point{-r.x, -r.y} : ahead_right ? d : r;
    if (!contour.empty() && v == start && next == Point{1, 0}) break;
    contour.push_back({v.x + origin.x, v.y + origin.y});
    d = next;
    v = {v.x + d.x, v.y + d.y};
  }
  return contour;
}

std::vector<CandidateObject> connected_components(const BinaryMask& mask,
                                                  std::size_t min_area) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> labels(mask.size(), -1);
  struct Region {
    std::vector<std::size_t> pixels;
    int min_x, min_y, max_x, max_y;
    std::size_t first;
  };
  std::vector<Region> regions;
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask.test(i) || labels[i] >= 0) continue;
    const int id = static_cast<int>(regions.size());
    Region r{{}, w, h, -1, -1, i};
    labels[i] = id;
    stack.push_back(i);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      r.pixels.push_back(p);
      const int px = static_cast<int>(p % w);
      const int py = static_cast<int>(p / w);
      r.min_x = std::min(r.min_x, px);
      r.max_x = std::max(r.max_x, px);
      r.min_y = std::min(r.min_y, py);
      r.max_y = std::max(r.max_y, py);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = px + dx;
          const int ny = py + dy;
          if (!mask.get(nx, ny)) continue;
          const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
          if (labels[q] >= 0) continue;
          labels[q] = id;
          stack.push_back(q);
        }
      }
    }
    regions.push_back(std::move(r));
  }

  std::vector<std::size_t> order(regions.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Region& ra = regions[a];
    const Region& rb = regions[b];
    if (ra.pixels.size() != rb.pixels.size()) return ra.pixels.size() > rb.pixels.size();
    if (ra.min_y != rb.min_y) return ra.min_y < rb.min_y;
    if (ra.min_x != rb.min_x) return ra.min_x < rb.min_x;
    return ra.first < rb.first;
  });

  std::vector<CandidateObject> out;
  for (std::size_t idx : order) {
    const Region& r = regions[idx];
    if (r.pixels.size() < min_area) continue;
    BinaryMask crop(r.max_x - r.min_x + 1, r.max_y - r.min_y + 1);
    for (std::size_t p : r.pixels) {
      crop.set(static_cast<int>(p % w) - r.min_x, static_cast<int>(p / w) - r.min_y);
    }
    const Point origin{r.min_x, r.min_y};
    BoundaryChain chain = trace_boundary(crop, origin);
    out.push_back(CandidateObject{std::move(crop), origin, r.pixels.size(), std::move(chain)});
  }
  return out;
}

}  // namespace stemcalyx
