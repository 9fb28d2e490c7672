#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace stemcalyx {

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Row-major 8-bit intensities.
class GrayImage {
 public:
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return data_[index(x, y)]; }
  // Edge-replicated read.
  std::uint8_t clamped(int x, int y) const;
  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

// Row-major interleaved RGB.
class ColorImage {
 public:
  ColorImage(int width, int height);
  ColorImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }
  std::span<const std::uint8_t, 3> pixel(int x, int y) const {
    return std::span<const std::uint8_t, 3>(
        data_.data() + 3 * (static_cast<std::size_t>(y) * width_ + x), 3);
  }

  friend bool operator==(const ColorImage&, const ColorImage&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

class BinaryMask {
 public:
  BinaryMask(int width, int height, bool fill = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool value = true) { bits_[index(x, y)] = value ? 1 : 0; }
  // Out-of-range reads are false.
  bool get(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && at(x, y);
  }
  bool test(std::size_t i) const { return bits_[i] != 0; }
  void set_index(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }
  std::size_t size() const noexcept { return bits_.size(); }
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

struct Box {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  friend bool operator==(const Box&, const Box&) = default;
};

// Closed contour; consecutive points (and last/first) are 8-neighbours.
using BoundaryChain = std::vector<Point>;

struct CandidateObject {
  BinaryMask mask;  // cropped to the bounding box
  Point origin;     // top-left of the bounding box in source coordinates
  std::size_t area = 0;
  BoundaryChain boundary;  // source coordinates

  Box bbox() const { return {origin.x, origin.y, mask.width(), mask.height()}; }
};

using AnyImage = std::variant<GrayImage, ColorImage>;

// PGM (P2/P5) yields GrayImage, PPM (P3/P6) yields ColorImage; maxval 255 only.
AnyImage load_image(const std::filesystem::path& path);
AnyImage decode_pnm(std::span<const std::uint8_t> bytes);
GrayImage load_gray(const std::filesystem::path& path);

// Binary P5/P6 encoding.
void save_image(const GrayImage& image, const std::filesystem::path& path);
void save_image(const ColorImage& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pnm(const GrayImage& image);
std::vector<std::uint8_t> encode_pnm(const ColorImage& image);

// Masks travel as PGM with 0/255; loading rebinarizes at > 127.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);
BinaryMask load_mask(const std::filesystem::path& path);
GrayImage mask_to_gray(const BinaryMask& mask);
BinaryMask binarize(const GrayImage& image, std::uint8_t above = 127);

// Rec.601 luma.
GrayImage to_grayscale(const ColorImage& image);

GrayImage median_filter(const GrayImage& image, int radius = 1);

// 3x3 Sobel magnitude, clamped to 255, edge-replicated borders.
GrayImage sobel_magnitude(const GrayImage& image);

// 8-connected components with area >= min_area, ordered by area descending,
// then by bounding-box origin row-major.
std::vector<CandidateObject> connected_components(const BinaryMask& mask,
                                                  std::size_t min_area);

// Moore-neighbour tracing of the outer boundary pixels. The chain starts at
// the top-most, then left-most pixel and has positive signed area in (x, y).
// It ends when the trace is back on the start pixel about to repeat its first
// move.
BoundaryChain trace_boundary(const BinaryMask& mask, Point origin = {});

// Outer boundary along pixel edges: the corner points of the polygon that
// encloses the 8-connected component holding the top-most, left-most pixel,
// one unit step apart. Pixel (x, y) covers [x, x+1] x [y, y+1]. Upscaling a
// mask by an integer factor scales this polygon exactly.
BoundaryChain outer_contour(const BinaryMask& mask, Point origin = {});

}  // namespace stemcalyx
