#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "stemcalyx/error.hpp"
#include "stemcalyx/image.hpp"
#include "stemcalyx/rng.hpp"

using namespace stemcalyx;

namespace {

std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }

GrayImage random_gray(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage img(w, h);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

BinaryMask random_mask(int w, int h, double density, std::uint64_t seed) {
  Rng rng(seed);
  BinaryMask m(w, h);
  for (std::size_t i = 0; i < m.size(); ++i) m.set_index(i, rng.uniform() < density);
  return m;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Parameter;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "stemcalyx_test_imaging";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("ascii pgm decodes literally") {
  const auto img = std::get<GrayImage>(decode_pnm(bytes("P2 2 2 255\n0 255 128 64\n")));
  CHECK(img.width() == 2);
  CHECK(img.height() == 2);
  CHECK(std::vector<std::uint8_t>(img.data().begin(), img.data().end()) == std::vector<std::uint8_t>{0, 255, 128, 64});
}

TEST_CASE("pnm comments are skipped") {
  const auto img = std::get<GrayImage>(decode_pnm(bytes("P2\n# a comment\n1 1\n# another\n255\n7\n")));
  CHECK(img.at(0, 0) == 7);
}

TEST_CASE("red ppm decodes to 48 bytes") {
  std::string s = "P6\n4 4\n255\n";
  for (int i = 0; i < 16; ++i) s += std::string("\xff\x00\x00", 3);
  const auto img = std::get<ColorImage>(decode_pnm(bytes(s)));
  CHECK(img.data().size() == 48);
  CHECK(img.pixel(3, 3)[0] == 255);
  CHECK(img.pixel(3, 3)[1] == 0);
}

TEST_CASE("ascii ppm decodes") {
  const auto img = std::get<ColorImage>(decode_pnm(bytes("P3 1 1 255 1 2 3")));
  CHECK(img.pixel(0, 0)[2] == 3);
}

TEST_CASE("malformed pnm inputs are format errors naming the field") {
  try {
    decode_pnm(bytes("P5 0 0 255\n"));
    FAIL("zero dimensions accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
    CHECK(std::string(e.what()).find("dimension") != std::string::npos);
  }
  try {
    decode_pnm(bytes("P5 1 1 65535\n\x01\x02"));
    FAIL("16-bit maxval accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("maxval") != std::string::npos);
  }
  try {
    decode_pnm(bytes("P5 4 4 255\n\x01\x02"));
    FAIL("truncated payload accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
  }
  CHECK(kind_of([] { decode_pnm(bytes("P7 1 1 255\n\x01")); }) == ErrorKind::Format);
  CHECK(kind_of([] { decode_pnm(bytes("P2 1 1 255\n300")); }) == ErrorKind::Format);
}

TEST_CASE("save writes header plus payload and round trips") {
  const auto dir = temp_dir();
  GrayImage one(1, 1, 7);
  save_image(one, dir / "one.pgm");
  CHECK(std::filesystem::file_size(dir / "one.pgm") == std::string("P5\n1 1\n255\n").size() + 1);
  CHECK(load_gray(dir / "one.pgm") == one);

  const GrayImage g = random_gray(37, 23, 5);
  save_image(g, dir / "g.pgm");
  CHECK(std::get<GrayImage>(load_image(dir / "g.pgm")) == g);

  ColorImage c(5, 3);
  Rng rng(9);
  for (auto& v : c.data()) v = static_cast<std::uint8_t>(rng.below(256));
  save_image(c, dir / "c.ppm");
  CHECK(std::get<ColorImage>(load_image(dir / "c.ppm")) == c);

  const BinaryMask m = random_mask(17, 11, 0.4, 3);
  save_mask(m, dir / "m.pgm");
  CHECK(load_mask(dir / "m.pgm") == m);
}

TEST_CASE("unwritable and missing paths are io errors") {
  CHECK(kind_of([] { save_image(GrayImage(1, 1), "/nonexistent_dir_xyz/a.pgm"); }) == ErrorKind::Io);
  CHECK(kind_of([] { load_image("/nonexistent_dir_xyz/a.pgm"); }) == ErrorKind::Io);
}

TEST_CASE("luma conversion") {
  ColorImage c(3, 1, {255, 255, 255, 0, 0, 0, 255, 0, 0});
  const GrayImage g = to_grayscale(c);
  CHECK(g.at(0, 0) == 255);
  CHECK(g.at(1, 0) == 0);
  CHECK(g.at(2, 0) == static_cast<int>(std::lround(0.299 * 255)));
  CHECK(g.at(2, 0) == 76);
}

TEST_CASE("median filter basics") {
  GrayImage constant(6, 4, 93);
  CHECK(median_filter(constant, 1) == constant);

  GrayImage spike(3, 3, 0);
  spike.at(1, 1) = 255;
  CHECK(median_filter(spike, 1).at(1, 1) == 0);

  CHECK(kind_of([] { median_filter(GrayImage(4, 4), 0); }) == ErrorKind::Parameter);
  CHECK(kind_of([] { median_filter(GrayImage(3, 3), 2); }) == ErrorKind::Parameter);
}

TEST_CASE("median filter matches window sort oracle") {
  for (int radius : {1, 2}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const GrayImage img = random_gray(5 + static_cast<int>(seed), 5, seed);
      const GrayImage out = median_filter(img, radius);
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
          std::vector<int> window;
          for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
              const int cx = std::clamp(x + dx, 0, img.width() - 1);
              const int cy = std::clamp(y + dy, 0, img.height() - 1);
              window.push_back(img.at(cx, cy));
            }
          std::sort(window.begin(), window.end());
          REQUIRE(out.at(x, y) == window[window.size() / 2]);
        }
      }
    }
  }
}

TEST_CASE("median filter is idempotent on large two-level regions") {
  GrayImage img(40, 40, 10);
  for (int y = 8; y < 30; ++y)
    for (int x = 5; x < 33; ++x) img.at(x, y) = 200;
  const GrayImage once = median_filter(img, 1);
  CHECK(median_filter(once, 1) == once);
}

TEST_CASE("sobel basics") {
  CHECK(kind_of([] { sobel_magnitude(GrayImage(2, 5)); }) == ErrorKind::Parameter);
  const GrayImage flat = sobel_magnitude(GrayImage(5, 5, 77));
  CHECK(std::all_of(flat.data().begin(), flat.data().end(), [](std::uint8_t v) { return v == 0; }));

  GrayImage step(6, 5, 0);
  for (int y = 0; y < 5; ++y)
    for (int x = 3; x < 6; ++x) step.at(x, y) = 255;
  const GrayImage g = sobel_magnitude(step);
  for (int y = 0; y < 5; ++y) {
    CHECK(g.at(2, y) == 255);
    CHECK(g.at(3, y) == 255);
    CHECK(g.at(0, y) == 0);
    CHECK(g.at(5, y) == 0);
  }
}

TEST_CASE("sobel matches direct convolution oracle") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const GrayImage img = random_gray(7, 7, seed * 11);
    const GrayImage g = sobel_magnitude(img);
    const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    const int ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    for (int y = 0; y < 7; ++y) {
      for (int x = 0; x < 7; ++x) {
        double gx = 0, gy = 0;
        for (int j = 0; j < 3; ++j)
          for (int i = 0; i < 3; ++i) {
            const int v = img.at(std::clamp(x + i - 1, 0, 6), std::clamp(y + j - 1, 0, 6));
            gx += kx[j][i] * v;
            gy += ky[j][i] * v;
          }
        const long expect = std::min(255L, std::lround(std::sqrt(gx * gx + gy * gy)));
        REQUIRE(g.at(x, y) == expect);
      }
    }
  }
}

TEST_CASE("connected components basics") {
  BinaryMask m(10, 5);
  for (int y = 1; y < 4; ++y)
    for (int x = 0; x < 3; ++x) {
      m.set(x, y);
      m.set(x + 6, y);
    }
  const auto comps = connected_components(m, 1);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].area == 9);
  CHECK(comps[1].area == 9);
  CHECK(comps[0].origin == Point{0, 1});
  CHECK(comps[1].origin == Point{6, 1});

  BinaryMask diag(6, 6);
  for (int i = 0; i < 6; ++i) diag.set(i, i);
  CHECK(connected_components(diag, 1).size() == 1);
  CHECK(connected_components(diag, 7).empty());
}

TEST_CASE("connected components match recursive flood fill and partition the mask") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const BinaryMask m = random_mask(32, 32, 0.45, seed);
    std::vector<int> label(m.size(), -1);
    std::function<void(int, int, int)> fill = [&](int x, int y, int id) {
      if (!m.get(x, y) || label[static_cast<std::size_t>(y) * 32 + x] >= 0) return;
      label[static_cast<std::size_t>(y) * 32 + x] = id;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (dx || dy) fill(x + dx, y + dy, id);
    };
    int count = 0;
    std::multiset<std::size_t> areas;
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        if (m.at(x, y) && label[static_cast<std::size_t>(y) * 32 + x] < 0) fill(x, y, count++);
    for (int id = 0; id < count; ++id)
      areas.insert(static_cast<std::size_t>(std::count(label.begin(), label.end(), id)));

    const auto comps = connected_components(m, 1);
    REQUIRE(comps.size() == static_cast<std::size_t>(count));
    std::multiset<std::size_t> got;
    std::size_t total = 0;
    BinaryMask covered(32, 32);
    for (std::size_t k = 0; k < comps.size(); ++k) {
      const auto& c = comps[k];
      got.insert(c.area);
      total += c.area;
      CHECK(c.area == c.mask.count());
      if (k > 0) CHECK(comps[k - 1].area >= c.area);
      for (int y = 0; y < c.mask.height(); ++y)
        for (int x = 0; x < c.mask.width(); ++x)
          if (c.mask.at(x, y)) {
            CHECK_FALSE(covered.at(c.origin.x + x, c.origin.y + y));
            covered.set(c.origin.x + x, c.origin.y + y);
          }
      for (const Point& p : c.boundary) {
        CHECK(p.x >= c.origin.x);
        CHECK(p.y >= c.origin.y);
        CHECK(p.x < c.origin.x + c.mask.width());
        CHECK(p.y < c.origin.y + c.mask.height());
      }
    }
    CHECK(got == areas);
    CHECK(total == m.count());
    CHECK(covered == m);
  }
}

namespace {

// Object pixels with a background 4-neighbour that is connected to the
// outside of the padded mask.
std::set<std::pair<int, int>> outer_boundary_pixels(const BinaryMask& m) {
  const int w = m.width() + 2, h = m.height() + 2;
  std::vector<bool> outside(static_cast<std::size_t>(w) * h, false);
  std::vector<std::pair<int, int>> stack{{0, 0}};
  outside[0] = true;
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k], ny = y + dy[k];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      if (m.get(nx - 1, ny - 1) || outside[static_cast<std::size_t>(ny) * w + nx]) continue;
      outside[static_cast<std::size_t>(ny) * w + nx] = true;
      stack.push_back({nx, ny});
    }
  }
  std::set<std::pair<int, int>> out;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k)
        if (outside[static_cast<std::size_t>(y + 1 + dy[k]) * w + (x + 1 + dx[k])]) out.insert({x, y});
    }
  return out;
}

double shoelace(const BoundaryChain& c) {
  double a = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Point& p = c[i];
    const Point& q = c[(i + 1) % c.size()];
    a += static_cast<double>(p.x) * q.y - static_cast<double>(q.x) * p.y;
  }
  return a / 2;
}

void check_chain(const BinaryMask& m, const BoundaryChain& chain) {
  REQUIRE(!chain.empty());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Point& p = chain[i];
    const Point& q = chain[(i + 1) % chain.size()];
    CHECK(std::max(std::abs(p.x - q.x), std::abs(p.y - q.y)) <= 1);
    CHECK(m.get(p.x, p.y));
  }
  std::set<std::pair<int, int>> visited;
  for (const Point& p : chain) visited.insert({p.x, p.y});
  CHECK(visited == outer_boundary_pixels(m));
}

}  // namespace

TEST_CASE("trace boundary small cases") {
  BinaryMask one(1, 1, true);
  const auto c1 = trace_boundary(one);
  CHECK(c1.size() == 1);

  BinaryMask square(2, 2, true);
  const auto c4 = trace_boundary(square);
  CHECK(c4.size() == 4);
  CHECK(c4.front() == Point{0, 0});
  CHECK(shoelace(c4) > 0);

  CHECK(kind_of([] { trace_boundary(BinaryMask(3, 3)); }) == ErrorKind::EmptyRegion);
}

TEST_CASE("trace boundary of a disk matches perimeter enumeration") {
  BinaryMask disk(11, 11);
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x)
      if ((x - 5) * (x - 5) + (y - 5) * (y - 5) <= 25) disk.set(x, y);
  const auto chain = trace_boundary(disk, {10, 20});
  BoundaryChain local;
  for (const Point& p : chain) local.push_back({p.x - 10, p.y - 20});
  check_chain(disk, local);
  CHECK(local.size() == outer_boundary_pixels(disk).size());
  CHECK(local.front() == Point{5, 0});
  CHECK(shoelace(local) > 0);
}

TEST_CASE("trace boundary visits every outer boundary pixel of random components") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const BinaryMask m = random_mask(24, 24, 0.55, seed * 7);
    for (const auto& comp : connected_components(m, 2)) {
      BoundaryChain local;
      for (const Point& p : comp.boundary) local.push_back({p.x - comp.origin.x, p.y - comp.origin.y});
      check_chain(comp.mask, local);
    }
  }
}

TEST_CASE("outer contour small cases") {
  BinaryMask one(1, 1, true);
  CHECK(outer_contour(one) == BoundaryChain{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(outer_contour(one, {3, 4}) == BoundaryChain{{3, 4}, {4, 4}, {4, 5}, {3, 5}});
  CHECK(outer_contour(BinaryMask(2, 2, true)).size() == 8);
  CHECK(kind_of([] { outer_contour(BinaryMask(3, 3)); }) == ErrorKind::EmptyRegion);

  // Diagonal neighbours belong to one component.
  BinaryMask diag(2, 2);
  diag.set(0, 0);
  diag.set(1, 1);
  const auto c = outer_contour(diag);
  CHECK(c.size() == 8);
  CHECK(std::count(c.begin(), c.end(), Point{1, 1}) == 2);
}

TEST_CASE("outer contour encloses the component with holes filled") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const BinaryMask m = random_mask(20, 20, 0.6, seed * 13);
    for (const auto& comp : connected_components(m, 1)) {
      const BoundaryChain c = outer_contour(comp.mask);
      for (std::size_t i = 0; i < c.size(); ++i) {
        const Point& p = c[i];
        const Point& q = c[(i + 1) % c.size()];
        REQUIRE(std::abs(p.x - q.x) + std::abs(p.y - q.y) == 1);
      }
      // Area enclosed equals object pixels plus background pixels not
      // connected to the outside.
      std::size_t holes = 0;
      const int w = comp.mask.width() + 2, h = comp.mask.height() + 2;
      std::vector<bool> outside(static_cast<std::size_t>(w) * h, false);
      std::vector<std::pair<int, int>> stack{{0, 0}};
      outside[0] = true;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = x + dx[k], ny = y + dy[k];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          if (comp.mask.get(nx - 1, ny - 1) || outside[static_cast<std::size_t>(ny) * w + nx]) continue;
          outside[static_cast<std::size_t>(ny) * w + nx] = true;
          stack.push_back({nx, ny});
        }
      }
      for (int y = 0; y < comp.mask.height(); ++y)
        for (int x = 0; x < comp.mask.width(); ++x)
          if (!comp.mask.at(x, y) && !outside[static_cast<std::size_t>(y + 1) * w + x + 1]) ++holes;
      CHECK(shoelace(c) == doctest::Approx(static_cast<double>(comp.mask.count() + holes)));
    }
  }
}

TEST_CASE("outer contour scales exactly with integer upscaling") {
  BinaryMask m(5, 4);
  for (auto [x, y] : std::vector<std::pair<int, int>>{{1, 0}, {2, 0}, {0, 1}, {1, 1}, {3, 2}, {4, 3}, {2, 1}}) m.set(x, y);
  BinaryMask big(15, 12);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 15; ++x) big.set(x, y, m.at(x / 3, y / 3));
  const auto small_c = outer_contour(m);
  const auto big_c = outer_contour(big);
  REQUIRE(big_c.size() == 3 * small_c.size());
  for (std::size_t i = 0; i < small_c.size(); ++i) {
    CHECK(big_c[3 * i].x == 3 * small_c[i].x);
    CHECK(big_c[3 * i].y == 3 * small_c[i].y);
  }
}
