#include <doctest.h>

#include <cmath>
#include <deque>
#include <numbers>

#include "stemcalyx/error.hpp"
#include "stemcalyx/rng.hpp"
#include "stemcalyx/segmentation.hpp"

using namespace stemcalyx;

namespace {

GrayImage random_gray(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage img(w, h);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

BinaryMask disk_mask(int size, double cx, double cy, double r) {
  BinaryMask m(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.set(x, y);
  return m;
}

bool subset(const BinaryMask& a, const BinaryMask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.test(i) && !b.test(i)) return false;
  return true;
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a.test(i) && b.test(i);
    uni += a.test(i) || b.test(i);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

TEST_CASE("auto seed geometry") {
  const SeedMask s = auto_seed(100, 100, 2, 0.2);
  CHECK(s.count(SeedLabel::Background) == 100 * 100 - 96 * 96);
  CHECK(s.count(SeedLabel::Background) == 784);
  CHECK(s.count(SeedLabel::Foreground) == 400);
  CHECK_THROWS_AS(auto_seed(10, 10, 5), Error);
  CHECK_THROWS_AS(auto_seed(100, 100, 0), Error);
  CHECK_THROWS_AS(auto_seed(100, 100, 2, 1.0), Error);
  const SeedMask a = auto_seed(random_gray(50, 40, 1));
  const SeedMask b = auto_seed(random_gray(50, 40, 2));
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 50; ++x) REQUIRE(a.at(x, y) == b.at(x, y));
}

TEST_CASE("grow cut with every pixel seeded returns the seeds") {
  GrayImage img = random_gray(8, 6, 3);
  SeedMask seeds(8, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 8; ++x) seeds.set(x, y, (x + y) % 3 ? SeedLabel::Foreground : SeedLabel::Background);
  const auto r = grow_cut(img, seeds);
  CHECK(r.converged);
  CHECK(r.passes == 1);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 8; ++x) CHECK(r.foreground.at(x, y) == ((x + y) % 3 != 0));
}

TEST_CASE("grow cut rejects seedless and mismatched input") {
  GrayImage img(10, 10, 0);
  SeedMask only_fg(10, 10);
  only_fg.set(5, 5, SeedLabel::Foreground);
  CHECK_THROWS_AS(grow_cut(img, only_fg), Error);
  CHECK_THROWS_AS(grow_cut(img, auto_seed(12, 12)), Error);
}

TEST_CASE("grow cut recovers a white disk within IoU 0.98") {
  const BinaryMask truth = disk_mask(64, 31.5, 31.5, 22.0);
  GrayImage img(64, 64, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) img.data()[i] = truth.test(i) ? 255 : 0;
  const auto r = grow_cut(img, auto_seed(img));
  CHECK(r.converged);
  CHECK(r.passes <= 64 + 64);
  CHECK(iou(r.foreground, truth) >= 0.98);

  ColorImage color(64, 64);
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (int c = 0; c < 3; ++c) color.data()[i * 3 + c] = truth.test(i) ? 230 : 10;
  const auto rc = grow_cut(color, auto_seed(64, 64));
  CHECK(rc.converged);
  CHECK(iou(rc.foreground, truth) >= 0.98);
}

TEST_CASE("grow cut on a uniform image is a wavefront race") {
  const int w = 41, h = 33;
  GrayImage img(w, h, 120);
  SeedMask seeds(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (x < 2 || y < 2 || x >= w - 2 || y >= h - 2) seeds.set(x, y, SeedLabel::Background);
  seeds.set(20, 16, SeedLabel::Foreground);

  auto bfs = [&](SeedLabel which) {
    std::vector<int> dist(static_cast<std::size_t>(w) * h, -1);
    std::deque<int> queue;
    for (int i = 0; i < w * h; ++i)
      if (seeds.at_index(static_cast<std::size_t>(i)) == which) {
        dist[static_cast<std::size_t>(i)] = 0;
        queue.push_back(i);
      }
    while (!queue.empty()) {
      const int p = queue.front();
      queue.pop_front();
      const int x = p % w, y = p / w;
      const int nx[] = {x + 1, x - 1, x, x}, ny[] = {y, y, y + 1, y - 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        const int q = ny[k] * w + nx[k];
        if (dist[static_cast<std::size_t>(q)] >= 0) continue;
        dist[static_cast<std::size_t>(q)] = dist[static_cast<std::size_t>(p)] + 1;
        queue.push_back(q);
      }
    }
    return dist;
  };
  const auto dfg = bfs(SeedLabel::Foreground);
  const auto dbg = bfs(SeedLabel::Background);
  const auto r = grow_cut(img, seeds);
  CHECK(r.converged);
  int decided = 0;
  for (int i = 0; i < w * h; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (dfg[k] == dbg[k]) continue;
    ++decided;
    REQUIRE(r.foreground.test(k) == (dfg[k] < dbg[k]));
  }
  CHECK(decided > w * h / 2);
  // Seeded cells keep their label.
  CHECK(r.foreground.at(20, 16));
  CHECK_FALSE(r.foreground.at(0, 0));
}

TEST_CASE("multi threshold counts") {
  GrayImage img(4, 1);
  img.at(0, 0) = 20;
  img.at(1, 0) = 40;
  img.at(2, 0) = 60;
  img.at(3, 0) = 200;
  const LayerImage layers = multi_threshold(img, {30, 50, 65});
  CHECK(layers.counts == std::vector<std::uint8_t>{3, 2, 1, 0});
  const BinaryMask m = marker_from_layers(layers, 2);
  CHECK(m.at(0, 0));
  CHECK(m.at(1, 0));
  CHECK_FALSE(m.at(2, 0));
  CHECK_FALSE(m.at(3, 0));

  const LayerImage white = multi_threshold(GrayImage(5, 5, 255));
  for (auto c : white.counts) CHECK(c == 0);

  CHECK_THROWS_AS(multi_threshold(img, {50, 30, 65}), Error);
  CHECK_THROWS_AS(multi_threshold(img, {30, 30, 65}), Error);
  CHECK_THROWS_AS(multi_threshold(img, {0, 30, 65}), Error);
  CHECK_THROWS_AS(marker_from_layers(layers, 0), Error);
  CHECK_THROWS_AS(marker_from_layers(layers, 4), Error);
}

TEST_CASE("multi threshold matches three binarizations and markers nest") {
  const Thresholds t = {30, 50, 65};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const GrayImage img = random_gray(30, 20, seed);
    const LayerImage layers = multi_threshold(img, t);
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 30; ++x) {
        int sum = 0;
        for (int k = 0; k < 3; ++k) sum += img.at(x, y) < t[static_cast<std::size_t>(k)] ? 1 : 0;
        REQUIRE(layers.at(x, y) == sum);
      }
    const BinaryMask m1 = marker_from_layers(layers, 1);
    const BinaryMask m2 = marker_from_layers(layers, 2);
    const BinaryMask m3 = marker_from_layers(layers, 3);
    CHECK(subset(m3, m2));
    CHECK(subset(m2, m1));
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 30; ++x) {
        CHECK(m1.at(x, y) == (img.at(x, y) < 65));
        CHECK(m3.at(x, y) == (img.at(x, y) < 30));
      }
  }
}

TEST_CASE("layer image dumps scaled by 85") {
  GrayImage img(2, 1);
  img.at(0, 0) = 10;
  img.at(1, 0) = 255;
  const GrayImage g = multi_threshold(img).to_gray();
  CHECK(g.at(0, 0) == 255);
  CHECK(g.at(1, 0) == 0);
}

TEST_CASE("gradient refine trivial cases") {
  BinaryMask marker(10, 10);
  marker.set(4, 4);
  marker.set(5, 4);
  CHECK(gradient_refine(marker, GrayImage(10, 10, 0), 40) == marker);
  CHECK(gradient_refine(BinaryMask(10, 10), GrayImage(10, 10, 255), 40).count() == 0);
  CHECK_THROWS_AS(gradient_refine(marker, GrayImage(9, 10, 0), 40), Error);
}

TEST_CASE("gradient refine grows into a high gradient ring") {
  GrayImage grad(21, 21, 0);
  for (int y = 0; y < 21; ++y)
    for (int x = 0; x < 21; ++x) {
      const double r = std::hypot(x - 10, y - 10);
      if (r >= 4 && r <= 6) grad.at(x, y) = 200;
    }
  BinaryMask marker(21, 21);
  for (int y = 8; y <= 12; ++y)
    for (int x = 8; x <= 12; ++x)
      if (std::hypot(x - 10, y - 10) < 4) marker.set(x, y);
  const BinaryMask out = gradient_refine(marker, grad, 40);
  for (int y = 0; y < 21; ++y)
    for (int x = 0; x < 21; ++x)
      if (grad.at(x, y) >= 40) CHECK(out.at(x, y));
}

TEST_CASE("gradient refine matches a flood fill over the admissible set") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const int w = 25, h = 25;
    GrayImage grad(w, h);
    BinaryMask marker(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        grad.at(x, y) = static_cast<std::uint8_t>(rng.below(256));
        if (rng.uniform() < 0.03) marker.set(x, y);
      }
    const int thr = 120;
    BinaryMask expect = marker;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (marker.at(x, y)) stack.push_back({x, y});
    while (!stack.empty()) {
      auto [x, y] = stack.back();
      stack.pop_back();
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h || expect.at(nx, ny)) continue;
          if (grad.at(nx, ny) < thr) continue;
          expect.set(nx, ny);
          stack.push_back({nx, ny});
        }
    }
    const BinaryMask out = gradient_refine(marker, grad, thr);
    CHECK(out == expect);
    CHECK(subset(marker, out));
    CHECK(gradient_refine(out, grad, thr) == out);
  }
}

TEST_CASE("detect candidates outside the fruit are dropped") {
  const BinaryMask fruit = disk_mask(64, 31.5, 31.5, 10);
  BinaryMask refined(64, 64);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) refined.set(x, y);
  CHECK(detect_candidates(fruit, refined, 1).empty());
  CHECK_THROWS_AS(detect_candidates(fruit, BinaryMask(32, 32), 1), Error);
}

TEST_CASE("detect candidates finds a dark ellipse with its analytic area") {
  const int size = 256;
  const BinaryMask fruit = disk_mask(size, 127.5, 127.5, 100);
  const double a = 20, b = 10;
  GrayImage img(size, size, 20);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      if (!fruit.at(x, y)) continue;
      const double u = (x - 140.0) / a, v = (y - 110.0) / b;
      img.at(x, y) = u * u + v * v <= 1 ? 25 : 180;
    }
  const BinaryMask marker = marker_from_layers(multi_threshold(img), 2);
  const auto cands = detect_candidates(fruit, marker, 20);
  REQUIRE(cands.size() == 1);
  const double expect = std::numbers::pi * a * b;
  CHECK(std::abs(static_cast<double>(cands[0].area) - expect) <= 0.02 * expect);
}

TEST_CASE("detect candidates area filter and disjointness") {
  const BinaryMask fruit = disk_mask(128, 63.5, 63.5, 60);
  const BinaryMask big = disk_mask(128, 50, 60, 8);
  const BinaryMask small = disk_mask(128, 85, 70, 2);
  BinaryMask refined(128, 128);
  for (std::size_t i = 0; i < refined.size(); ++i) refined.set_index(i, big.test(i) || small.test(i));
  CHECK(detect_candidates(fruit, refined, 1).size() == 2);
  const auto filtered = detect_candidates(fruit, refined, small.count() + 1);
  REQUIRE(filtered.size() == 1);
  CHECK(filtered[0].area == big.count());

  BinaryMask covered(128, 128);
  for (const auto& c : detect_candidates(fruit, refined, 1))
    for (int y = 0; y < c.mask.height(); ++y)
      for (int x = 0; x < c.mask.width(); ++x)
        if (c.mask.at(x, y)) {
          CHECK_FALSE(covered.at(c.origin.x + x, c.origin.y + y));
          CHECK(fruit.at(c.origin.x + x, c.origin.y + y));
          covered.set(c.origin.x + x, c.origin.y + y);
        }
}
