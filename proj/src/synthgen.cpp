#include "stemcalyx/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "stemcalyx/error.hpp"
#include "stemcalyx/rng.hpp"

namespace stemcalyx {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMinShapeArea = 20;
constexpr int kPlacementAttempts = 100;
constexpr double kFruitRadiusFraction = 0.39;
constexpr double kFruitMargin = 8.0;
constexpr int kCandidateGap = 3;

void carve(BinaryMask& mask, int x0, int y0, int side) {
  if (side < 3) return;
  const int third = side / 3;
  for (int y = y0 + third; y < y0 + 2 * third; ++y)
    for (int x = x0 + third; x < x0 + 2 * third; ++x) mask.set(x, y, false);
  for (int by = 0; by < 3; ++by)
    for (int bx = 0; bx < 3; ++bx)
      if (bx != 1 || by != 1) carve(mask, x0 + bx * third, y0 + by * third, third);
}

// Shape parameters drawn from SynthSpec::seed. Every family draws the same
// values regardless of jitter, so jitter 0 gives the clean version of the
// same shape.
struct Wobble {
  double freq;
  double phase;
};

Wobble draw_wobble(Rng& rng, double lo, double hi) {
  const double freq = rng.uniform(lo, hi);
  const double phase = rng.uniform(0.0, 2.0 * kPi);
  return {freq, phase};
}

BinaryMask crop_to_content(const BinaryMask& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) return BinaryMask(1, 1);
  BinaryMask out(x1 - x0 + 1, y1 - y0 + 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) out.set(x - x0, y - y0, mask.at(x, y));
  return out;
}

template <class Inside>
BinaryMask rasterize(double extent, double rotation_deg, Inside inside) {
  const int c = static_cast<int>(std::ceil(extent)) + 1;
  const int side = 2 * c + 1;
  const double t = rotation_deg * kPi / 180.0;
  const double ct = std::cos(t), st = std::sin(t);
  BinaryMask mask(side, side);
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      const double x = i - c, y = j - c;
      // Shape frame = image frame rotated back by SynthSpec::rotation.
      const double u = x * ct + y * st;
      const double v = -x * st + y * ct;
      if (inside(u, v)) mask.set(i, j);
    }
  }
  return crop_to_content(mask);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string scene_stem(int apple, int view) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "apple_%04d_view_%d", apple, view);
  return buf;
}

}  // namespace

BinaryMask gen_sierpinski(int depth) {
  if (depth < 1 || depth > 6) throw Error(ErrorKind::Parameter, "Sierpinski depth must lie in [1, 6]");
  int side = 1;
  for (int d = 0; d < depth; ++d) side *= 3;
  BinaryMask mask(side, side, true);
  carve(mask, 0, 0, side);
  return mask;
}

BinaryMask gen_candidate_shape(const SynthSpec& spec) {
  if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) throw Error(ErrorKind::Parameter, "shape scale must be positive");
  if (!(spec.jitter >= 0.0) || !std::isfinite(spec.rotation)) {
    throw Error(ErrorKind::Parameter, "shape jitter must be non-negative and rotation finite");
  }
  Rng rng(spec.seed);
  const double j = spec.jitter;
  BinaryMask mask(1, 1);
  switch (spec.label) {
    case ClassLabel::Stem: {
      const double width = 8.0 * spec.scale;
      const double half = 2.0 * width;  // segment half-length; total length 5 * width
      const Wobble w = draw_wobble(rng, 1.0, 3.0);
      const double amp = 0.3 * j;
      mask = rasterize(half + 0.5 * width * (1.0 + amp) + 1.0, spec.rotation, [&](double u, double v) {
        const double t = std::clamp(u, -half, half);
        const double r = 0.5 * width * (1.0 + amp * std::sin(w.freq * kPi * (t + half) / half + w.phase));
        return std::hypot(u - t, v) <= r;
      });
      break;
    }
    case ClassLabel::Calyx: {
      const double outer = 14.0 * spec.scale;
      const double inner = 0.5 * outer;
      const double span = rng.uniform() < 0.6 ? 360.0 : rng.uniform(240.0, 330.0);
      const Wobble w = draw_wobble(rng, 3.0, 7.0);
      const int lobes = static_cast<int>(w.freq);
      const double amp = 0.15 * j;
      mask = rasterize(outer * (1.0 + amp) + 1.0, spec.rotation, [&](double u, double v) {
        const double rho = std::hypot(u, v);
        const double theta = std::atan2(v, u);
        if (span < 360.0 && std::abs(theta) * 180.0 / kPi > span / 2.0) return false;
        const double edge = outer * (1.0 + amp * std::sin(lobes * theta + w.phase));
        return rho >= inner && rho <= edge;
      });
      break;
    }
    case ClassLabel::Defect: {
      const double a = 12.0 * spec.scale;
      const double b = a * rng.uniform(0.7, 1.0);
      const double n = rng.uniform(1.5, 2.5);
      const Wobble w = draw_wobble(rng, 3.0, 7.0);
      const int lobes = static_cast<int>(w.freq);
      const double amp = 0.15 * j;
      mask = rasterize(a * std::pow(2.0, 1.0 / n) * (1.0 + amp) + 1.0, spec.rotation, [&](double u, double v) {
        const double level = std::pow(std::pow(std::abs(u / a), n) + std::pow(std::abs(v / b), n), 1.0 / n);
        const double theta = std::atan2(v, u);
        return level <= 1.0 + amp * std::sin(lobes * theta + w.phase);
      });
      break;
    }
  }
  if (mask.count() < kMinShapeArea) {
    throw Error(ErrorKind::Generation, "degenerate candidate shape: area " + std::to_string(mask.count()) +
                                           " is below " + std::to_string(kMinShapeArea) + " pixels");
  }
  return mask;
}

std::size_t count_holes(const BinaryMask& mask) {
  const int w = mask.width() + 2;
  const int h = mask.height() + 2;
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  auto is_bg = [&](int x, int y) { return !mask.get(x - 1, y - 1); };
  int regions = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!is_bg(x, y) || label[static_cast<std::size_t>(y) * w + x] >= 0) continue;
      label[static_cast<std::size_t>(y) * w + x] = regions;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        constexpr int dx[] = {1, -1, 0, 0};
        constexpr int dy[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = cx + dx[k], ny = cy + dy[k];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h || !is_bg(nx, ny)) continue;
          auto& l = label[static_cast<std::size_t>(ny) * w + nx];
          if (l >= 0) continue;
          l = regions;
          stack.push_back({nx, ny});
        }
      }
      ++regions;
    }
  }
  // Region 0 contains the padding frame.
  return regions > 0 ? static_cast<std::size_t>(regions - 1) : 0;
}

BinaryMask upscale_nearest(const BinaryMask& mask, int factor) {
  if (factor < 1) throw Error(ErrorKind::Parameter, "upscale factor must be >= 1");
  BinaryMask out(mask.width() * factor, mask.height() * factor);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out.set(x, y, mask.at(x / factor, y / factor));
  return out;
}

Scene gen_apple_scene(const std::vector<SynthSpec>& specs, int image_size, std::uint64_t seed,
                      double noise_sigma) {
  if (image_size < 32) throw Error(ErrorKind::Parameter, "scene size must be at least 32 pixels");
  Rng rng(seed);
  const double centre = (image_size - 1) / 2.0;
  const double radius = kFruitRadiusFraction * image_size;

  Scene scene{GrayImage(image_size, image_size), BinaryMask(image_size, image_size), {}};
  std::vector<double> level(static_cast<std::size_t>(image_size) * image_size, kBackgroundLevel);
  for (int y = 0; y < image_size; ++y) {
    for (int x = 0; x < image_size; ++x) {
      const double r = std::hypot(x - centre, y - centre);
      if (r <= radius) {
        scene.fruit.set(x, y);
        level[static_cast<std::size_t>(y) * image_size + x] = kFruitLevel - 40.0 * (r / radius) * (r / radius);
      }
    }
  }

  BinaryMask occupied(image_size, image_size);
  double jitter_sum = 0.0;
  for (const SynthSpec& spec : specs) {
    jitter_sum += spec.jitter;
    const BinaryMask shape = gen_candidate_shape(spec);
    const double base = rng.uniform(15.0, 25.0);
    const double reach = std::hypot(shape.width(), shape.height()) / 2.0;
    const double free_radius = radius - kFruitMargin - reach;
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const double rr = std::max(free_radius, 0.0) * std::sqrt(rng.uniform());
      const double phi = rng.uniform(0.0, 2.0 * kPi);
      const int ox = static_cast<int>(std::lround(centre + rr * std::cos(phi) - (shape.width() - 1) / 2.0));
      const int oy = static_cast<int>(std::lround(centre + rr * std::sin(phi) - (shape.height() - 1) / 2.0));
      bool ok = true;
      for (int y = 0; y < shape.height() && ok; ++y) {
        for (int x = 0; x < shape.width() && ok; ++x) {
          if (!shape.at(x, y)) continue;
          const int sx = ox + x, sy = oy + y;
          if (std::hypot(sx - centre, sy - centre) > radius - kFruitMargin) ok = false;
          else if (occupied.get(sx, sy)) ok = false;
        }
      }
      if (!ok) continue;
      placed = true;
      SceneTruth truth{BinaryMask(image_size, image_size), spec.label};
      for (int y = 0; y < shape.height(); ++y) {
        for (int x = 0; x < shape.width(); ++x) {
          if (!shape.at(x, y)) continue;
          const int sx = ox + x, sy = oy + y;
          truth.mask.set(sx, sy);
          level[static_cast<std::size_t>(sy) * image_size + sx] = base;
          for (int dy = -kCandidateGap; dy <= kCandidateGap; ++dy)
            for (int dx = -kCandidateGap; dx <= kCandidateGap; ++dx)
              if (sx + dx >= 0 && sy + dy >= 0 && sx + dx < image_size && sy + dy < image_size)
                occupied.set(sx + dx, sy + dy);
        }
      }
      scene.truth.push_back(std::move(truth));
    }
    if (!placed) {
      throw Error(ErrorKind::Generation, "could not place candidate " + std::to_string(scene.truth.size()) +
                                             " after " + std::to_string(kPlacementAttempts) + " attempts");
    }
  }

  const double sigma =
      noise_sigma >= 0.0 ? noise_sigma : (specs.empty() ? 0.0 : 4.0 * jitter_sum / static_cast<double>(specs.size()));
  auto pixels = scene.image.data();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    double v = level[i];
    if (sigma > 0.0) v += sigma * rng.normal();
    pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return scene;
}

std::vector<ManifestRow> plan_corpus(int n_per_class, std::uint64_t seed) {
  if (n_per_class < 4) throw Error(ErrorKind::Parameter, "corpus needs at least 4 samples per class");
  Rng master(seed);
  std::vector<ManifestRow> rows;
  rows.reserve(static_cast<std::size_t>(n_per_class) * kClassCount);
  for (int apple = 0; apple < n_per_class; ++apple) {
    for (ClassLabel label : kAllClasses) {
      ManifestRow row;
      row.apple_id = apple;
      row.view_id = static_cast<int>(label);
      row.scene_seed = master.next();
      Rng draw(row.scene_seed);
      row.spec.label = label;
      row.spec.scale = draw.uniform(0.5, 2.0);
      row.spec.rotation = draw.uniform(0.0, 360.0);
      row.spec.jitter = draw.uniform(0.1, 0.5);
      row.spec.seed = draw.next();
      const std::string stem = scene_stem(apple, row.view_id);
      row.scene_path = "scenes/" + stem + ".pgm";
      row.truth_path = "truth/" + stem + ".pgm";
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

Scene render_manifest_row(const ManifestRow& row) {
  // The scene stream is decorrelated from the stream that drew the spec.
  return gen_apple_scene({row.spec}, kSceneSize, row.scene_seed ^ 0x9e3779b97f4a7c15ULL);
}

std::vector<ManifestRow> gen_corpus(int n_per_class, std::uint64_t seed, const std::filesystem::path& out_dir) {
  auto rows = plan_corpus(n_per_class, seed);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "scenes", ec);
  if (!ec) std::filesystem::create_directories(out_dir / "truth", ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create corpus directories under " + out_dir.string() + ": " + ec.message());
  for (const ManifestRow& row : rows) {
    const Scene scene = render_manifest_row(row);
    save_image(scene.image, out_dir / row.scene_path);
    save_mask(scene.truth.front().mask, out_dir / row.truth_path);
  }
  write_manifest(rows, out_dir / "manifest.csv");
  return rows;
}

void write_manifest(const std::vector<ManifestRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write manifest " + path.string());
  out << kManifestHeader << '\n';
  for (const ManifestRow& r : rows) {
    out << r.apple_id << ',' << r.view_id << ',' << to_string(r.spec.label) << ',' << format_double(r.spec.scale)
        << ',' << format_double(r.spec.rotation) << ',' << format_double(r.spec.jitter) << ',' << r.spec.seed << ','
        << r.scene_seed << ',' << r.scene_path << ',' << r.truth_path << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "failed while writing manifest " + path.string());
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read manifest " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kManifestHeader) {
    throw Error(ErrorKind::Format, "manifest " + path.string() + " has an unexpected header");
  }
  std::vector<ManifestRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    const std::string where = path.string() + " line " + std::to_string(line_no);
    if (f.size() != 10) throw Error(ErrorKind::Format, where + ": expected 10 fields");
    ManifestRow r;
    try {
      r.apple_id = std::stoi(f[0]);
      r.view_id = std::stoi(f[1]);
      const auto label = parse_class_label(f[2]);
      if (!label) throw Error(ErrorKind::Format, where + ": unknown class '" + f[2] + "'");
      r.spec.label = *label;
      r.spec.scale = std::stod(f[3]);
      r.spec.rotation = std::stod(f[4]);
      r.spec.jitter = std::stod(f[5]);
      r.spec.seed = std::stoull(f[6]);
      r.scene_seed = std::stoull(f[7]);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::Format, where + ": malformed number");
    }
    r.scene_path = f[8];
    r.truth_path = f[9];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace stemcalyx
