#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stemcalyx/error.hpp"
#include "stemcalyx/image.hpp"
#include "stemcalyx/rng.hpp"
#include "stemcalyx/segmentation.hpp"
#include "stemcalyx/synthgen.hpp"

using namespace stemcalyx;
namespace fs = std::filesystem;

namespace {

double aspect_ratio(const BinaryMask& m) {
  const double w = m.width(), h = m.height();
  return std::max(w, h) / std::min(w, h);
}

// Count of 8-connected foreground components.
std::size_t components(const BinaryMask& m) { return connected_components(m, 1).size(); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stemcalyx_synth_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("sierpinski carpet sizes and counts") {
  const BinaryMask d1 = gen_sierpinski(1);
  CHECK(d1.width() == 3);
  CHECK(d1.count() == 8);
  CHECK_FALSE(d1.at(1, 1));
  CHECK(gen_sierpinski(3).count() == 512);
  CHECK(gen_sierpinski(3).size() == 729);
  const BinaryMask d5 = gen_sierpinski(5);
  CHECK(d5.width() == 243);
  CHECK(d5.height() == 243);
  CHECK(d5.count() == 32768);
  for (int bad : {0, 7, -1}) {
    try {
      (void)gen_sierpinski(bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parameter);
    }
  }
}

TEST_CASE("count_holes on hand-made masks") {
  CHECK(count_holes(BinaryMask(4, 4, true)) == 0);
  BinaryMask ring(5, 5, true);
  ring.set(2, 2, false);
  CHECK(count_holes(ring) == 1);
  CHECK(count_holes(gen_sierpinski(2)) == 9);
  // A notch open to the border is not a hole.
  BinaryMask cup(3, 3, true);
  cup.set(1, 1, false);
  cup.set(1, 0, false);
  CHECK(count_holes(cup) == 0);
}

TEST_CASE("upscale_nearest replicates pixels") {
  BinaryMask m(2, 1);
  m.set(1, 0);
  const BinaryMask u = upscale_nearest(m, 3);
  CHECK(u.width() == 6);
  CHECK(u.height() == 3);
  CHECK(u.count() == 9);
  CHECK(u.at(3, 2));
  CHECK_FALSE(u.at(2, 2));
  CHECK_THROWS_AS(upscale_nearest(m, 0), Error);
}

TEST_CASE("candidate shapes are deterministic and validated") {
  for (ClassLabel c : kAllClasses) {
    const SynthSpec spec{c, 1.3, 47.0, 0.4, 1234};
    CHECK(gen_candidate_shape(spec) == gen_candidate_shape(spec));
    CHECK(gen_candidate_shape(spec).count() >= 20);
  }
  CHECK_THROWS_AS(gen_candidate_shape(SynthSpec{ClassLabel::Stem, 0.0, 0.0, 0.0, 1}), Error);
  CHECK_THROWS_AS(gen_candidate_shape(SynthSpec{ClassLabel::Stem, 1.0, 0.0, -0.1, 1}), Error);
  try {
    (void)gen_candidate_shape(SynthSpec{ClassLabel::Defect, 0.05, 0.0, 0.0, 1});
    FAIL("expected a degenerate-shape error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Generation);
  }
}

TEST_CASE("stem without jitter has bounding-box aspect at least 3.5") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (double scale : {0.5, 1.0, 2.0}) {
      const BinaryMask m = gen_candidate_shape(SynthSpec{ClassLabel::Stem, scale, 0.0, 0.0, seed});
      CHECK(aspect_ratio(m) >= 3.5);
      CHECK(components(m) == 1);
    }
  }
}

TEST_CASE("calyx without jitter is one ring or ring sector") {
  std::size_t full_rings = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const BinaryMask m = gen_candidate_shape(SynthSpec{ClassLabel::Calyx, 1.0, 0.0, 0.0, seed});
    CHECK(components(m) == 1);
    const std::size_t holes = count_holes(m);
    CHECK(holes <= 1);
    if (holes == 1) {
      ++full_rings;
      // The hole of a full ring sits at the bounding-box centre.
      CHECK_FALSE(m.at(m.width() / 2, m.height() / 2));
    }
  }
  CHECK(full_rings > 10);
  CHECK(full_rings < 50);
}

TEST_CASE("class-conditional shape statistics over 50 samples per class") {
  std::array<std::vector<double>, 3> aspect, holes;
  for (ClassLabel c : kAllClasses) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Rng rng(seed * 7 + static_cast<std::uint64_t>(c));
      const SynthSpec spec{c, rng.uniform(0.5, 2.0), rng.uniform(0.0, 360.0), rng.uniform(0.1, 0.5), rng.next()};
      // The bounding box is measured in the shape frame.
      SynthSpec upright = spec;
      upright.rotation = 0.0;
      const BinaryMask m = gen_candidate_shape(upright);
      aspect[static_cast<std::size_t>(c)].push_back(aspect_ratio(m));
      holes[static_cast<std::size_t>(c)].push_back(static_cast<double>(count_holes(gen_candidate_shape(spec))));
    }
  }
  CHECK(median(aspect[0]) > median(aspect[2]));
  CHECK(median(holes[1]) > median(holes[0]));
  CHECK(median(holes[1]) > median(holes[2]));
}

TEST_CASE("scene: fruit only, layout and core intensity") {
  const Scene empty = gen_apple_scene({}, 256, 9);
  CHECK(empty.truth.empty());
  CHECK(empty.fruit.count() > 0);
  CHECK(empty.image.at(0, 0) == kBackgroundLevel);
  CHECK(empty.image.at(128, 128) >= 175);

  for (ClassLabel c : kAllClasses) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const SynthSpec spec{c, 0.5 + 0.15 * static_cast<double>(seed), 30.0 * static_cast<double>(seed), 0.3, seed};
      const Scene s = gen_apple_scene({spec}, 256, seed + 100, 0.0);
      REQUIRE(s.truth.size() == 1);
      CHECK(s.truth[0].label == c);
      for (int y = 0; y < 256; ++y)
        for (int x = 0; x < 256; ++x)
          if (s.truth[0].mask.at(x, y)) {
            CHECK(s.fruit.at(x, y));
            CHECK(s.image.at(x, y) < 30);
            CHECK(s.image.at(x, y) >= 15);
          }
    }
  }
}

TEST_CASE("scene: several candidates do not overlap and placement failure is reported") {
  const std::vector<SynthSpec> specs = {{ClassLabel::Stem, 1.0, 10.0, 0.2, 1},
                                        {ClassLabel::Calyx, 1.0, 0.0, 0.2, 2},
                                        {ClassLabel::Defect, 1.0, 0.0, 0.2, 3}};
  const Scene s = gen_apple_scene(specs, 256, 5);
  REQUIRE(s.truth.size() == 3);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b)
      for (std::size_t i = 0; i < s.truth[a].mask.size(); ++i)
        CHECK_FALSE((s.truth[a].mask.test(i) && s.truth[b].mask.test(i)));
  const Scene again = gen_apple_scene(specs, 256, 5);
  CHECK(again.image == s.image);
  for (std::size_t k = 0; k < 3; ++k) CHECK(again.truth[k].mask == s.truth[k].mask);

  const std::vector<SynthSpec> crowd(40, SynthSpec{ClassLabel::Defect, 2.0, 0.0, 0.0, 4});
  try {
    (void)gen_apple_scene(crowd, 128, 1);
    FAIL("expected a generation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Generation);
  }
}

TEST_CASE("corpus plan follows the view layout and draws specs in range") {
  const auto rows = plan_corpus(200, 42);
  CHECK(rows.size() == 600);
  std::array<int, 3> per_class{};
  for (const ManifestRow& r : rows) {
    ++per_class[static_cast<std::size_t>(r.spec.label)];
    CHECK(r.view_id == static_cast<int>(r.spec.label));
    CHECK(r.spec.scale >= 0.5);
    CHECK(r.spec.scale < 2.0);
    CHECK(r.spec.rotation >= 0.0);
    CHECK(r.spec.rotation < 360.0);
  }
  CHECK(per_class == std::array<int, 3>{200, 200, 200});
  CHECK_THROWS_AS(plan_corpus(3, 1), Error);
}

TEST_CASE("corpus on disk: manifest round trip and regeneration") {
  const fs::path dir = scratch_dir("a");
  const auto rows = gen_corpus(4, 7, dir);
  CHECK(rows.size() == 12);
  const auto back = read_manifest(dir / "manifest.csv");
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].spec.scale == rows[i].spec.scale);
    CHECK(back[i].spec.rotation == rows[i].spec.rotation);
    CHECK(back[i].spec.jitter == rows[i].spec.jitter);
    CHECK(back[i].spec.seed == rows[i].spec.seed);
    CHECK(back[i].scene_seed == rows[i].scene_seed);
    const Scene again = render_manifest_row(back[i]);
    CHECK(again.image == load_gray(dir / back[i].scene_path));
    CHECK(again.truth.front().mask == load_mask(dir / back[i].truth_path));
  }

  const fs::path dir2 = scratch_dir("b");
  gen_corpus(4, 7, dir2);
  for (const ManifestRow& r : rows) CHECK(slurp(dir / r.scene_path) == slurp(dir2 / r.scene_path));
  CHECK(slurp(dir / "manifest.csv") == slurp(dir2 / "manifest.csv"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("manifest errors") {
  const fs::path dir = scratch_dir("bad");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "m1.csv") << "wrong,header\n";
    std::ofstream(dir / "m2.csv") << kManifestHeader << "\n0,0,stem,1,2,3\n";
    std::ofstream(dir / "m3.csv") << kManifestHeader << "\n0,0,leaf,1,2,0.1,5,6,a,b\n";
    std::ofstream(dir / "m4.csv") << kManifestHeader << "\n0,0,stem,x,2,0.1,5,6,a,b\n";
  }
  for (const char* name : {"m1.csv", "m2.csv", "m3.csv", "m4.csv"}) {
    try {
      (void)read_manifest(dir / name);
      FAIL("expected a format error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Format);
    }
  }
  try {
    (void)read_manifest(dir / "missing.csv");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
  fs::remove_all(dir);
}
