#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stemcalyx/classify.hpp"
#include "stemcalyx/image.hpp"

namespace stemcalyx {

// Every parameter needed to regenerate one candidate shape.
struct SynthSpec {
  ClassLabel label = ClassLabel::Defect;
  double scale = 1.0;     // [0.5, 2.0]
  double rotation = 0.0;  // degrees
  double jitter = 0.0;    // [0, 1]: edge roughness and pixel noise
  std::uint64_t seed = 0;
};

// Carpet of side 3^depth with 8^depth set pixels; depth in [1, 6].
BinaryMask gen_sierpinski(int depth);

// Stem: capsule (length:width 5:1) with sinusoidal width jitter.
// Calyx: annulus or annulus sector, inner radius half the outer.
// Defect: superellipse blob, exponent in [1.5, 2.5].
// Returned mask is cropped to the shape's bounding box.
BinaryMask gen_candidate_shape(const SynthSpec& spec);

// Number of 4-connected background regions enclosed by the set.
std::size_t count_holes(const BinaryMask& mask);

// Pixel-replicated copy, `factor` times larger in each dimension.
BinaryMask upscale_nearest(const BinaryMask& mask, int factor);

struct SceneTruth {
  BinaryMask mask;  // full scene size
  ClassLabel label;
};

struct Scene {
  GrayImage image;
  BinaryMask fruit;  // analytic fruit disk
  std::vector<SceneTruth> truth;
};

inline constexpr int kSceneSize = 256;
inline constexpr int kBackgroundLevel = 20;
inline constexpr int kFruitLevel = 180;

// Dark background, shaded fruit disk, candidates darker than 30 at their
// core, additive Gaussian noise. noise_sigma < 0 derives it from the specs'
// mean jitter (sigma = 4 * jitter).
Scene gen_apple_scene(const std::vector<SynthSpec>& specs, int image_size, std::uint64_t seed,
                      double noise_sigma = -1.0);

struct ManifestRow {
  int apple_id = 0;
  int view_id = 0;
  SynthSpec spec;
  std::uint64_t scene_seed = 0;
  std::string scene_path;  // relative to the manifest directory
  std::string truth_path;
};

inline constexpr const char* kManifestHeader =
    "apple_id,view_id,class,scale,rotation,jitter,shape_seed,scene_seed,scene,truth";

// Draws the manifest for n_per_class apples, each seen in three views
// (stem, calyx, defect); view_id equals the class index.
std::vector<ManifestRow> plan_corpus(int n_per_class, std::uint64_t seed);

// Renders the scene of one manifest row.
Scene render_manifest_row(const ManifestRow& row);

// Writes scenes/, truth/ and manifest.csv under out_dir.
std::vector<ManifestRow> gen_corpus(int n_per_class, std::uint64_t seed, const std::filesystem::path& out_dir);

void write_manifest(const std::vector<ManifestRow>& rows, const std::filesystem::path& path);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

}  // namespace stemcalyx
