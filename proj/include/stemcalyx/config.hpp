#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stemcalyx/classify.hpp"
#include "stemcalyx/descriptors.hpp"
#include "stemcalyx/segmentation.hpp"

namespace stemcalyx {

// Every tunable of the pipeline. Serialized as flat `key = value` lines;
// lists are comma separated. Unknown keys are rejected on parse.
struct PipelineConfig {
  int median_radius = 1;

  int growcut_border = 2;
  double growcut_core = 0.25;
  int growcut_max_iters = 0;  // 0: width + height

  Thresholds thresholds = kDefaultThresholds;
  int min_layers = 2;
  int grad_threshold = 40;
  std::size_t min_area = 20;

  MultifractalConfig multifractal;
  FourierConfig fourier;
  RadonConfig radon;

  ClassifierKind classifier = ClassifierKind::Svm;
  TrainParams train;
  double train_fraction = 0.75;
  std::uint64_t rng_seed = 42;

  DescriptorConfig descriptors() const { return {multifractal, fourier, radon}; }

  // Throws a parameter error naming the key.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  // Range checks across all fields.
  void validate() const;

  std::string to_text() const;
  static PipelineConfig from_text(const std::string& text);
  static PipelineConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

}  // namespace stemcalyx
