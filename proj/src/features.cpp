#include <cmath>
#include <string>

#include "stemcalyx/descriptors.hpp"
#include "stemcalyx/error.hpp"

namespace stemcalyx {

const char* block_prefix(BlockKind kind) {
  switch (kind) {
    case BlockKind::Multifractal: return "m";
    case BlockKind::Fourier: return "f";
    case BlockKind::Radon: return "r";
  }
  return "?";
}

const char* block_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::Multifractal: return "multifractal";
    case BlockKind::Fourier: return "fourier";
    case BlockKind::Radon: return "radon";
  }
  return "?";
}

std::size_t DescriptorConfig::block_length(BlockKind kind) const {
  switch (kind) {
    case BlockKind::Multifractal: return 2 * multifractal.q_values.size();
    case BlockKind::Fourier: return fourier.descriptor_count;
    case BlockKind::Radon:
      return radon.angle_step > 0 ? radon.bins * static_cast<std::size_t>(180 / radon.angle_step) : 0;
  }
  return 0;
}

std::array<std::size_t, 3> FeatureVector::shape() const {
  return {blocks[0].values.size(), blocks[1].values.size(), blocks[2].values.size()};
}

std::size_t FeatureVector::size() const {
  const auto s = shape();
  return s[0] + s[1] + s[2];
}

std::vector<double> FeatureVector::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  for (const auto& b : blocks) out.insert(out.end(), b.values.begin(), b.values.end());
  return out;
}

FeatureVector extract_all(const CandidateObject& candidate, const DescriptorConfig& config,
                          const GrayImage* gray_patch) {
  FeatureVector v;
  auto tagged = [](BlockKind kind, auto&& compute) {
    try {
      return compute();
    } catch (const Error& e) {
      throw e.with_stage(block_name(kind));
    }
  };
  // Fourier first: its chain-length check is the cheapest degeneracy test.
  // The descriptor itself runs on the pixel-edge contour, which scales
  // exactly with the object.
  v.block(BlockKind::Fourier) = tagged(BlockKind::Fourier, [&] {
    if (candidate.boundary.size() < 4) {
      throw Error(ErrorKind::Degenerate, "boundary chain too short (" +
                                             std::to_string(candidate.boundary.size()) + " points, need 4)");
    }
    return fourier_descriptor(outer_contour(candidate.mask), config.fourier);
  });
  v.block(BlockKind::Multifractal) = tagged(BlockKind::Multifractal, [&] {
    if (config.multifractal.mass == MassSource::Gray) {
      if (gray_patch == nullptr) {
        throw Error(ErrorKind::Parameter, "gray mass requested but no gray patch supplied");
      }
      return multifractal_descriptor(MassGrid::from_gray(candidate.mask, *gray_patch), config.multifractal);
    }
    return multifractal_descriptor(candidate.mask, config.multifractal);
  });
  v.block(BlockKind::Radon) = tagged(BlockKind::Radon, [&] {
    return radon_descriptor(candidate.mask, config.radon);
  });
  return v;
}

double block_distance(const FeatureBlock& a, const FeatureBlock& b) {
  if (a.kind != b.kind || a.values.size() != b.values.size()) {
    throw Error(ErrorKind::Parameter, std::string("block shape mismatch in ") + block_name(a.kind));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double fused_distance(const FeatureVector& a, const FeatureVector& b) {
  double total = 0.0;
  for (std::size_t k = 0; k < 3; ++k) total += block_distance(a.blocks[k], b.blocks[k]);
  return total;
}

}  // namespace stemcalyx
