#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stemcalyx/image.hpp"

namespace stemcalyx {

// ---------------------------------------------------------------------------
// Multifractal spectrum by box counting.

enum class MassSource { Binary, Gray };

struct MultifractalConfig {
  std::vector<double> q_values = default_q_values();
  std::vector<int> box_sizes = {2, 4, 8, 16, 32};
  double min_probability_floor = 1e-12;
  // When set, emit the raw single-scale sums at this box size instead of
  // regression slopes.
  std::optional<int> single_box_size;
  MassSource mass = MassSource::Binary;

  static std::vector<double> default_q_values();  // -1.0 .. 1.0 step 0.1
  void validate() const;
};

struct BoxStats {
  std::size_t total_boxes = 0;     // N_T on the padded grid
  std::size_t nonempty_boxes = 0;  // N_S
  std::vector<double> masses;      // per non-empty box, row-major box order
  double total_mass = 0.0;         // M_eps
};

// Mass grid: non-negative weights, zero outside the object.
struct MassGrid {
  int width = 0;
  int height = 0;
  std::vector<double> weights;

  static MassGrid from_mask(const BinaryMask& mask);
  // Intensity as mass inside the mask; `patch` shares the mask's geometry.
  static MassGrid from_gray(const BinaryMask& mask, const GrayImage& patch);
};

BoxStats box_partition_stats(const MassGrid& grid, int epsilon);
BoxStats box_partition_stats(const BinaryMask& mask, int epsilon);

// Per-q sums at one box size: A = sum mu log p, F = sum mu log mu.
struct SpectrumSums {
  std::vector<double> alpha_sum;
  std::vector<double> f_sum;
};
SpectrumSums spectrum_sums(const BoxStats& stats, const std::vector<double>& q_values,
                           double floor, int epsilon);

// ---------------------------------------------------------------------------
// Feature blocks.

enum class BlockKind : std::uint8_t { Multifractal = 0, Fourier = 1, Radon = 2 };
const char* block_prefix(BlockKind kind);  // "m", "f", "r"
const char* block_name(BlockKind kind);    // "multifractal", ...

struct FeatureBlock {
  BlockKind kind = BlockKind::Multifractal;
  std::vector<double> values;
};

// Output: [f(q_1)..f(q_K), alpha(q_1)..alpha(q_K)].
FeatureBlock multifractal_descriptor(const MassGrid& grid, const MultifractalConfig& config);
FeatureBlock multifractal_descriptor(const BinaryMask& mask, const MultifractalConfig& config);

// ---------------------------------------------------------------------------
// Fourier boundary descriptor.

using ComplexSeq = std::vector<std::complex<double>>;

ComplexSeq boundary_to_complex(const BoundaryChain& chain);
// a(u) = 1/N sum s(k) exp(-j 2 pi u k / N).
ComplexSeq fourier_coefficients(const ComplexSeq& s);
// Inverse transform keeping DC then +1, -1, +2, -2, ... until `keep` terms.
ComplexSeq reconstruct_boundary(const ComplexSeq& a, std::size_t keep);
// Closed-polygon resampling at uniform arc length, starting at chain[0].
ComplexSeq resample_closed(const BoundaryChain& chain, std::size_t count);

struct FourierConfig {
  std::size_t resample_points = 256;
  std::size_t descriptor_count = 64;
};

// |a(u)| / |a(1)| for u = 2 .. K+1.
FeatureBlock fourier_descriptor(const BoundaryChain& chain, const FourierConfig& config = {});

// ---------------------------------------------------------------------------
// Radon projections.

struct RadonMatrix {
  std::vector<double> angles;  // degrees
  int rho_max = 0;             // rows cover rho = -rho_max .. +rho_max
  // Column-major: column a holds 2*rho_max+1 counts.
  std::vector<std::int64_t> values;

  std::size_t rows() const { return static_cast<std::size_t>(2 * rho_max + 1); }
  std::int64_t at(int rho, std::size_t angle) const {
    return values[angle * rows() + static_cast<std::size_t>(rho + rho_max)];
  }
  std::vector<std::int64_t> column(std::size_t angle) const;
};

RadonMatrix radon_transform(const BinaryMask& mask, const std::vector<double>& angles);

struct RadonConfig {
  int angle_step = 30;
  std::size_t bins = 16;
  // Half-width of the resampling window in standard deviations of the
  // projection.
  double support_sigmas = 1.25;
};

struct RadonProfile {
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> masses;  // sums to 1
};

// Projects every object pixel as its unit square, so a pixel contributes a
// trapezoid to the projection rather than a single bin. The profile is
// integrated over `bins` equal slices of mean +- support_sigmas * sigma;
// mass outside the window lands in the end slices.
RadonProfile area_projection(const BinaryMask& mask, double degrees, std::size_t bins,
                             double support_sigmas);

// Profiles are taken at angles 0, step, ..., mirrored into symmetric form
// and read off starting at a phase derived from their angular harmonics, so
// rotating the object by one step leaves the block unchanged.
FeatureBlock radon_descriptor(const BinaryMask& mask, const RadonConfig& config = {});

// ---------------------------------------------------------------------------
// Fused vector.

struct DescriptorConfig {
  MultifractalConfig multifractal;
  FourierConfig fourier;
  RadonConfig radon;

  std::size_t block_length(BlockKind kind) const;
};

struct FeatureVector {
  std::array<FeatureBlock, 3> blocks{
      FeatureBlock{BlockKind::Multifractal, {}},
      FeatureBlock{BlockKind::Fourier, {}},
      FeatureBlock{BlockKind::Radon, {}},
  };

  const FeatureBlock& block(BlockKind kind) const { return blocks[static_cast<std::size_t>(kind)]; }
  FeatureBlock& block(BlockKind kind) { return blocks[static_cast<std::size_t>(kind)]; }
  std::array<std::size_t, 3> shape() const;
  std::size_t size() const;
  std::vector<double> flatten() const;
};

// `gray_patch`, when given, must match the candidate mask and is used only
// when the multifractal mass source is Gray.
FeatureVector extract_all(const CandidateObject& candidate, const DescriptorConfig& config,
                          const GrayImage* gray_patch = nullptr);

double block_distance(const FeatureBlock& a, const FeatureBlock& b);
// Sum of per-block Euclidean distances.
double fused_distance(const FeatureVector& a, const FeatureVector& b);

}  // namespace stemcalyx
