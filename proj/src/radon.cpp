#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include "stemcalyx/descriptors.hpp"
#include "stemcalyx/error.hpp"

namespace stemcalyx {

std::vector<std::int64_t> RadonMatrix::column(std::size_t angle) const {
  const auto begin = values.begin() + static_cast<std::ptrdiff_t>(angle * rows());
  return {begin, begin + static_cast<std::ptrdiff_t>(rows())};
}

namespace {

// Exact at multiples of 90 degrees so axis-aligned projections bin cleanly.
void direction(double degrees, double& c, double& s) {
  const double quarter = degrees / 90.0;
  if (quarter == std::floor(quarter)) {
    static constexpr double kCos[] = {1.0, 0.0, -1.0, 0.0};
    static constexpr double kSin[] = {0.0, 1.0, 0.0, -1.0};
    const int i = ((static_cast<int>(quarter) % 4) + 4) % 4;
    c = kCos[i];
    s = kSin[i];
    return;
  }
  const double rad = degrees * std::numbers::pi / 180.0;
  c = std::cos(rad);
  s = std::sin(rad);
}

}  // namespace

RadonMatrix radon_transform(const BinaryMask& mask, const std::vector<double>& angles) {
  for (double a : angles) {
    if (!(a >= 0.0 && a < 180.0)) {
      throw Error(ErrorKind::Parameter, "Radon angles must lie in [0, 180), got " + std::to_string(a));
    }
  }
  if (mask.empty()) throw Error(ErrorKind::EmptyRegion, "Radon transform of an empty mask");

  RadonMatrix out;
  out.angles = angles;
  out.rho_max = static_cast<int>(
      std::ceil(std::hypot(static_cast<double>(mask.width()), static_cast<double>(mask.height())) / 2.0));
  out.values.assign(angles.size() * out.rows(), 0);

  const double cx = (mask.width() - 1) / 2.0;
  const double cy = (mask.height() - 1) / 2.0;
  std::vector<double> cosines(angles.size());
  std::vector<double> sines(angles.size());
  for (std::size_t a = 0; a < angles.size(); ++a) direction(angles[a], cosines[a], sines[a]);

  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      const double dx = x - cx;
      const double dy = y - cy;
      for (std::size_t a = 0; a < angles.size(); ++a) {
        const double rho = dx * cosines[a] + dy * sines[a];
        const int bin = static_cast<int>(std::floor(rho + 0.5));
        out.values[a * out.rows() + static_cast<std::size_t>(bin + out.rho_max)] += 1;
      }
    }
  }
  return out;
}

namespace {

// CDF at t of U(-a/2, a/2) + U(-b/2, b/2) with a >= b >= 0: the projection of
// a unit square centred on the origin.
double trapezoid_cdf(double t, double a, double b) {
  if (b < 1e-12) return std::clamp(t / a + 0.5, 0.0, 1.0);
  auto ramp = [](double x) { return x > 0.0 ? 0.5 * x * x : 0.0; };
  const double outer = 0.5 * (a + b);
  const double inner = 0.5 * (a - b);
  const double v = (ramp(t + outer) - ramp(t + inner) - ramp(t - inner) + ramp(t - outer)) / (a * b);
  return std::clamp(v, 0.0, 1.0);
}

constexpr double kContrastWeight = 0.3;

}  // namespace

RadonProfile area_projection(const BinaryMask& mask, double degrees, std::size_t bins,
                             double support_sigmas) {
  if (mask.empty()) throw Error(ErrorKind::EmptyRegion, "Radon projection of an empty mask");
  if (bins < 1) throw Error(ErrorKind::Parameter, "projection needs at least one bin");
  double c = 0.0;
  double s = 0.0;
  direction(degrees, c, s);
  double a = std::abs(c);
  double b = std::abs(s);
  if (a < b) std::swap(a, b);

  std::vector<double> centres;
  centres.reserve(mask.count());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) centres.push_back((x + 0.5) * c + (y + 0.5) * s);
    }
  }
  const double n = static_cast<double>(centres.size());
  const double mean = std::accumulate(centres.begin(), centres.end(), 0.0) / n;
  double m2 = 0.0;
  for (double r : centres) m2 += (r - mean) * (r - mean);

  RadonProfile out;
  out.mean = mean;
  out.variance = m2 / n + (a * a + b * b) / 12.0;
  const double half = support_sigmas * std::sqrt(out.variance);
  const double lo = mean - half;
  const double step = 2.0 * half / static_cast<double>(bins);

  std::vector<double> cdf(bins + 1, 0.0);
  cdf[bins] = n;
  for (std::size_t j = 1; j < bins; ++j) {
    const double t = lo + step * static_cast<double>(j);
    double sum = 0.0;
    for (double r : centres) sum += trapezoid_cdf(t - r, a, b);
    cdf[j] = sum;
  }
  out.masses.resize(bins);
  for (std::size_t j = 0; j < bins; ++j) out.masses[j] = (cdf[j + 1] - cdf[j]) / n;
  return out;
}

FeatureBlock radon_descriptor(const BinaryMask& mask, const RadonConfig& config) {
  if (config.angle_step <= 0 || 180 % config.angle_step != 0) {
    throw Error(ErrorKind::Parameter, "angle step must divide 180");
  }
  if (config.bins < 4) throw Error(ErrorKind::Parameter, "Radon descriptor needs at least 4 bins");
  if (!(config.support_sigmas > 0.0)) throw Error(ErrorKind::Parameter, "Radon support must be positive");
  if (mask.empty()) throw Error(ErrorKind::EmptyRegion, "Radon descriptor of an empty mask");

  const std::size_t n = static_cast<std::size_t>(180 / config.angle_step);
  const std::size_t bins = config.bins;
  std::vector<RadonProfile> profiles;
  profiles.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    RadonProfile p = area_projection(mask, static_cast<double>(k) * config.angle_step, bins,
                                     config.support_sigmas);
    // A half turn reverses a projection; averaging with the reverse makes the
    // column sequence periodic in the angle index.
    for (std::size_t i = 0; i < bins / 2; ++i) {
      const double m = 0.5 * (p.masses[i] + p.masses[bins - 1 - i]);
      p.masses[i] = m;
      p.masses[bins - 1 - i] = m;
    }
    profiles.push_back(std::move(p));
  }

  // Per-column signature: relative spread plus centre-versus-tail contrast.
  // The latter still varies with angle when the second moments are isotropic.
  double mean_variance = 0.0;
  for (const auto& p : profiles) mean_variance += p.variance;
  mean_variance /= static_cast<double>(n);
  std::vector<double> signature(n);
  double magnitude = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double contrast = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
      const double offset = std::abs(static_cast<double>(i) - 0.5 * static_cast<double>(bins - 1));
      contrast += (offset < 0.25 * static_cast<double>(bins) ? 1.0 : -1.0) * profiles[k].masses[i];
    }
    signature[k] = profiles[k].variance / mean_variance + kContrastWeight * contrast;
    magnitude += std::abs(signature[k]);
  }

  // Rotating the object by one step shifts the sequence by one, which turns
  // the phase of every harmonic; the lowest harmonic that is not zero (by
  // symmetry) fixes the starting position.
  double phase = 0.0;
  for (std::size_t h = 1; 2 * h <= n; ++h) {
    std::complex<double> z = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      z += signature[k] * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(h * k) /
                                              static_cast<double>(n));
    }
    if (std::abs(z) > 1e-9 * magnitude) {
      phase = std::arg(z) / (2.0 * std::numbers::pi) * static_cast<double>(n) / static_cast<double>(h);
      break;
    }
  }
  const double period = static_cast<double>(n);
  phase = std::fmod(std::fmod(phase, period) + period, period);

  FeatureBlock block{BlockKind::Radon, {}};
  block.values.reserve(n * bins);
  for (std::size_t k = 0; k < n; ++k) {
    const double position = phase + static_cast<double>(k);
    const double base = std::floor(position);
    const double w = position - base;
    const std::size_t i0 = static_cast<std::size_t>(base) % n;
    const std::size_t i1 = (i0 + 1) % n;
    for (std::size_t i = 0; i < bins; ++i) {
      block.values.push_back((1.0 - w) * profiles[i0].masses[i] + w * profiles[i1].masses[i]);
    }
  }
  return block;
}

}  // namespace stemcalyx
