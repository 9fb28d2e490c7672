#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stemcalyx/descriptors.hpp"
#include "stemcalyx/error.hpp"

namespace stemcalyx {

std::vector<double> MultifractalConfig::default_q_values() {
  std::vector<double> q(21);
  for (int i = 0; i < 21; ++i) q[i] = (i - 10) / 10.0;
  return q;
}

void MultifractalConfig::validate() const {
  if (q_values.empty()) throw Error(ErrorKind::Parameter, "multifractal q grid is empty");
  if (box_sizes.size() < 2 && !single_box_size) {
    throw Error(ErrorKind::Parameter, "multifractal regression needs at least two box sizes");
  }
  for (std::size_t i = 0; i < box_sizes.size(); ++i) {
    if (box_sizes[i] < 2) throw Error(ErrorKind::Parameter, "box sizes must be >= 2");
    if (i > 0 && box_sizes[i] <= box_sizes[i - 1]) {
      throw Error(ErrorKind::Parameter, "box sizes must be strictly ascending");
    }
  }
  if (single_box_size && *single_box_size < 1) {
    throw Error(ErrorKind::Parameter, "single box size must be >= 1");
  }
  if (!(min_probability_floor > 0.0)) {
    throw Error(ErrorKind::Parameter, "probability floor must be positive");
  }
}

MassGrid MassGrid::from_mask(const BinaryMask& mask) {
  MassGrid grid{mask.width(), mask.height(), std::vector<double>(mask.size())};
  for (std::size_t i = 0; i < mask.size(); ++i) grid.weights[i] = mask.test(i) ? 1.0 : 0.0;
  return grid;
}

MassGrid MassGrid::from_gray(const BinaryMask& mask, const GrayImage& patch) {
  if (patch.width() != mask.width() || patch.height() != mask.height()) {
    throw Error(ErrorKind::Parameter, "gray patch does not match the candidate mask");
  }
  MassGrid grid{mask.width(), mask.height(), std::vector<double>(mask.size())};
  for (std::size_t i = 0; i < mask.size(); ++i) {
    grid.weights[i] = mask.test(i) ? static_cast<double>(patch.data()[i]) : 0.0;
  }
  return grid;
}

BoxStats box_partition_stats(const MassGrid& grid, int epsilon) {
  if (epsilon < 1) throw Error(ErrorKind::Parameter, "box size must be >= 1");
  const int cols = (grid.width + epsilon - 1) / epsilon;
  const int rows = (grid.height + epsilon - 1) / epsilon;
  std::vector<double> box(static_cast<std::size_t>(cols) * rows, 0.0);
  std::vector<std::uint8_t> touched(box.size(), 0);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      const double w = grid.weights[static_cast<std::size_t>(y) * grid.width + x];
      if (w <= 0.0) continue;
      const std::size_t b = static_cast<std::size_t>(y / epsilon) * cols + x / epsilon;
      box[b] += w;
      touched[b] = 1;
    }
  }
  BoxStats stats;
  stats.total_boxes = box.size();
  for (std::size_t b = 0; b < box.size(); ++b) {
    if (!touched[b]) continue;
    stats.masses.push_back(box[b]);
    stats.total_mass += box[b];
  }
  stats.nonempty_boxes = stats.masses.size();
  if (stats.nonempty_boxes == 0) {
    throw Error(ErrorKind::EmptyRegion, "box counting on an empty region");
  }
  return stats;
}

BoxStats box_partition_stats(const BinaryMask& mask, int epsilon) {
  return box_partition_stats(MassGrid::from_mask(mask), epsilon);
}

SpectrumSums spectrum_sums(const BoxStats& stats, const std::vector<double>& q_values,
                           double floor, int epsilon) {
  const std::size_t n = stats.masses.size();
  std::vector<double> p(n);
  std::vector<double> log_p(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::max(stats.masses[i] / stats.total_mass, floor);
    log_p[i] = std::log(p[i]);
  }
  SpectrumSums sums;
  sums.alpha_sum.reserve(q_values.size());
  sums.f_sum.reserve(q_values.size());
  std::vector<double> weight(n);
  for (double q : q_values) {
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      weight[i] = std::pow(p[i], q);
      z += weight[i];
    }
    double a = 0.0;
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mu = weight[i] / z;
      a += mu * log_p[i];
      f += mu * std::log(mu);
    }
    if (!std::isfinite(a) || !std::isfinite(f)) {
      throw Error(ErrorKind::Numerical, "non-finite multifractal sum at q=" + std::to_string(q) +
                                            ", eps=" + std::to_string(epsilon));
    }
    sums.alpha_sum.push_back(a);
    sums.f_sum.push_back(f);
  }
  return sums;
}

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

FeatureBlock multifractal_descriptor(const MassGrid& grid, const MultifractalConfig& config) {
  config.validate();
  const std::size_t k = config.q_values.size();
  FeatureBlock block{BlockKind::Multifractal, std::vector<double>(2 * k)};

  if (config.single_box_size) {
    const int eps = *config.single_box_size;
    const auto stats = box_partition_stats(grid, eps);
    const auto sums = spectrum_sums(stats, config.q_values, config.min_probability_floor, eps);
    std::copy(sums.f_sum.begin(), sums.f_sum.end(), block.values.begin());
    std::copy(sums.alpha_sum.begin(), sums.alpha_sum.end(), block.values.begin() + k);
    return block;
  }

  const std::size_t scales = config.box_sizes.size();
  std::vector<double> log_eps(scales);
  std::vector<std::vector<double>> f_by_q(k, std::vector<double>(scales));
  std::vector<std::vector<double>> a_by_q(k, std::vector<double>(scales));
  for (std::size_t s = 0; s < scales; ++s) {
    const int eps = config.box_sizes[s];
    const auto stats = box_partition_stats(grid, eps);
    if (s == 0 && stats.nonempty_boxes < 2) {
      throw Error(ErrorKind::Degenerate, "multifractal spectrum needs at least two occupied boxes at eps=" +
                                             std::to_string(eps));
    }
    log_eps[s] = std::log(static_cast<double>(eps));
    const auto sums = spectrum_sums(stats, config.q_values, config.min_probability_floor, eps);
    for (std::size_t i = 0; i < k; ++i) {
      f_by_q[i][s] = sums.f_sum[i];
      a_by_q[i][s] = sums.alpha_sum[i];
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    block.values[i] = slope(log_eps, f_by_q[i]);
    block.values[k + i] = slope(log_eps, a_by_q[i]);
  }
  return block;
}

FeatureBlock multifractal_descriptor(const BinaryMask& mask, const MultifractalConfig& config) {
  return multifractal_descriptor(MassGrid::from_mask(mask), config);
}

}  // namespace stemcalyx
