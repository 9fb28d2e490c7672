#include <cmath>
#include <numbers>
#include <string>

#include "stemcalyx/descriptors.hpp"
#include "stemcalyx/error.hpp"

namespace stemcalyx {

ComplexSeq boundary_to_complex(const BoundaryChain& chain) {
  if (chain.size() < 4) {
    throw Error(ErrorKind::Degenerate, "boundary chain too short (" + std::to_string(chain.size()) +
                                           " points, need 4)");
  }
  ComplexSeq s;
  s.reserve(chain.size());
  for (const Point& p : chain) s.emplace_back(p.x, p.y);
  return s;
}

namespace {

// exp(sign * j 2 pi m / n) for m = 0..n-1.
ComplexSeq twiddles(std::size_t n, double sign) {
  ComplexSeq w(n);
  for (std::size_t m = 0; m < n; ++m) {
    w[m] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n));
  }
  return w;
}

}  // namespace

ComplexSeq fourier_coefficients(const ComplexSeq& s) {
  const std::size_t n = s.size();
  if (n == 0) throw Error(ErrorKind::Parameter, "DFT of an empty sequence");
  const ComplexSeq w = twiddles(n, -1.0);
  ComplexSeq a(n);
  for (std::size_t u = 0; u < n; ++u) {
    std::complex<double> sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += s[k] * w[(u * k) % n];
    a[u] = sum / static_cast<double>(n);
  }
  return a;
}

ComplexSeq reconstruct_boundary(const ComplexSeq& a, std::size_t keep) {
  const std::size_t n = a.size();
  if (keep < 1 || keep > n) {
    throw Error(ErrorKind::Parameter, "keep must lie in [1, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> retained{0};
  for (std::size_t j = 1; retained.size() < keep; ++j) {
    retained.push_back(j);
    if (retained.size() < keep && n - j != j) retained.push_back(n - j);
  }
  const ComplexSeq w = twiddles(n, 1.0);
  ComplexSeq s(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> sum = 0.0;
    for (std::size_t u : retained) sum += a[u] * w[(u * k) % n];
    s[k] = sum;
  }
  return s;
}

ComplexSeq resample_closed(const BoundaryChain& chain, std::size_t count) {
  const std::size_t n = chain.size();
  std::vector<double> cumulative(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = chain[i];
    const Point& b = chain[(i + 1) % n];
    cumulative[i + 1] = cumulative[i] + std::hypot(b.x - a.x, b.y - a.y);
  }
  const double length = cumulative[n];
  if (!(length > 0.0)) throw Error(ErrorKind::Degenerate, "boundary has zero length");
  ComplexSeq out(count);
  std::size_t seg = 0;
  for (std::size_t j = 0; j < count; ++j) {
    const double t = length * static_cast<double>(j) / static_cast<double>(count);
    while (seg + 1 < n && cumulative[seg + 1] <= t) ++seg;
    const Point& a = chain[seg];
    const Point& b = chain[(seg + 1) % n];
    const double span = cumulative[seg + 1] - cumulative[seg];
    const double r = span > 0.0 ? (t - cumulative[seg]) / span : 0.0;
    out[j] = {a.x + r * (b.x - a.x), a.y + r * (b.y - a.y)};
  }
  return out;
}

FeatureBlock fourier_descriptor(const BoundaryChain& chain, const FourierConfig& config) {
  if (chain.size() < 4) {
    throw Error(ErrorKind::Degenerate, "boundary chain too short (" + std::to_string(chain.size()) +
                                           " points, need 4)");
  }
  const std::size_t n0 = config.resample_points;
  const std::size_t k = config.descriptor_count;
  if (k < 1 || k + 2 > n0) {
    throw Error(ErrorKind::Parameter, "descriptor count must lie in [1, " + std::to_string(n0 - 2) + "]");
  }
  // Integer offsets from the first point are exact, so a translated chain
  // yields bit-identical coefficients.
  BoundaryChain local(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) local[i] = {chain[i].x - chain[0].x, chain[i].y - chain[0].y};
  const ComplexSeq a = fourier_coefficients(resample_closed(local, n0));
  const double scale = std::abs(a[1]);
  if (scale < 1e-9) {
    throw Error(ErrorKind::Degenerate, "first harmonic vanishes; contour is degenerate");
  }
  FeatureBlock block{BlockKind::Fourier, std::vector<double>(k)};
  for (std::size_t u = 2; u < k + 2; ++u) block.values[u - 2] = std::abs(a[u]) / scale;
  return block;
}

}  // namespace stemcalyx
