#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "stemcalyx/classify.hpp"
#include "stemcalyx/error.hpp"
#include "stemcalyx/rng.hpp"

namespace stemcalyx {

const char* to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::Stem: return "stem";
    case ClassLabel::Calyx: return "calyx";
    case ClassLabel::Defect: return "defect";
  }
  return "?";
}

std::optional<ClassLabel> parse_class_label(const std::string& text) {
  for (ClassLabel c : kAllClasses)
    if (text == to_string(c)) return c;
  return std::nullopt;
}

std::array<std::size_t, 3> Dataset::shape() const {
  if (samples.empty()) return {0, 0, 0};
  const auto s = samples.front().features.shape();
  for (const Sample& x : samples) {
    if (x.features.shape() != s) throw Error(ErrorKind::Parameter, "dataset samples disagree on block shapes");
  }
  return s;
}

std::array<std::size_t, kClassCount> Dataset::class_counts() const {
  std::array<std::size_t, kClassCount> counts{};
  for (const Sample& s : samples) ++counts[static_cast<std::size_t>(s.label)];
  return counts;
}

FeatureVector select_blocks(const FeatureVector& v, const BlockSelection& selection) {
  FeatureVector out = v;
  for (std::size_t k = 0; k < 3; ++k)
    if (!selection[k]) out.blocks[k].values.clear();
  return out;
}

Dataset select_blocks(const Dataset& data, const BlockSelection& selection) {
  Dataset out = data;
  for (Sample& s : out.samples) s.features = select_blocks(s.features, selection);
  return out;
}

Dataset truncate_fourier(const Dataset& data, std::size_t count) {
  Dataset out = data;
  for (Sample& s : out.samples) {
    auto& values = s.features.block(BlockKind::Fourier).values;
    if (count > values.size()) {
      throw Error(ErrorKind::Parameter, "requested " + std::to_string(count) + " Fourier descriptors but only " +
                                            std::to_string(values.size()) + " are stored");
    }
    values.resize(count);
  }
  return out;
}

Split split_drop_one_out(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::Parameter, "train fraction must lie in (0, 1)");
  }
  // Samples without an apple id stand alone.
  std::vector<long> keys(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int id = data.samples[i].apple_id;
    keys[i] = id >= 0 ? id : -static_cast<long>(i) - 1;
  }
  std::map<long, unsigned> signature;
  for (std::size_t i = 0; i < data.size(); ++i) {
    signature[keys[i]] |= 1u << static_cast<unsigned>(data.samples[i].label);
  }
  for (ClassLabel c : kAllClasses) {
    const auto bit = 1u << static_cast<unsigned>(c);
    const auto apples = std::count_if(signature.begin(), signature.end(),
                                      [bit](const auto& kv) { return (kv.second & bit) != 0; });
    if (apples > 0 && apples < 2) {
      throw Error(ErrorKind::Parameter, std::string("class ") + to_string(c) +
                                            " has fewer than 2 apples; cannot split");
    }
  }
  if (signature.size() < 2) throw Error(ErrorKind::Parameter, "need at least 2 apples to split");

  std::vector<long> apples;
  for (const auto& kv : signature) apples.push_back(kv.first);
  Rng rng(seed);
  for (std::size_t i = apples.size(); i > 1; --i) {
    std::swap(apples[i - 1], apples[rng.below(i)]);
  }

  std::map<unsigned, std::vector<long>> groups;
  for (long a : apples) groups[signature[a]].push_back(a);
  const std::size_t n = apples.size();
  const auto target = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(n))), 1, n - 1);

  // Largest-remainder apportionment of the train quota over groups.
  struct Quota {
    unsigned signature;
    std::size_t take;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (const auto& [sig, members] : groups) {
    const double exact = train_fraction * static_cast<double>(members.size());
    const auto base = static_cast<std::size_t>(std::floor(exact));
    quotas.push_back({sig, base, exact - static_cast<double>(base)});
    assigned += base;
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return quotas[a].remainder > quotas[b].remainder; });
  for (std::size_t i = 0; assigned < target && i < order.size(); ++i) {
    Quota& q = quotas[order[i]];
    if (q.take < groups[q.signature].size()) {
      ++q.take;
      ++assigned;
    }
  }

  std::map<long, bool> in_train;
  for (const Quota& q : quotas) {
    const auto& members = groups[q.signature];
    for (std::size_t i = 0; i < members.size(); ++i) in_train[members[i]] = i < q.take;
  }
  Split split;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (in_train[keys[i]] ? split.train : split.test).samples.push_back(data.samples[i]);
  }
  return split;
}

Normalizer::Normalizer(std::array<std::size_t, 3> shape, std::vector<double> mean, std::vector<double> stddev)
    : shape_(shape), mean_(std::move(mean)), std_(std::move(stddev)) {
  const std::size_t n = shape_[0] + shape_[1] + shape_[2];
  if (mean_.size() != n || std_.size() != n) {
    throw Error(ErrorKind::Parameter, "normalizer statistics do not match the block shape");
  }
}

Normalizer Normalizer::fit(const Dataset& train) {
  if (train.empty()) throw Error(ErrorKind::Parameter, "cannot fit a normalizer on an empty dataset");
  const auto shape = train.shape();
  const std::size_t dim = shape[0] + shape[1] + shape[2];
  std::vector<double> mean(dim, 0.0);
  std::vector<double> var(dim, 0.0);
  const double n = static_cast<double>(train.size());
  for (const Sample& s : train.samples) {
    const auto x = s.features.flatten();
    for (std::size_t j = 0; j < dim; ++j) mean[j] += x[j];
  }
  for (double& m : mean) m /= n;
  // Constant columns take their value exactly so they normalize to 0.
  const auto first = train.samples.front().features.flatten();
  std::vector<bool> constant(dim, true);
  for (const Sample& s : train.samples) {
    const auto x = s.features.flatten();
    for (std::size_t j = 0; j < dim; ++j) constant[j] = constant[j] && x[j] == first[j];
  }
  for (std::size_t j = 0; j < dim; ++j)
    if (constant[j]) mean[j] = first[j];
  for (const Sample& s : train.samples) {
    const auto x = s.features.flatten();
    for (std::size_t j = 0; j < dim; ++j) var[j] += (x[j] - mean[j]) * (x[j] - mean[j]);
  }
  std::vector<double> stddev(dim);
  for (std::size_t j = 0; j < dim; ++j) stddev[j] = std::max(std::sqrt(var[j] / n), kStdFloor);
  return Normalizer(shape, std::move(mean), std::move(stddev));
}

FeatureVector Normalizer::apply(const FeatureVector& v) const {
  if (v.shape() != shape_) throw Error(ErrorKind::Parameter, "feature vector shape does not match the model");
  FeatureVector out = v;
  std::size_t j = 0;
  for (auto& block : out.blocks) {
    for (double& x : block.values) {
      x = (x - mean_[j]) / std_[j];
      ++j;
    }
  }
  return out;
}

}  // namespace stemcalyx
