#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "stemcalyx/classify.hpp"
#include "stemcalyx/error.hpp"

namespace stemcalyx {

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Knn: return "knn";
    case ClassifierKind::Svm: return "svm";
    case ClassifierKind::Ldc: return "ldc";
  }
  return "?";
}

std::optional<ClassifierKind> parse_classifier_kind(const std::string& text) {
  for (auto k : {ClassifierKind::Knn, ClassifierKind::Svm, ClassifierKind::Ldc})
    if (text == to_string(k)) return k;
  return std::nullopt;
}

namespace {

std::vector<ClassLabel> classes_present(const Dataset& data) {
  const auto counts = data.class_counts();
  std::vector<ClassLabel> out;
  for (ClassLabel c : kAllClasses)
    if (counts[static_cast<std::size_t>(c)] > 0) out.push_back(c);
  return out;
}

SvmModel train_svm(const Dataset& normalized, const TrainParams& params) {
  const auto shape = normalized.shape();
  const double dim = static_cast<double>(shape[0] + shape[1] + shape[2]);
  if (params.svm_gamma < 0.0) throw Error(ErrorKind::Parameter, "SVM gamma must be >= 0");
  SvmModel model;
  model.degree = params.svm_degree;
  model.gamma = params.svm_gamma > 0.0 ? params.svm_gamma : 1.0 / std::max(dim, 1.0);
  model.c = params.svm_c;
  const auto classes = classes_present(normalized);
  const std::size_t passes = params.svm_max_passes > 0 ? params.svm_max_passes : 10 * normalized.size();
  for (std::size_t a = 0; a < classes.size(); ++a) {
    for (std::size_t b = a + 1; b < classes.size(); ++b) {
      std::vector<std::vector<double>> x;
      std::vector<double> y;
      for (const Sample& s : normalized.samples) {
        if (s.label == classes[a]) {
          x.push_back(s.features.flatten());
          y.push_back(1.0);
        } else if (s.label == classes[b]) {
          x.push_back(s.features.flatten());
          y.push_back(-1.0);
        }
      }
      try {
        BinarySvm m = train_binary_svm(x, y, params.svm_degree, params.svm_c, params.svm_tolerance,
                                       passes * x.size(), model.gamma);
        m.positive = classes[a];
        m.negative = classes[b];
        model.machines.push_back(std::move(m));
      } catch (const Error& e) {
        throw e.with_stage(std::string("svm subproblem ") + to_string(classes[a]) + "/" + to_string(classes[b]));
      }
    }
  }
  return model;
}

LdcModel train_ldc(const Dataset& normalized, const TrainParams& params) {
  const auto classes = classes_present(normalized);
  const auto shape = normalized.shape();
  const auto dim = static_cast<Eigen::Index>(shape[0] + shape[1] + shape[2]);
  const std::size_t n = normalized.size();

  std::vector<Eigen::VectorXd> means(classes.size(), Eigen::VectorXd::Zero(dim));
  std::vector<std::size_t> counts(classes.size(), 0);
  auto slot = [&](ClassLabel c) {
    return static_cast<std::size_t>(std::find(classes.begin(), classes.end(), c) - classes.begin());
  };
  for (const Sample& s : normalized.samples) {
    const auto v = s.features.flatten();
    const std::size_t k = slot(s.label);
    means[k] += Eigen::Map<const Eigen::VectorXd>(v.data(), dim);
    ++counts[k];
  }
  for (std::size_t k = 0; k < classes.size(); ++k) means[k] /= static_cast<double>(counts[k]);

  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(dim, dim);
  for (const Sample& s : normalized.samples) {
    const auto v = s.features.flatten();
    const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(v.data(), dim) - means[slot(s.label)];
    pooled.noalias() += d * d.transpose();
  }
  const double dof = n > classes.size() ? static_cast<double>(n - classes.size()) : 1.0;
  pooled /= dof;
  const double trace = pooled.trace();
  const double ridge = params.ldc_ridge * (trace > 0.0 ? trace / static_cast<double>(dim) : 1.0);
  pooled.diagonal().array() += ridge;

  Eigen::LDLT<Eigen::MatrixXd> solver(pooled);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::Training, "LDC covariance factorization failed");

  LdcModel model;
  model.classes = classes;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const Eigen::VectorXd w = solver.solve(means[k]);
    if (!w.allFinite()) throw Error(ErrorKind::Numerical, "LDC discriminant is not finite");
    model.weights.emplace_back(w.data(), w.data() + w.size());
    model.offsets.push_back(-0.5 * w.dot(means[k]) +
                            std::log(static_cast<double>(counts[k]) / static_cast<double>(n)));
  }
  return model;
}

ClassLabel predict_knn(const KnnModel& m, const FeatureVector& q) {
  std::vector<std::pair<double, std::size_t>> dist(m.vectors.size());
  for (std::size_t i = 0; i < m.vectors.size(); ++i) dist[i] = {fused_distance(q, m.vectors[i]), i};
  const auto k = static_cast<std::size_t>(m.k);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::array<std::size_t, kClassCount> votes{};
  std::array<double, kClassCount> sums{};
  for (std::size_t i = 0; i < k; ++i) {
    const auto c = static_cast<std::size_t>(m.labels[dist[i].second]);
    ++votes[c];
    sums[c] += dist[i].first;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < kClassCount; ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && votes[c] > 0 && sums[c] < sums[best])) best = c;
  }
  return static_cast<ClassLabel>(best);
}

ClassLabel predict_svm(const SvmModel& m, const FeatureVector& q) {
  const auto x = q.flatten();
  std::array<std::size_t, kClassCount> votes{};
  std::array<double, kClassCount> magnitude{};
  for (const BinarySvm& svm : m.machines) {
    const double d = svm.decision(x, m.degree, m.gamma);
    const auto winner = static_cast<std::size_t>(d >= 0.0 ? svm.positive : svm.negative);
    ++votes[winner];
    magnitude[winner] += std::abs(d);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < kClassCount; ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && magnitude[c] > magnitude[best])) best = c;
  }
  return static_cast<ClassLabel>(best);
}

ClassLabel predict_ldc(const LdcModel& m, const FeatureVector& q) {
  const auto x = q.flatten();
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m.classes.size(); ++k) {
    double score = m.offsets[k];
    for (std::size_t j = 0; j < x.size(); ++j) score += m.weights[k][j] * x[j];
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return m.classes[best];
}

}  // namespace

TrainedModel train(ClassifierKind kind, const Dataset& data, const TrainParams& params) {
  if (data.empty()) throw Error(ErrorKind::Parameter, "training set is empty");
  if (classes_present(data).size() < 2) throw Error(ErrorKind::Parameter, "training needs at least two classes");
  TrainedModel model;
  model.kind = kind;
  model.normalizer = Normalizer::fit(data);
  Dataset normalized = data;
  for (Sample& s : normalized.samples) s.features = model.normalizer.apply(s.features);

  switch (kind) {
    case ClassifierKind::Knn: {
      if (params.knn_k < 1 || static_cast<std::size_t>(params.knn_k) > data.size()) {
        throw Error(ErrorKind::Parameter, "k must lie in [1, |train|]");
      }
      KnnModel knn{params.knn_k, {}, {}};
      for (const Sample& s : normalized.samples) {
        knn.vectors.push_back(s.features);
        knn.labels.push_back(s.label);
      }
      model.parameters = std::move(knn);
      break;
    }
    case ClassifierKind::Svm: model.parameters = train_svm(normalized, params); break;
    case ClassifierKind::Ldc: model.parameters = train_ldc(normalized, params); break;
  }
  return model;
}

ClassLabel predict(const TrainedModel& model, const FeatureVector& v) {
  const FeatureVector q = model.normalizer.apply(v);
  return std::visit(
      [&](const auto& m) -> ClassLabel {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KnnModel>) return predict_knn(m, q);
        else if constexpr (std::is_same_v<T, SvmModel>) return predict_svm(m, q);
        else return predict_ldc(m, q);
      },
      model.parameters);
}

// ---------------------------------------------------------------------------
// Model files.

namespace {

constexpr const char* kModelMagic = "stemcalyx-model";
constexpr int kModelVersion = 1;

void put(std::ostringstream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " %a", v);
  out << buf;
}

void put_all(std::ostringstream& out, const std::vector<double>& values) {
  for (double v : values) put(out, v);
}

class Tokens {
 public:
  explicit Tokens(const std::string& text) : in_(text) {}

  std::string word(const char* what) {
    std::string w;
    if (!(in_ >> w)) throw Error(ErrorKind::Format, std::string("model file truncated at ") + what);
    return w;
  }
  void expect(const std::string& keyword) {
    const std::string w = word(keyword.c_str());
    if (w != keyword) throw Error(ErrorKind::Format, "model file: expected '" + keyword + "', got '" + w + "'");
  }
  double real(const char* what) {
    const std::string w = word(what);
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end == w.c_str() || *end != '\0') throw Error(ErrorKind::Format, std::string("model file: bad ") + what);
    return v;
  }
  long integer(const char* what) {
    const std::string w = word(what);
    char* end = nullptr;
    const long v = std::strtol(w.c_str(), &end, 10);
    if (end == w.c_str() || *end != '\0') throw Error(ErrorKind::Format, std::string("model file: bad ") + what);
    return v;
  }
  std::size_t count(const char* what, std::size_t limit = 1u << 24) {
    const long v = integer(what);
    if (v < 0 || static_cast<std::size_t>(v) > limit) {
      throw Error(ErrorKind::Format, std::string("model file: ") + what + " out of range");
    }
    return static_cast<std::size_t>(v);
  }
  std::vector<double> reals(std::size_t n, const char* what) {
    std::vector<double> v(n);
    for (double& x : v) x = real(what);
    return v;
  }
  ClassLabel label() {
    const std::string w = word("label");
    auto c = parse_class_label(w);
    if (!c) throw Error(ErrorKind::Format, "model file: unknown label '" + w + "'");
    return *c;
  }

 private:
  std::istringstream in_;
};

FeatureVector unflatten(const std::vector<double>& flat, const std::array<std::size_t, 3>& shape) {
  FeatureVector v;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    v.blocks[k].values.assign(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                              flat.begin() + static_cast<std::ptrdiff_t>(offset + shape[k]));
    offset += shape[k];
  }
  return v;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  std::ostringstream out;
  const auto& shape = model.normalizer.shape();
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "kind " << to_string(model.kind) << '\n';
  out << "shape " << shape[0] << ' ' << shape[1] << ' ' << shape[2] << '\n';
  out << "mean";
  put_all(out, model.normalizer.mean());
  out << "\nstd";
  put_all(out, model.normalizer.stddev());
  out << '\n';
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KnnModel>) {
          out << "knn " << m.k << ' ' << m.vectors.size() << '\n';
          for (std::size_t i = 0; i < m.vectors.size(); ++i) {
            out << "sample " << to_string(m.labels[i]);
            put_all(out, m.vectors[i].flatten());
            out << '\n';
          }
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          out << "svm " << m.degree;
          put(out, m.gamma);
          put(out, m.c);
          out << ' ' << m.machines.size() << '\n';
          for (const BinarySvm& svm : m.machines) {
            out << "machine " << to_string(svm.positive) << ' ' << to_string(svm.negative) << ' '
                << svm.support.size();
            put(out, svm.rho);
            out << '\n';
            for (std::size_t i = 0; i < svm.support.size(); ++i) {
              out << "sv";
              put(out, svm.coef[i]);
              put_all(out, svm.support[i]);
              out << '\n';
            }
          }
        } else {
          out << "ldc " << m.classes.size() << '\n';
          for (std::size_t k = 0; k < m.classes.size(); ++k) {
            out << "class " << to_string(m.classes[k]);
            put(out, m.offsets[k]);
            put_all(out, m.weights[k]);
            out << '\n';
          }
        }
      },
      model.parameters);
  out << "end\n";
  return out.str();
}

TrainedModel parse_model(const std::string& text) {
  Tokens in(text);
  in.expect(kModelMagic);
  if (in.integer("version") != kModelVersion) throw Error(ErrorKind::Format, "unsupported model version");
  in.expect("kind");
  const std::string kind_text = in.word("kind");
  const auto kind = parse_classifier_kind(kind_text);
  if (!kind) throw Error(ErrorKind::Format, "unknown model kind '" + kind_text + "'");
  in.expect("shape");
  std::array<std::size_t, 3> shape{};
  for (auto& s : shape) s = in.count("shape");
  const std::size_t dim = shape[0] + shape[1] + shape[2];
  in.expect("mean");
  auto mean = in.reals(dim, "mean");
  in.expect("std");
  auto stddev = in.reals(dim, "std");

  TrainedModel model;
  model.kind = *kind;
  model.normalizer = Normalizer(shape, std::move(mean), std::move(stddev));
  switch (*kind) {
    case ClassifierKind::Knn: {
      in.expect("knn");
      KnnModel m;
      m.k = static_cast<int>(in.integer("k"));
      const std::size_t n = in.count("sample count");
      if (m.k < 1 || static_cast<std::size_t>(m.k) > n) throw Error(ErrorKind::Format, "model file: bad k");
      for (std::size_t i = 0; i < n; ++i) {
        in.expect("sample");
        m.labels.push_back(in.label());
        m.vectors.push_back(unflatten(in.reals(dim, "sample value"), shape));
      }
      model.parameters = std::move(m);
      break;
    }
    case ClassifierKind::Svm: {
      in.expect("svm");
      SvmModel m;
      m.degree = static_cast<int>(in.integer("degree"));
      m.gamma = in.real("gamma");
      m.c = in.real("C");
      const std::size_t machines = in.count("machine count", 16);
      for (std::size_t i = 0; i < machines; ++i) {
        in.expect("machine");
        BinarySvm svm;
        svm.positive = in.label();
        svm.negative = in.label();
        const std::size_t nsv = in.count("support count");
        svm.rho = in.real("rho");
        for (std::size_t s = 0; s < nsv; ++s) {
          in.expect("sv");
          svm.coef.push_back(in.real("coef"));
          svm.support.push_back(in.reals(dim, "support value"));
        }
        m.machines.push_back(std::move(svm));
      }
      model.parameters = std::move(m);
      break;
    }
    case ClassifierKind::Ldc: {
      in.expect("ldc");
      LdcModel m;
      const std::size_t n = in.count("class count", kClassCount);
      for (std::size_t k = 0; k < n; ++k) {
        in.expect("class");
        m.classes.push_back(in.label());
        m.offsets.push_back(in.real("offset"));
        m.weights.push_back(in.reals(dim, "weight"));
      }
      if (m.classes.empty()) throw Error(ErrorKind::Format, "model file: LDC without classes");
      model.parameters = std::move(m);
      break;
    }
  }
  in.expect("end");
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace stemcalyx
