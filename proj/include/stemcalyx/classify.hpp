#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stemcalyx/descriptors.hpp"

namespace stemcalyx {

enum class ClassLabel : std::uint8_t { Stem = 0, Calyx = 1, Defect = 2 };
inline constexpr std::size_t kClassCount = 3;
inline constexpr std::array<ClassLabel, kClassCount> kAllClasses = {ClassLabel::Stem, ClassLabel::Calyx,
                                                                    ClassLabel::Defect};

const char* to_string(ClassLabel label);  // "stem", "calyx", "defect"
std::optional<ClassLabel> parse_class_label(const std::string& text);

struct Sample {
  FeatureVector features;
  ClassLabel label = ClassLabel::Stem;
  int apple_id = -1;
  int view_id = -1;
};

struct Dataset {
  std::vector<Sample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  // Throws when samples disagree on block shapes.
  std::array<std::size_t, 3> shape() const;
  std::array<std::size_t, kClassCount> class_counts() const;
};

// Which blocks (multifractal, Fourier, Radon) take part; unused blocks are
// emptied before normalization.
using BlockSelection = std::array<bool, 3>;
inline constexpr BlockSelection kAllBlocks = {true, true, true};

FeatureVector select_blocks(const FeatureVector& v, const BlockSelection& selection);
Dataset select_blocks(const Dataset& data, const BlockSelection& selection);
// Keeps the first `count` Fourier values of every sample.
Dataset truncate_fourier(const Dataset& data, std::size_t count);

struct Split {
  Dataset train;
  Dataset test;
};

// Whole apples go to one side. Apples are stratified by the set of classes
// they carry, so per-class proportions follow train_fraction.
Split split_drop_one_out(const Dataset& data, double train_fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------

class Normalizer {
 public:
  static constexpr double kStdFloor = 1e-9;

  Normalizer() = default;
  Normalizer(std::array<std::size_t, 3> shape, std::vector<double> mean, std::vector<double> stddev);

  static Normalizer fit(const Dataset& train);

  FeatureVector apply(const FeatureVector& v) const;
  const std::array<std::size_t, 3>& shape() const { return shape_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return std_; }

 private:
  std::array<std::size_t, 3> shape_{};
  std::vector<double> mean_;
  std::vector<double> std_;
};

// ---------------------------------------------------------------------------

enum class ClassifierKind : std::uint8_t { Knn, Svm, Ldc };
const char* to_string(ClassifierKind kind);  // "knn", "svm", "ldc"
std::optional<ClassifierKind> parse_classifier_kind(const std::string& text);

struct TrainParams {
  int knn_k = 4;
  double svm_c = 1.0;
  int svm_degree = 3;
  // Scale of x.z inside the kernel; 0 selects 1 / dimension.
  double svm_gamma = 0.0;
  double svm_tolerance = 1e-3;
  // Iteration budget per binary subproblem is max_passes * subproblem size;
  // 0 selects 10 * |train|.
  std::size_t svm_max_passes = 0;
  double ldc_ridge = 1e-6;
};

// Polynomial kernel (gamma x.z + 1)^degree.
double poly_kernel(const std::vector<double>& x, const std::vector<double>& z, int degree, double gamma = 1.0);

// Dual solution of one binary soft-margin problem. Labels are +1 / -1.
struct BinarySvm {
  ClassLabel positive = ClassLabel::Stem;
  ClassLabel negative = ClassLabel::Calyx;
  std::vector<std::vector<double>> support;  // support vectors (alpha > 0)
  std::vector<double> coef;                  // alpha_i * y_i for each support vector
  double rho = 0.0;                          // f(x) = sum coef K(sv, x) - rho
  // Full dual state over the training subset, kept for diagnostics.
  std::vector<double> alpha;
  std::vector<double> y;
  std::size_t iterations = 0;

  double decision(const std::vector<double>& x, int degree, double gamma = 1.0) const;
};

BinarySvm train_binary_svm(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                           int degree, double c, double tolerance, std::size_t max_iterations,
                           double gamma = 1.0);

struct KnnModel {
  int k = 4;
  std::vector<FeatureVector> vectors;  // normalized
  std::vector<ClassLabel> labels;
};

struct SvmModel {
  int degree = 3;
  double gamma = 1.0;
  double c = 1.0;
  std::vector<BinarySvm> machines;  // one per class pair present in training
};

struct LdcModel {
  std::vector<ClassLabel> classes;
  std::vector<std::vector<double>> weights;  // Sigma^-1 mu_c
  std::vector<double> offsets;               // -1/2 mu_c' Sigma^-1 mu_c + log prior
};

struct TrainedModel {
  ClassifierKind kind = ClassifierKind::Knn;
  Normalizer normalizer;
  std::variant<KnnModel, SvmModel, LdcModel> parameters;
};

TrainedModel train(ClassifierKind kind, const Dataset& train, const TrainParams& params = {});
ClassLabel predict(const TrainedModel& model, const FeatureVector& v);

// Text format with hexadecimal floats; load(save(m)) predicts bit-identically.
std::string serialize_model(const TrainedModel& model);
TrainedModel parse_model(const std::string& text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

struct EvalReport {
  // confusion[true][predicted]
  std::array<std::array<std::size_t, kClassCount>, kClassCount> confusion{};

  std::size_t total() const;
  std::size_t class_count(ClassLabel c) const;
  std::size_t true_positives(ClassLabel c) const;
  // Samples of other classes predicted as c.
  std::size_t false_positives(ClassLabel c) const;
  double tpr(ClassLabel c) const;
  double accuracy() const;
};

EvalReport evaluate(const TrainedModel& model, const Dataset& test);
// "49 (98%)"
std::string format_count_rate(std::size_t count, std::size_t total);
std::string format_report(const EvalReport& report);
std::string report_csv(const EvalReport& report);

struct FusionTable {
  std::vector<ClassifierKind> classifiers;
  std::vector<std::string> subsets;           // "MD", "MD+RD", "MD+RD+FD"
  std::vector<std::vector<double>> accuracy;  // percent, [classifier][subset]
};

inline const std::vector<std::pair<std::string, BlockSelection>>& fusion_subsets() {
  static const std::vector<std::pair<std::string, BlockSelection>> subsets = {
      {"MD", {true, false, false}},
      {"MD+RD", {true, false, true}},
      {"MD+RD+FD", {true, true, true}},
  };
  return subsets;
}

FusionTable compare_fusions(const Dataset& train, const Dataset& test,
                            const std::vector<ClassifierKind>& kinds, const TrainParams& params = {});
std::string format_fusion_table(const FusionTable& table);

}  // namespace stemcalyx
