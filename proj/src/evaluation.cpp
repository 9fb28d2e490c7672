#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "stemcalyx/classify.hpp"
#include "stemcalyx/error.hpp"

namespace stemcalyx {

std::size_t EvalReport::total() const {
  std::size_t n = 0;
  for (const auto& row : confusion)
    for (std::size_t v : row) n += v;
  return n;
}

std::size_t EvalReport::class_count(ClassLabel c) const {
  std::size_t n = 0;
  for (std::size_t v : confusion[static_cast<std::size_t>(c)]) n += v;
  return n;
}

std::size_t EvalReport::true_positives(ClassLabel c) const {
  const auto i = static_cast<std::size_t>(c);
  return confusion[i][i];
}

std::size_t EvalReport::false_positives(ClassLabel c) const {
  const auto j = static_cast<std::size_t>(c);
  std::size_t n = 0;
  for (std::size_t i = 0; i < kClassCount; ++i)
    if (i != j) n += confusion[i][j];
  return n;
}

double EvalReport::tpr(ClassLabel c) const {
  const std::size_t n = class_count(c);
  return n == 0 ? 0.0 : static_cast<double>(true_positives(c)) / static_cast<double>(n);
}

double EvalReport::accuracy() const {
  const std::size_t n = total();
  if (n == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < kClassCount; ++i) correct += confusion[i][i];
  return static_cast<double>(correct) / static_cast<double>(n);
}

EvalReport evaluate(const TrainedModel& model, const Dataset& test) {
  if (test.empty()) throw Error(ErrorKind::Parameter, "test set is empty");
  EvalReport report;
  for (const Sample& s : test.samples) {
    const ClassLabel p = predict(model, s.features);
    ++report.confusion[static_cast<std::size_t>(s.label)][static_cast<std::size_t>(p)];
  }
  return report;
}

namespace {

std::string percent(double rate) {
  // Integral percentages print bare, as in "98%"; others keep two decimals.
  const double pct = 100.0 * rate;
  char buf[32];
  if (std::abs(pct - std::round(pct)) < 1e-9) std::snprintf(buf, sizeof buf, "%.0f%%", pct);
  else std::snprintf(buf, sizeof buf, "%.2f%%", pct);
  return buf;
}

const char* plural_name(ClassLabel c) {
  switch (c) {
    case ClassLabel::Stem: return "Stems";
    case ClassLabel::Calyx: return "Calyxes";
    case ClassLabel::Defect: return "Defects";
  }
  return "?";
}

}  // namespace

std::string format_count_rate(std::size_t count, std::size_t total) {
  if (total == 0) return std::to_string(count) + " (n/a)";
  return std::to_string(count) + " (" + percent(static_cast<double>(count) / static_cast<double>(total)) + ")";
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %-14s %s\n", "Class", "TPR", "FPR");
  out << line;
  for (ClassLabel c : kAllClasses) {
    const std::string name = std::string(plural_name(c)) + " (n=" + std::to_string(report.class_count(c)) + ")";
    std::snprintf(line, sizeof line, "%-20s %-14s %02zu\n", name.c_str(),
                  format_count_rate(report.true_positives(c), report.class_count(c)).c_str(),
                  report.false_positives(c));
    out << line;
  }
  std::snprintf(line, sizeof line, "Accuracy %.2f%% (%zu/%zu)\n", 100.0 * report.accuracy(),
                static_cast<std::size_t>(std::lround(report.accuracy() * static_cast<double>(report.total()))),
                report.total());
  out << line << "\nConfusion (rows = true, columns = predicted)\n";
  std::snprintf(line, sizeof line, "%-8s %8s %8s %8s\n", "", "stem", "calyx", "defect");
  out << line;
  for (ClassLabel c : kAllClasses) {
    const auto& row = report.confusion[static_cast<std::size_t>(c)];
    std::snprintf(line, sizeof line, "%-8s %8zu %8zu %8zu\n", to_string(c), row[0], row[1], row[2]);
    out << line;
  }
  return out.str();
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "class,n,tp,tpr,fp,pred_stem,pred_calyx,pred_defect\n";
  char buf[64];
  for (ClassLabel c : kAllClasses) {
    const auto& row = report.confusion[static_cast<std::size_t>(c)];
    std::snprintf(buf, sizeof buf, "%.6f", report.tpr(c));
    out << to_string(c) << ',' << report.class_count(c) << ',' << report.true_positives(c) << ',' << buf << ','
        << report.false_positives(c) << ',' << row[0] << ',' << row[1] << ',' << row[2] << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.6f", report.accuracy());
  out << "overall," << report.total() << ",,"  << buf << ",,,,\n";
  return out.str();
}

FusionTable compare_fusions(const Dataset& train_set, const Dataset& test_set,
                            const std::vector<ClassifierKind>& kinds, const TrainParams& params) {
  FusionTable table;
  table.classifiers = kinds;
  for (const auto& [name, selection] : fusion_subsets()) table.subsets.push_back(name);
  for (ClassifierKind kind : kinds) {
    std::vector<double> row;
    for (const auto& [name, selection] : fusion_subsets()) {
      const Dataset tr = select_blocks(train_set, selection);
      const Dataset te = select_blocks(test_set, selection);
      const TrainedModel model = train(kind, tr, params);
      row.push_back(100.0 * evaluate(model, te).accuracy());
    }
    table.accuracy.push_back(std::move(row));
  }
  return table;
}

std::string format_fusion_table(const FusionTable& table) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-12s", "Classifier");
  out << buf;
  for (const auto& s : table.subsets) {
    std::snprintf(buf, sizeof buf, " %10s", s.c_str());
    out << buf;
  }
  out << '\n';
  for (std::size_t i = 0; i < table.classifiers.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-12s", to_string(table.classifiers[i]));
    out << buf;
    for (double a : table.accuracy[i]) {
      std::snprintf(buf, sizeof buf, " %10.2f", a);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace stemcalyx
