#include "stemcalyx/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "stemcalyx/error.hpp"

namespace stemcalyx {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const std::string t = trim(text);
  const auto r = std::from_chars(t.data(), t.data() + t.size(), value);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size() || t.empty()) {
    throw Error(ErrorKind::Parameter, "config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, item));
  if (out.empty()) throw Error(ErrorKind::Parameter, "config key '" + key + "': empty list");
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) out += fmt(v[i]);
    else out += std::to_string(v[i]);
  }
  return out;
}

struct Entry {
  const char* key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
};

template <class T, class Field>
Entry scalar(const char* key, Field field) {
  return {key,
          [field](const PipelineConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return fmt(field(c));
            else return std::to_string(field(c));
          },
          [field](PipelineConfig& c, const std::string& k, const std::string& v) {
            field(c) = parse_number<T>(k, v);
          }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      scalar<int>("median_radius", [](auto& c) -> auto& { return c.median_radius; }),
      scalar<int>("growcut_border", [](auto& c) -> auto& { return c.growcut_border; }),
      scalar<double>("growcut_core", [](auto& c) -> auto& { return c.growcut_core; }),
      scalar<int>("growcut_max_iters", [](auto& c) -> auto& { return c.growcut_max_iters; }),
      {"thresholds",
       [](const PipelineConfig& c) {
         return join(std::vector<int>(c.thresholds.begin(), c.thresholds.end()));
       },
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         const auto t = parse_list<int>(k, v);
         if (t.size() != 3) throw Error(ErrorKind::Parameter, "config key 'thresholds' needs exactly 3 values");
         c.thresholds = {t[0], t[1], t[2]};
       }},
      scalar<int>("min_layers", [](auto& c) -> auto& { return c.min_layers; }),
      scalar<int>("grad_threshold", [](auto& c) -> auto& { return c.grad_threshold; }),
      scalar<std::size_t>("min_area", [](auto& c) -> auto& { return c.min_area; }),
      {"mf_q_values", [](const PipelineConfig& c) { return join(c.multifractal.q_values); },
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.multifractal.q_values = parse_list<double>(k, v);
       }},
      {"mf_box_sizes", [](const PipelineConfig& c) { return join(c.multifractal.box_sizes); },
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.multifractal.box_sizes = parse_list<int>(k, v);
       }},
      scalar<double>("mf_floor", [](auto& c) -> auto& { return c.multifractal.min_probability_floor; }),
      {"mf_single_box_size",
       [](const PipelineConfig& c) {
         return c.multifractal.single_box_size ? std::to_string(*c.multifractal.single_box_size) : std::string("off");
       },
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         if (trim(v) == "off") c.multifractal.single_box_size.reset();
         else c.multifractal.single_box_size = parse_number<int>(k, v);
       }},
      {"mf_mass",
       [](const PipelineConfig& c) {
         return std::string(c.multifractal.mass == MassSource::Gray ? "gray" : "binary");
       },
       [](PipelineConfig& c, const std::string&, const std::string& v) {
         const std::string t = trim(v);
         if (t == "binary") c.multifractal.mass = MassSource::Binary;
         else if (t == "gray") c.multifractal.mass = MassSource::Gray;
         else throw Error(ErrorKind::Parameter, "config key 'mf_mass' must be binary or gray");
       }},
      scalar<std::size_t>("fourier_points",
                          [](auto& c) -> auto& { return c.fourier.resample_points; }),
      scalar<std::size_t>("fourier_k", [](auto& c) -> auto& { return c.fourier.descriptor_count; }),
      scalar<int>("radon_step", [](auto& c) -> auto& { return c.radon.angle_step; }),
      scalar<std::size_t>("radon_bins", [](auto& c) -> auto& { return c.radon.bins; }),
      scalar<double>("radon_support", [](auto& c) -> auto& { return c.radon.support_sigmas; }),
      {"classifier", [](const PipelineConfig& c) { return std::string(to_string(c.classifier)); },
       [](PipelineConfig& c, const std::string&, const std::string& v) {
         const auto kind = parse_classifier_kind(trim(v));
         if (!kind) throw Error(ErrorKind::Parameter, "config key 'classifier' must be knn, svm or ldc");
         c.classifier = *kind;
       }},
      scalar<int>("knn_k", [](auto& c) -> auto& { return c.train.knn_k; }),
      scalar<double>("svm_c", [](auto& c) -> auto& { return c.train.svm_c; }),
      scalar<int>("svm_degree", [](auto& c) -> auto& { return c.train.svm_degree; }),
      scalar<double>("svm_gamma", [](auto& c) -> auto& { return c.train.svm_gamma; }),
      scalar<double>("svm_tolerance", [](auto& c) -> auto& { return c.train.svm_tolerance; }),
      scalar<std::size_t>("svm_max_passes", [](auto& c) -> auto& { return c.train.svm_max_passes; }),
      scalar<double>("ldc_ridge", [](auto& c) -> auto& { return c.train.ldc_ridge; }),
      scalar<double>("train_fraction", [](auto& c) -> auto& { return c.train_fraction; }),
      scalar<std::uint64_t>("rng_seed", [](auto& c) -> auto& { return c.rng_seed; }),
  };
  return table;
}

const Entry& find_entry(const std::string& key) {
  for (const Entry& e : entries())
    if (key == e.key) return e;
  throw Error(ErrorKind::Parameter, "unknown config key '" + key + "'");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::Parameter, message);
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  find_entry(trim(key)).set(*this, trim(key), value);
}

std::string PipelineConfig::get(const std::string& key) const { return find_entry(key).get(*this); }

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const Entry& e : entries()) out.emplace_back(e.key);
    return out;
  }();
  return names;
}

void PipelineConfig::validate() const {
  require(median_radius >= 1, "median_radius must be >= 1");
  require(growcut_border >= 1, "growcut_border must be >= 1");
  require(growcut_core > 0.0 && growcut_core < 1.0, "growcut_core must lie in (0, 1)");
  require(growcut_max_iters >= 0, "growcut_max_iters must be >= 0");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    require(thresholds[i] >= 1 && thresholds[i] <= 255, "thresholds must lie in [1, 255]");
    require(i == 0 || thresholds[i] > thresholds[i - 1], "thresholds must be strictly ascending");
  }
  require(min_layers >= 1 && min_layers <= 3, "min_layers must lie in [1, 3]");
  require(grad_threshold >= 0 && grad_threshold <= 255, "grad_threshold must lie in [0, 255]");
  multifractal.validate();
  require(fourier.resample_points >= 4, "fourier_points must be >= 4");
  require(fourier.descriptor_count >= 1 && fourier.descriptor_count + 2 <= fourier.resample_points,
          "fourier_k must lie in [1, fourier_points - 2]");
  require(radon.angle_step >= 1 && radon.angle_step <= 180, "radon_step must lie in [1, 180]");
  require(radon.bins >= 4, "radon_bins must be >= 4");
  require(radon.support_sigmas > 0.0, "radon_support must be positive");
  require(train.knn_k >= 1, "knn_k must be >= 1");
  require(train.svm_c > 0.0, "svm_c must be positive");
  require(train.svm_degree >= 1, "svm_degree must be >= 1");
  require(train.svm_gamma >= 0.0, "svm_gamma must be >= 0 (0 selects 1 / dimension)");
  require(train.svm_tolerance > 0.0, "svm_tolerance must be positive");
  require(train.ldc_ridge >= 0.0, "ldc_ridge must be non-negative");
  require(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0, 1)");
}

std::string PipelineConfig::to_text() const {
  std::string out;
  for (const Entry& e : entries()) out += std::string(e.key) + " = " + e.get(*this) + "\n";
  return out;
}

PipelineConfig PipelineConfig::from_text(const std::string& text) {
  PipelineConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Parameter, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      config.set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.kind(), "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

void PipelineConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write config " + path.string());
  out << to_text();
  if (!out) throw Error(ErrorKind::Io, "failed while writing config " + path.string());
}

}  // namespace stemcalyx
