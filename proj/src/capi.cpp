#include "stemcalyx/stemcalyx.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "stemcalyx/error.hpp"
#include "stemcalyx/pipeline.hpp"

using namespace stemcalyx;

struct sc_config {
  PipelineConfig config;
  sc_log_fn log = nullptr;
  void* user = nullptr;

  LogFn logger() const {
    if (!log) return {};
    return [fn = log, user = user](const std::string& message) { fn(message.c_str(), user); };
  }
};

struct sc_image {
  AnyImage image;
};

struct sc_model {
  TrainedModel model;
};

namespace {

thread_local std::string g_last_error;

sc_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter: return SC_ERR_PARAMETER;
    case ErrorKind::Format: return SC_ERR_FORMAT;
    case ErrorKind::Io: return SC_ERR_IO;
    case ErrorKind::EmptyRegion: return SC_ERR_EMPTY_REGION;
    case ErrorKind::Degenerate: return SC_ERR_DEGENERATE;
    case ErrorKind::Numerical: return SC_ERR_NUMERICAL;
    case ErrorKind::Training: return SC_ERR_TRAINING;
    case ErrorKind::Generation: return SC_ERR_GENERATION;
  }
  return SC_ERR_INTERNAL;
}

template <class F>
sc_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SC_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorKind::Parameter, std::string(what) + " must not be NULL");
}

std::vector<Path> paths(const char* const* list, size_t n) {
  if (n == 0) throw Error(ErrorKind::Parameter, "at least one feature file is required");
  need(list, "feature file list");
  std::vector<Path> out;
  for (size_t i = 0; i < n; ++i) {
    need(list[i], "feature file path");
    out.emplace_back(list[i]);
  }
  return out;
}

SplitPart part_of(sc_split split) {
  switch (split) {
    case SC_SPLIT_TRAIN: return SplitPart::Train;
    case SC_SPLIT_TEST: return SplitPart::Test;
    case SC_SPLIT_ALL: return SplitPart::All;
  }
  throw Error(ErrorKind::Parameter, "unknown split selector");
}

}  // namespace

extern "C" {

const char* sc_version(void) { return "1.0.0"; }

const char* sc_status_string(sc_status status) {
  switch (status) {
    case SC_OK: return "ok";
    case SC_ERR_PARAMETER: return "parameter error";
    case SC_ERR_FORMAT: return "format error";
    case SC_ERR_IO: return "I/O error";
    case SC_ERR_EMPTY_REGION: return "empty region";
    case SC_ERR_DEGENERATE: return "degenerate input";
    case SC_ERR_NUMERICAL: return "numerical error";
    case SC_ERR_TRAINING: return "training error";
    case SC_ERR_GENERATION: return "generation error";
    case SC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sc_last_error(void) { return g_last_error.c_str(); }

sc_status sc_config_new(sc_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new sc_config();
  });
}

void sc_config_free(sc_config* config) { delete config; }

sc_status sc_config_load(sc_config* config, const char* path) {
  return guard([&] {
    need(config, "config");
    need(path, "path");
    config->config = PipelineConfig::load(path);
  });
}

sc_status sc_config_save(const sc_config* config, const char* path) {
  return guard([&] {
    need(config, "config");
    need(path, "path");
    config->config.save(path);
  });
}

sc_status sc_config_set(sc_config* config, const char* key, const char* value) {
  return guard([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    PipelineConfig next = config->config;
    next.set(key, value);
    next.validate();
    config->config = next;
  });
}

sc_status sc_config_get(const sc_config* config, const char* key, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    need(config, "config");
    need(key, "key");
    const std::string value = config->config.get(key);
    if (needed) *needed = value.size() + 1;
    if (cap == 0) return;
    need(buf, "buf");
    if (cap < value.size() + 1) throw Error(ErrorKind::Parameter, "buffer too small for config value");
    std::memcpy(buf, value.c_str(), value.size() + 1);
  });
}

void sc_config_set_log(sc_config* config, sc_log_fn fn, void* user) {
  if (!config) return;
  config->log = fn;
  config->user = user;
}

sc_status sc_image_load(const char* path, sc_image** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new sc_image{load_image(path)};
  });
}

void sc_image_free(sc_image* image) { delete image; }

sc_status sc_image_size(const sc_image* image, int* width, int* height, int* channels) {
  return guard([&] {
    need(image, "image");
    std::visit(
        [&](const auto& img) {
          if (width) *width = img.width();
          if (height) *height = img.height();
        },
        image->image);
    if (channels) *channels = std::holds_alternative<GrayImage>(image->image) ? 1 : 3;
  });
}

sc_status sc_detect(const sc_config* config, const sc_image* image, size_t* count) {
  return guard([&] {
    need(config, "config");
    need(image, "image");
    const Detection det = detect(image->image, config->config);
    if (count) *count = det.candidates.size();
  });
}

sc_status sc_detect_file(const sc_config* config, const char* image_path, const char* out_dir, size_t* count) {
  return guard([&] {
    need(config, "config");
    need(image_path, "image path");
    need(out_dir, "output directory");
    const auto summary = run_detect(image_path, out_dir, config->config, config->logger());
    if (count) *count = summary.candidates;
  });
}

sc_status sc_detect_manifest(const sc_config* config, const char* manifest_path, const char* out_dir,
                             size_t* count) {
  return guard([&] {
    need(config, "config");
    need(manifest_path, "manifest path");
    need(out_dir, "output directory");
    const auto summary = run_detect_manifest(manifest_path, out_dir, config->config, config->logger());
    if (count) *count = summary.candidates;
  });
}

sc_status sc_extract(const sc_config* config, const char* candidates_dir, const char* out_csv, size_t* rows,
                     size_t* skipped) {
  return guard([&] {
    need(config, "config");
    need(candidates_dir, "candidates directory");
    need(out_csv, "output path");
    const auto summary = run_extract(candidates_dir, out_csv, config->config, config->logger());
    if (rows) *rows = summary.rows;
    if (skipped) *skipped = summary.skipped;
  });
}

sc_status sc_extract_mask(const sc_config* config, const char* mask_path, double* values, size_t cap,
                          size_t* len) {
  return guard([&] {
    need(config, "config");
    need(mask_path, "mask path");
    CandidateObject object{load_mask(mask_path), {0, 0}, 0, {}};
    object.area = object.mask.count();
    object.boundary = trace_boundary(object.mask);
    const auto flat = extract_all(object, config->config.descriptors()).flatten();
    if (len) *len = flat.size();
    if (values && cap >= flat.size()) std::memcpy(values, flat.data(), flat.size() * sizeof(double));
  });
}

sc_status sc_model_train(const sc_config* config, const char* const* feature_csvs, size_t n_csvs, sc_split split,
                         const char* model_path, sc_model** out) {
  return guard([&] {
    need(config, "config");
    const auto files = paths(feature_csvs, n_csvs);
    const SplitPart part = part_of(split);
    TrainedModel model = [&] {
      if (model_path) return run_train(files, part, model_path, config->config, config->logger());
      config->config.validate();
      const Dataset data = select_part(load_dataset(files, config->logger()), part, config->config);
      try {
        return train(config->config.classifier, data, config->config.train);
      } catch (const Error& e) {
        throw e.with_stage("train");
      }
    }();
    if (out) *out = new sc_model{std::move(model)};
  });
}

sc_status sc_model_load(const char* path, sc_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new sc_model{load_model(path)};
  });
}

sc_status sc_model_save(const sc_model* model, const char* path) {
  return guard([&] {
    need(model, "model");
    need(path, "path");
    save_model(model->model, path);
  });
}

void sc_model_free(sc_model* model) { delete model; }

sc_status sc_model_evaluate(const sc_model* model, const sc_config* config, const char* const* feature_csvs,
                            size_t n_csvs, sc_split split, const char* report_path, const char* csv_path,
                            double* accuracy) {
  return guard([&] {
    need(model, "model");
    need(config, "config");
    need(report_path, "report path");
    need(csv_path, "CSV path");
    const EvalReport report = run_evaluate(model->model, paths(feature_csvs, n_csvs), part_of(split), report_path,
                                           csv_path, config->config, config->logger());
    if (accuracy) *accuracy = 100.0 * report.accuracy();
  });
}

sc_status sc_model_predict(const sc_model* model, const sc_config* config, const char* const* feature_csvs,
                           size_t n_csvs, const char* out_csv, size_t* rows) {
  return guard([&] {
    need(model, "model");
    need(out_csv, "output path");
    const std::size_t n = run_predict(model->model, paths(feature_csvs, n_csvs), out_csv,
                                      config ? config->logger() : LogFn{});
    if (rows) *rows = n;
  });
}

sc_status sc_compare_fusions(const sc_config* config, const char* const* feature_csvs, size_t n_csvs,
                             const char* report_path, const char* csv_path, double* accuracies) {
  return guard([&] {
    need(config, "config");
    need(report_path, "report path");
    need(csv_path, "CSV path");
    const FusionTable table =
        run_compare_fusions(paths(feature_csvs, n_csvs), report_path, csv_path, config->config, config->logger());
    if (accuracies) {
      std::size_t k = 0;
      for (const auto& row : table.accuracy)
        for (double a : row) accuracies[k++] = a;
    }
  });
}

sc_status sc_sweep(const sc_config* config, const char* const* feature_csvs, size_t n_csvs, sc_sweep_axis axis,
                   const double* grid, size_t n_grid, const char* out_csv) {
  return guard([&] {
    need(config, "config");
    need(out_csv, "output path");
    if (n_grid > 0) need(grid, "grid");
    SweepAxis which;
    switch (axis) {
      case SC_SWEEP_FOURIER_K: which = SweepAxis::FourierK; break;
      case SC_SWEEP_TRAIN_FRACTION: which = SweepAxis::TrainFraction; break;
      default: throw Error(ErrorKind::Parameter, "unknown sweep axis");
    }
    run_sweep(paths(feature_csvs, n_csvs), which, std::vector<double>(grid, grid + n_grid), out_csv,
              config->config, config->logger());
  });
}

sc_status sc_synth(const sc_config* config, int n_per_class, uint64_t seed, const char* out_dir, size_t* scenes) {
  return guard([&] {
    need(out_dir, "output directory");
    const std::size_t n = run_synth(n_per_class, seed, out_dir, config ? config->logger() : LogFn{});
    if (scenes) *scenes = n;
  });
}

}  // extern "C"
