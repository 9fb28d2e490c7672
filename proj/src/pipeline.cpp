#include "stemcalyx/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "stemcalyx/error.hpp"
#include "stemcalyx/segmentation.hpp"
#include "stemcalyx/synthgen.hpp"

namespace stemcalyx {

namespace {

template <class F>
auto in_stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.with_stage(name);
  }
}

void say(const LogFn& log, const std::string& message) {
  if (log) log(message);
}

void make_dirs(const Path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::string candidate_id(const std::string& scene, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_c%02zu", index);
  return scene + buf;
}

std::string percent_text(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", 100.0 * rate);
  return buf;
}

struct SceneLabels {
  int apple_id = -1;
  int view_id = -1;
  const std::vector<SceneTruth>* truth = nullptr;
};

// Writes masks, gray crops and the overlay of one scene; returns its rows.
std::vector<CandidateRow> write_scene(const std::string& scene, const Detection& det, const Path& out_dir,
                                      const Path& overlay_path, const SceneLabels& labels,
                                      DetectSummary& summary) {
  std::vector<CandidateRow> rows;
  std::vector<bool> found(labels.truth ? labels.truth->size() : 0, false);
  for (std::size_t i = 0; i < det.candidates.size(); ++i) {
    const CandidateObject& c = det.candidates[i];
    CandidateRow row;
    row.id = candidate_id(scene, i);
    row.scene = scene;
    row.index = static_cast<int>(i);
    row.apple_id = labels.apple_id;
    row.view_id = labels.view_id;
    row.bbox = c.bbox();
    row.area = c.area;
    row.mask_path = "masks/" + row.id + ".pgm";
    row.gray_path = "gray/" + row.id + ".pgm";
    if (labels.truth) {
      std::size_t best = 0;
      std::size_t best_overlap = 0;
      for (std::size_t t = 0; t < labels.truth->size(); ++t) {
        std::size_t overlap = 0;
        for (int y = 0; y < c.mask.height(); ++y)
          for (int x = 0; x < c.mask.width(); ++x)
            if (c.mask.at(x, y) && (*labels.truth)[t].mask.get(c.origin.x + x, c.origin.y + y)) ++overlap;
        if (overlap > best_overlap) {
          best_overlap = overlap;
          best = t;
        }
      }
      if (best_overlap > 0) {
        row.label = (*labels.truth)[best].label;
        found[best] = true;
      } else {
        ++summary.unmatched;
      }
    }
    save_mask(c.mask, out_dir / row.mask_path);
    save_image(crop(det.filtered, row.bbox), out_dir / row.gray_path);
    rows.push_back(std::move(row));
  }
  summary.missed += static_cast<std::size_t>(std::count(found.begin(), found.end(), false));
  summary.candidates += rows.size();
  ++summary.scenes;
  save_image(draw_overlay(det.filtered, det.candidates), overlay_path);
  return rows;
}

void prepare_detect_dir(const Path& out_dir, const PipelineConfig& config) {
  make_dirs(out_dir / "masks");
  make_dirs(out_dir / "gray");
  config.save(out_dir / "config.txt");
}

}  // namespace

Detection detect(const AnyImage& image, const PipelineConfig& config) {
  in_stage("config", [&] { config.validate(); });
  const GrayImage gray = in_stage("grayscale", [&] {
    if (const auto* g = std::get_if<GrayImage>(&image)) return *g;
    return to_grayscale(std::get<ColorImage>(image));
  });
  Detection det{in_stage("median", [&] { return median_filter(gray, config.median_radius); }),
                BinaryMask(1, 1), 0, false, {}};
  const GrowCutResult fruit = in_stage("growcut", [&] {
    const SeedMask seeds = auto_seed(det.filtered, config.growcut_border, config.growcut_core);
    if (const auto* rgb = std::get_if<ColorImage>(&image)) return grow_cut(*rgb, seeds, config.growcut_max_iters);
    return grow_cut(det.filtered, seeds, config.growcut_max_iters);
  });
  det.fruit = fruit.foreground;
  det.growcut_passes = fruit.passes;
  det.growcut_converged = fruit.converged;
  const LayerImage layers = in_stage("threshold", [&] { return multi_threshold(det.filtered, config.thresholds); });
  // The background is as dark as the candidates; only marker pixels on the
  // fruit may seed the refinement, otherwise it climbs the fruit rim.
  const BinaryMask marker = in_stage("threshold", [&] {
    BinaryMask m = marker_from_layers(layers, config.min_layers);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (!det.fruit.test(i)) m.set_index(i, false);
    return m;
  });
  // Growth is admitted only where the multi-layer image sees some darkness;
  // a bare Sobel response would add the bright ring around every candidate.
  const BinaryMask refined = in_stage("gradient", [&] {
    GrayImage gradient = sobel_magnitude(det.filtered);
    auto g = gradient.data();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (layers.counts[i] == 0) g[i] = 0;
    return gradient_refine(marker, gradient, config.grad_threshold);
  });
  det.candidates = in_stage("candidates", [&] { return detect_candidates(det.fruit, refined, config.min_area); });
  return det;
}

GrayImage draw_overlay(const GrayImage& base, const std::vector<CandidateObject>& candidates) {
  GrayImage out = base;
  for (const CandidateObject& c : candidates)
    for (const Point& p : c.boundary) out.at(p.x, p.y) = 255;
  return out;
}

GrayImage crop(const GrayImage& image, const Box& box) {
  if (box.x < 0 || box.y < 0 || box.width < 1 || box.height < 1 || box.x + box.width > image.width() ||
      box.y + box.height > image.height()) {
    throw Error(ErrorKind::Parameter, "crop box lies outside the image");
  }
  GrayImage out(box.width, box.height);
  for (int y = 0; y < box.height; ++y)
    for (int x = 0; x < box.width; ++x) out.at(x, y) = image.at(box.x + x, box.y + y);
  return out;
}

DetectSummary run_detect(const Path& image, const Path& out_dir, const PipelineConfig& config, const LogFn& log) {
  const AnyImage input = in_stage("load", [&] { return load_image(image); });
  const Detection det = detect(input, config);
  if (!det.growcut_converged) say(log, "warning: grow-cut stopped before convergence");
  prepare_detect_dir(out_dir, config);
  DetectSummary summary;
  const auto rows = write_scene(image.stem().string(), det, out_dir, out_dir / "overlay.pgm", {}, summary);
  write_candidates(rows, out_dir / "candidates.csv");
  say(log, "detect: " + std::to_string(summary.candidates) + " candidate(s) in " + image.string());
  return summary;
}

DetectSummary run_detect_manifest(const Path& manifest, const Path& out_dir, const PipelineConfig& config,
                                  const LogFn& log) {
  const auto entries = in_stage("load", [&] { return read_manifest(manifest); });
  const Path base = manifest.parent_path();
  prepare_detect_dir(out_dir, config);
  make_dirs(out_dir / "overlays");
  DetectSummary summary;
  std::vector<CandidateRow> rows;
  for (const ManifestRow& m : entries) {
    const Path scene_path = base / m.scene_path;
    const std::string scene = scene_path.stem().string();
    const AnyImage input = in_stage("load", [&] { return load_image(scene_path); });
    std::vector<SceneTruth> truth{{in_stage("load", [&] { return load_mask(base / m.truth_path); }), m.spec.label}};
    const Detection det = [&] {
      try {
        return detect(input, config);
      } catch (const Error& e) {
        throw Error(e.kind(), scene + ": " + e.what());
      }
    }();
    auto scene_rows = write_scene(scene, det, out_dir, out_dir / "overlays" / (scene + ".pgm"),
                                  {m.apple_id, m.view_id, &truth}, summary);
    rows.insert(rows.end(), scene_rows.begin(), scene_rows.end());
    if (summary.scenes % 50 == 0) say(log, "detect: " + std::to_string(summary.scenes) + " scenes");
  }
  write_candidates(rows, out_dir / "candidates.csv");
  say(log, "detect: " + std::to_string(summary.candidates) + " candidate(s) over " +
               std::to_string(summary.scenes) + " scene(s), " + std::to_string(summary.unmatched) +
               " unmatched, " + std::to_string(summary.missed) + " missed");
  return summary;
}

ExtractSummary run_extract(const Path& candidates_dir, const Path& out_csv, const PipelineConfig& config,
                           const LogFn& log) {
  in_stage("config", [&] { config.validate(); });
  const auto listing = in_stage("load", [&] { return read_candidates(candidates_dir / "candidates.csv"); });
  const DescriptorConfig descriptors = config.descriptors();
  ExtractSummary summary;
  std::vector<FeatureRow> rows;
  for (const CandidateRow& c : listing) {
    CandidateObject object{in_stage("load", [&] { return load_mask(candidates_dir / c.mask_path); }),
                           {c.bbox.x, c.bbox.y}, 0, {}};
    object.area = object.mask.count();
    std::optional<GrayImage> patch;
    if (config.multifractal.mass == MassSource::Gray) {
      patch = in_stage("load", [&] { return load_gray(candidates_dir / c.gray_path); });
    }
    try {
      object.boundary = trace_boundary(object.mask, object.origin);
      FeatureRow row;
      row.id = c.id;
      row.label = c.label;
      row.apple_id = c.apple_id;
      row.view_id = c.view_id;
      row.features = extract_all(object, descriptors, patch ? &*patch : nullptr);
      rows.push_back(std::move(row));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Degenerate && e.kind() != ErrorKind::EmptyRegion) {
        throw Error(e.kind(), "extract: " + c.id + ": " + e.what());
      }
      ++summary.skipped;
      say(log, "warning: skipping " + c.id + ": " + e.what());
    }
  }
  summary.rows = rows.size();
  write_features(rows, out_csv);
  echo_config(config, out_csv);
  say(log, "extract: " + std::to_string(summary.rows) + " row(s), " + std::to_string(summary.skipped) +
               " skipped");
  return summary;
}

const char* to_string(SplitPart part) {
  switch (part) {
    case SplitPart::Train: return "train";
    case SplitPart::Test: return "test";
    case SplitPart::All: return "all";
  }
  return "?";
}

std::optional<SplitPart> parse_split_part(const std::string& text) {
  for (SplitPart p : {SplitPart::Train, SplitPart::Test, SplitPart::All})
    if (text == to_string(p)) return p;
  return std::nullopt;
}

Dataset load_dataset(const std::vector<Path>& feature_csvs, const LogFn& log) {
  if (feature_csvs.empty()) throw Error(ErrorKind::Parameter, "no feature files given");
  Dataset data;
  for (const Path& p : feature_csvs) {
    std::size_t unlabeled = 0;
    const Dataset part = to_dataset(read_features(p), &unlabeled);
    if (unlabeled > 0) say(log, "warning: " + p.string() + ": ignoring " + std::to_string(unlabeled) + " unlabelled row(s)");
    data.samples.insert(data.samples.end(), part.samples.begin(), part.samples.end());
  }
  try {
    data.shape();
  } catch (const Error& e) {
    throw Error(ErrorKind::Format, e.what());
  }
  if (data.empty()) throw Error(ErrorKind::Format, "feature files contain no labelled rows");
  return data;
}

Dataset select_part(const Dataset& data, SplitPart part, const PipelineConfig& config) {
  if (part == SplitPart::All) return data;
  Split split = split_drop_one_out(data, config.train_fraction, config.rng_seed);
  return part == SplitPart::Train ? std::move(split.train) : std::move(split.test);
}

TrainedModel run_train(const std::vector<Path>& feature_csvs, SplitPart part, const Path& model_path,
                       const PipelineConfig& config, const LogFn& log) {
  in_stage("config", [&] { config.validate(); });
  const Dataset data = select_part(load_dataset(feature_csvs, log), part, config);
  const TrainedModel model = in_stage("train", [&] { return train(config.classifier, data, config.train); });
  save_model(model, model_path);
  echo_config(config, model_path);
  say(log, std::string("train: ") + to_string(config.classifier) + " on " + std::to_string(data.size()) +
               " sample(s) -> " + model_path.string());
  return model;
}

EvalReport run_evaluate(const TrainedModel& model, const std::vector<Path>& feature_csvs, SplitPart part,
                        const Path& report_path, const Path& csv_path, const PipelineConfig& config,
                        const LogFn& log) {
  in_stage("config", [&] { config.validate(); });
  const Dataset data = select_part(load_dataset(feature_csvs, log), part, config);
  const EvalReport report = in_stage("evaluate", [&] { return evaluate(model, data); });
  write_text_file(report_path, format_report(report));
  write_text_file(csv_path, report_csv(report));
  echo_config(config, report_path);
  return report;
}

std::size_t run_predict(const TrainedModel& model, const std::vector<Path>& feature_csvs, const Path& out_csv,
                        const LogFn& log) {
  if (feature_csvs.empty()) throw Error(ErrorKind::Parameter, "no feature files given");
  std::string out = "id,predicted,label\n";
  std::size_t count = 0;
  for (const Path& p : feature_csvs) {
    for (const FeatureRow& row : read_features(p)) {
      const ClassLabel label = in_stage("predict", [&] { return predict(model, row.features); });
      out += row.id + "," + to_string(label) + "," + (row.label ? to_string(*row.label) : "") + "\n";
      ++count;
    }
  }
  write_text_file(out_csv, out);
  say(log, "predict: " + std::to_string(count) + " row(s)");
  return count;
}

FusionTable run_compare_fusions(const std::vector<Path>& feature_csvs, const Path& report_path,
                                const Path& csv_path, const PipelineConfig& config, const LogFn& log) {
  in_stage("config", [&] { config.validate(); });
  const Dataset data = load_dataset(feature_csvs, log);
  const Split split = split_drop_one_out(data, config.train_fraction, config.rng_seed);
  const FusionTable table = in_stage("compare", [&] {
    return compare_fusions(split.train, split.test, {ClassifierKind::Svm, ClassifierKind::Knn, ClassifierKind::Ldc},
                           config.train);
  });
  write_text_file(report_path, format_fusion_table(table));
  std::string csv = "classifier";
  for (const auto& s : table.subsets) csv += "," + s;
  csv += "\n";
  for (std::size_t i = 0; i < table.classifiers.size(); ++i) {
    csv += to_string(table.classifiers[i]);
    for (double a : table.accuracy[i]) csv += "," + percent_text(a / 100.0);
    csv += "\n";
  }
  write_text_file(csv_path, csv);
  echo_config(config, report_path);
  return table;
}

std::optional<SweepAxis> parse_sweep_axis(const std::string& text) {
  if (text == "fourier_K" || text == "fourier_k") return SweepAxis::FourierK;
  if (text == "train_fraction") return SweepAxis::TrainFraction;
  return std::nullopt;
}

const char* to_string(SweepAxis axis) { return axis == SweepAxis::FourierK ? "fourier_K" : "train_fraction"; }

std::string sweep_csv(const Dataset& data, SweepAxis axis, const std::vector<double>& grid,
                      const PipelineConfig& config, const LogFn& log) {
  if (grid.empty()) throw Error(ErrorKind::Parameter, "sweep grid is empty");
  std::string out = "axis,value,n_train,n_test,tpr_stem,tpr_calyx,tpr_defect,accuracy\n";
  for (double value : grid) {
    Dataset working = data;
    double fraction = config.train_fraction;
    if (axis == SweepAxis::FourierK) {
      if (!(value >= 1.0) || value != std::floor(value)) {
        throw Error(ErrorKind::Parameter, "fourier_K grid values must be positive integers");
      }
      working = truncate_fourier(data, static_cast<std::size_t>(value));
    } else {
      if (!(value > 0.0 && value < 1.0)) throw Error(ErrorKind::Parameter, "train_fraction grid values must lie in (0, 1)");
      fraction = value;
    }
    const Split split = split_drop_one_out(working, fraction, config.rng_seed);
    const EvalReport report = in_stage("sweep", [&] {
      return evaluate(train(config.classifier, split.train, config.train), split.test);
    });
    out += std::string(to_string(axis)) + "," + format_real(value) + "," + std::to_string(split.train.size()) + "," +
           std::to_string(split.test.size());
    for (ClassLabel c : kAllClasses) out += "," + percent_text(report.tpr(c));
    out += "," + percent_text(report.accuracy()) + "\n";
    say(log, std::string("sweep: ") + to_string(axis) + " = " + format_real(value) + " -> " +
                 percent_text(report.accuracy()) + "%");
  }
  return out;
}

std::size_t run_sweep(const std::vector<Path>& feature_csvs, SweepAxis axis, const std::vector<double>& grid,
                      const Path& out_csv, const PipelineConfig& config, const LogFn& log) {
  in_stage("config", [&] { config.validate(); });
  const Dataset data = load_dataset(feature_csvs, log);
  write_text_file(out_csv, sweep_csv(data, axis, grid, config, log));
  echo_config(config, out_csv);
  return grid.size();
}

std::size_t run_synth(int n_per_class, std::uint64_t seed, const Path& out_dir, const LogFn& log) {
  const auto rows = in_stage("synth", [&] { return gen_corpus(n_per_class, seed, out_dir); });
  say(log, "synth: " + std::to_string(rows.size()) + " scene(s) in " + out_dir.string());
  return rows.size();
}

void echo_config(const PipelineConfig& config, const Path& output_file) {
  Path p = output_file;
  p += ".config.txt";
  config.save(p);
}

}  // namespace stemcalyx
