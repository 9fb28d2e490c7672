#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "stemcalyx/classify.hpp"
#include "stemcalyx/config.hpp"
#include "stemcalyx/csv.hpp"
#include "stemcalyx/image.hpp"

namespace stemcalyx {

using Path = std::filesystem::path;
using LogFn = std::function<void(const std::string&)>;

struct Detection {
  GrayImage filtered;
  BinaryMask fruit;
  int growcut_passes = 0;
  bool growcut_converged = false;
  std::vector<CandidateObject> candidates;
};

// Median filter, grow-cut fruit mask, multi-threshold marker, gradient
// refinement and component extraction. Errors carry the failing stage name.
Detection detect(const AnyImage& image, const PipelineConfig& config);

// Copy of `base` with every candidate boundary drawn at 255.
GrayImage draw_overlay(const GrayImage& base, const std::vector<CandidateObject>& candidates);

GrayImage crop(const GrayImage& image, const Box& box);

struct DetectSummary {
  std::size_t scenes = 0;
  std::size_t candidates = 0;
  std::size_t unmatched = 0;  // candidates touching no ground-truth region
  std::size_t missed = 0;     // ground-truth regions with no candidate
};

// Writes candidates.csv, masks/, gray/, overlay PGM(s) and config.txt.
DetectSummary run_detect(const Path& image, const Path& out_dir, const PipelineConfig& config,
                         const LogFn& log = {});
// Every scene of a synthetic manifest; candidates inherit apple/view ids and
// the label of the ground-truth region they overlap most.
DetectSummary run_detect_manifest(const Path& manifest, const Path& out_dir, const PipelineConfig& config,
                                  const LogFn& log = {});

struct ExtractSummary {
  std::size_t rows = 0;
  std::size_t skipped = 0;
};

// Reads <candidates_dir>/candidates.csv. Degenerate candidates are skipped.
ExtractSummary run_extract(const Path& candidates_dir, const Path& out_csv, const PipelineConfig& config,
                           const LogFn& log = {});

enum class SplitPart { Train, Test, All };
const char* to_string(SplitPart part);
std::optional<SplitPart> parse_split_part(const std::string& text);

// Labelled rows of all files, concatenated in order.
Dataset load_dataset(const std::vector<Path>& feature_csvs, const LogFn& log = {});
Dataset select_part(const Dataset& data, SplitPart part, const PipelineConfig& config);

TrainedModel run_train(const std::vector<Path>& feature_csvs, SplitPart part, const Path& model_path,
                       const PipelineConfig& config, const LogFn& log = {});

// Writes the text report to report_path and its CSV copy to csv_path.
EvalReport run_evaluate(const TrainedModel& model, const std::vector<Path>& feature_csvs, SplitPart part,
                        const Path& report_path, const Path& csv_path, const PipelineConfig& config,
                        const LogFn& log = {});

// id,predicted,label for every row (labelled or not).
std::size_t run_predict(const TrainedModel& model, const std::vector<Path>& feature_csvs, const Path& out_csv,
                        const LogFn& log = {});

// Every classifier kind on MD / MD+RD / MD+RD+FD over the configured split.
FusionTable run_compare_fusions(const std::vector<Path>& feature_csvs, const Path& report_path,
                                const Path& csv_path, const PipelineConfig& config, const LogFn& log = {});

enum class SweepAxis { FourierK, TrainFraction };
std::optional<SweepAxis> parse_sweep_axis(const std::string& text);
const char* to_string(SweepAxis axis);

std::string sweep_csv(const Dataset& data, SweepAxis axis, const std::vector<double>& grid,
                      const PipelineConfig& config, const LogFn& log = {});
std::size_t run_sweep(const std::vector<Path>& feature_csvs, SweepAxis axis, const std::vector<double>& grid,
                      const Path& out_csv, const PipelineConfig& config, const LogFn& log = {});

std::size_t run_synth(int n_per_class, std::uint64_t seed, const Path& out_dir, const LogFn& log = {});

// Provenance copy of the config next to an output file: <file>.config.txt.
void echo_config(const PipelineConfig& config, const Path& output_file);

}  // namespace stemcalyx
