#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stemcalyx/stemcalyx.h"

namespace {

bool verbose() {
  const char* v = std::getenv("STEMCALYX_VERBOSE");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void log_to_stderr(const char* message, void*) {
  const std::string text(message);
  if (verbose() || text.rfind("warning:", 0) == 0) std::cerr << text << '\n';
}

int exit_code(sc_status status) {
  switch (status) {
    case SC_OK: return 0;
    case SC_ERR_PARAMETER: return 1;
    case SC_ERR_FORMAT:
    case SC_ERR_IO:
    case SC_ERR_EMPTY_REGION:
    case SC_ERR_DEGENERATE:
    case SC_ERR_GENERATION: return 2;
    case SC_ERR_NUMERICAL:
    case SC_ERR_TRAINING:
    case SC_ERR_INTERNAL: return 3;
  }
  return 3;
}

struct Failure {
  sc_status status;
};

void check(sc_status status) {
  if (status != SC_OK) throw Failure{status};
}

struct ConfigHandle {
  sc_config* ptr = nullptr;
  ~ConfigHandle() { sc_config_free(ptr); }
};

struct ModelHandle {
  sc_model* ptr = nullptr;
  ~ModelHandle() { sc_model_free(ptr); }
};

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

sc_split split_of(const std::string& name) {
  if (name == "train") return SC_SPLIT_TRAIN;
  if (name == "test") return SC_SPLIT_TEST;
  return SC_SPLIT_ALL;
}

void print_file(const std::string& path) {
  std::ifstream in(path);
  std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stem, calyx and defect detection on fruit images by fused shape descriptors."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sc_version()));

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "override one config key (key=value); repeatable");

  std::string out;
  std::string model_path;
  std::string split = "train";
  std::vector<std::string> features;

  auto* detect = app.add_subcommand("detect", "detect candidate regions in an image or a synthetic manifest");
  std::string image_path;
  std::string manifest_path;
  auto* image_opt = detect->add_option("image", image_path, "input PGM/PPM image");
  auto* manifest_opt = detect->add_option("--manifest", manifest_path, "synthetic corpus manifest.csv");
  image_opt->excludes(manifest_opt);
  detect->add_option("-o,--out", out, "output directory")->required();

  auto* extract = app.add_subcommand("extract", "compute fused descriptors for detected candidates");
  std::string candidates_dir;
  extract->add_option("candidates", candidates_dir, "directory written by detect")->required();
  extract->add_option("-o,--out", out, "features CSV")->required();

  auto* train = app.add_subcommand("train", "train a classifier on feature CSVs");
  train->add_option("features", features, "feature CSV files")->required();
  train->add_option("-m,--model", model_path, "model file to write")->required();
  train->add_option("--split", split, "part of the drop-one-out split to train on")
      ->check(CLI::IsMember({"train", "test", "all"}));

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a model, or compare descriptor fusions");
  std::string report_path;
  std::string report_csv;
  bool fusions = false;
  std::string eval_split = "test";
  evaluate->add_option("features", features, "feature CSV files")->required();
  evaluate->add_option("-m,--model", model_path, "model file");
  evaluate->add_option("-r,--report", report_path, "text report")->required();
  evaluate->add_option("--csv", report_csv, "CSV copy of the report (default: <report>.csv)");
  evaluate->add_option("--split", eval_split, "part of the drop-one-out split to evaluate on")
      ->check(CLI::IsMember({"train", "test", "all"}));
  evaluate->add_flag("--compare-fusions", fusions, "train every classifier on MD, MD+RD and MD+RD+FD");

  auto* predict = app.add_subcommand("predict", "label feature rows with a trained model");
  predict->add_option("features", features, "feature CSV files")->required();
  predict->add_option("-m,--model", model_path, "model file")->required();
  predict->add_option("-o,--out", out, "predictions CSV")->required();

  auto* sweep = app.add_subcommand("sweep", "accuracy over a grid of Fourier counts or train fractions");
  std::string axis;
  std::vector<double> grid;
  sweep->add_option("features", features, "feature CSV files")->required();
  sweep->add_option("--axis", axis, "fourier_K or train_fraction")
      ->required()
      ->check(CLI::IsMember({"fourier_K", "train_fraction"}));
  sweep->add_option("--grid", grid, "grid values")->required()->delimiter(',');
  sweep->add_option("-o,--out", out, "sweep CSV")->required();

  auto* synth = app.add_subcommand("synth", "generate the synthetic three-class corpus");
  int n_per_class = 200;
  std::uint64_t seed = 42;
  synth->add_option("-n,--n", n_per_class, "apples per class")->required();
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("-o,--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  ConfigHandle config;
  try {
    check(sc_config_new(&config.ptr));
    sc_config_set_log(config.ptr, log_to_stderr, nullptr);
    if (!config_path.empty()) check(sc_config_load(config.ptr, config_path.c_str()));
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "stemcalyx: error: --set expects key=value, got '" << kv << "'\n";
        return 1;
      }
      check(sc_config_set(config.ptr, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    const auto files = c_strings(features);

    if (*detect) {
      size_t count = 0;
      if (!manifest_path.empty()) {
        check(sc_detect_manifest(config.ptr, manifest_path.c_str(), out.c_str(), &count));
      } else if (!image_path.empty()) {
        check(sc_detect_file(config.ptr, image_path.c_str(), out.c_str(), &count));
      } else {
        std::cerr << "stemcalyx: error: detect needs an image or --manifest\n";
        return 1;
      }
      std::cout << count << " candidate(s)\n";
    } else if (*extract) {
      size_t rows = 0, skipped = 0;
      check(sc_extract(config.ptr, candidates_dir.c_str(), out.c_str(), &rows, &skipped));
      std::cout << rows << " row(s), " << skipped << " skipped\n";
    } else if (*train) {
      ModelHandle model;
      check(sc_model_train(config.ptr, files.data(), files.size(), split_of(split), model_path.c_str(), &model.ptr));
    } else if (*evaluate) {
      if (report_csv.empty()) report_csv = report_path + ".csv";
      if (fusions) {
        check(sc_compare_fusions(config.ptr, files.data(), files.size(), report_path.c_str(), report_csv.c_str(),
                                 nullptr));
      } else {
        if (model_path.empty()) {
          std::cerr << "stemcalyx: error: evaluate needs --model unless --compare-fusions is given\n";
          return 1;
        }
        ModelHandle model;
        check(sc_model_load(model_path.c_str(), &model.ptr));
        check(sc_model_evaluate(model.ptr, config.ptr, files.data(), files.size(), split_of(eval_split),
                                report_path.c_str(), report_csv.c_str(), nullptr));
      }
      print_file(report_path);
    } else if (*predict) {
      ModelHandle model;
      size_t rows = 0;
      check(sc_model_load(model_path.c_str(), &model.ptr));
      check(sc_model_predict(model.ptr, config.ptr, files.data(), files.size(), out.c_str(), &rows));
      std::cout << rows << " prediction(s)\n";
    } else if (*sweep) {
      const sc_sweep_axis which = axis == "fourier_K" ? SC_SWEEP_FOURIER_K : SC_SWEEP_TRAIN_FRACTION;
      check(sc_sweep(config.ptr, files.data(), files.size(), which, grid.data(), grid.size(), out.c_str()));
    } else if (*synth) {
      size_t scenes = 0;
      check(sc_synth(config.ptr, n_per_class, seed, out.c_str(), &scenes));
      std::cout << scenes << " scene(s)\n";
    }
  } catch (const Failure& f) {
    std::cerr << "stemcalyx: error: " << sc_last_error() << '\n';
    return exit_code(f.status);
  }
  return 0;
}
