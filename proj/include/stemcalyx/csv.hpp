#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stemcalyx/classify.hpp"
#include "stemcalyx/descriptors.hpp"

namespace stemcalyx {

// Minimal comma-separated reader: no quoting, fields may not contain commas.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// Shortest decimal that parses back to the same double.
std::string format_real(double v);
double parse_real(const std::string& text);

// One row per candidate:
//   id,label,apple_id,view_id,m_1..m_A,f_1..f_K,r_1..r_R
// The header fixes the block lengths; label is empty when unknown.
struct FeatureRow {
  std::string id;
  std::optional<ClassLabel> label;
  int apple_id = -1;
  int view_id = -1;
  FeatureVector features;
};

std::string features_header(const std::array<std::size_t, 3>& shape);
std::string features_csv(const std::vector<FeatureRow>& rows);
void write_features(const std::vector<FeatureRow>& rows, const std::filesystem::path& path);
std::vector<FeatureRow> read_features(const std::filesystem::path& path);

// Rows with a label, in file order. `unlabeled`, when given, receives the
// number of rows dropped for lacking one.
Dataset to_dataset(const std::vector<FeatureRow>& rows, std::size_t* unlabeled = nullptr);

// Detection listing written next to the mask crops.
struct CandidateRow {
  std::string id;
  std::string scene;
  int index = 0;
  int apple_id = -1;
  int view_id = -1;
  std::optional<ClassLabel> label;
  Box bbox;
  std::size_t area = 0;
  std::string mask_path;  // relative to the listing's directory
  std::string gray_path;
};

inline constexpr const char* kCandidatesHeader = "id,scene,candidate,apple_id,view_id,label,x,y,width,height,area,mask,gray";

void write_candidates(const std::vector<CandidateRow>& rows, const std::filesystem::path& path);
std::vector<CandidateRow> read_candidates(const std::filesystem::path& path);

}  // namespace stemcalyx
