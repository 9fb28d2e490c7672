#include "stemcalyx/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "stemcalyx/error.hpp"

namespace stemcalyx {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int parse_int(const std::string& text, const std::string& where) {
  int v = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::Format, where + ": expected an integer, got '" + text + "'");
  }
  return v;
}

std::optional<ClassLabel> parse_optional_label(const std::string& text, const std::string& where) {
  if (text.empty()) return std::nullopt;
  const auto label = parse_class_label(text);
  if (!label) throw Error(ErrorKind::Format, where + ": unknown class label '" + text + "'");
  return label;
}

std::string where(const std::filesystem::path& path, std::size_t row) {
  return path.string() + " line " + std::to_string(row + 1);
}

}  // namespace

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    rows.push_back(split_line(line));
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  return rows;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed while writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string format_real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_real(const std::string& text) {
  double v = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::Format, "expected a number, got '" + text + "'");
  }
  return v;
}

std::string features_header(const std::array<std::size_t, 3>& shape) {
  std::string out = "id,label,apple_id,view_id";
  for (std::size_t b = 0; b < 3; ++b) {
    const char* prefix = block_prefix(static_cast<BlockKind>(b));
    for (std::size_t i = 1; i <= shape[b]; ++i) out += std::string(",") + prefix + "_" + std::to_string(i);
  }
  return out;
}

std::string features_csv(const std::vector<FeatureRow>& rows) {
  const auto shape = rows.empty() ? std::array<std::size_t, 3>{0, 0, 0} : rows.front().features.shape();
  std::string out = features_header(shape) + "\n";
  for (const FeatureRow& r : rows) {
    if (r.features.shape() != shape) {
      throw Error(ErrorKind::Parameter, "feature row '" + r.id + "' has a different block shape");
    }
    out += r.id + "," + (r.label ? to_string(*r.label) : "") + "," + std::to_string(r.apple_id) + "," +
           std::to_string(r.view_id);
    for (const FeatureBlock& block : r.features.blocks)
      for (double v : block.values) out += "," + format_real(v);
    out += "\n";
  }
  return out;
}

void write_features(const std::vector<FeatureRow>& rows, const std::filesystem::path& path) {
  write_text_file(path, features_csv(rows));
}

std::vector<FeatureRow> read_features(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  if (table.empty()) throw Error(ErrorKind::Format, path.string() + ": missing header");
  const auto& header = table.front();
  if (header.size() < 4 || header[0] != "id" || header[1] != "label" || header[2] != "apple_id" ||
      header[3] != "view_id") {
    throw Error(ErrorKind::Format, path.string() + ": header must start with id,label,apple_id,view_id");
  }
  std::array<std::size_t, 3> shape{0, 0, 0};
  std::size_t block = 0;
  for (std::size_t c = 4; c < header.size(); ++c) {
    // Columns run m_1.., f_1.., r_1.. with each block contiguous.
    std::size_t b = block;
    while (b < 3 && header[c].rfind(std::string(block_prefix(static_cast<BlockKind>(b))) + "_", 0) != 0) ++b;
    if (b == 3) throw Error(ErrorKind::Format, path.string() + ": unexpected column '" + header[c] + "'");
    block = b;
    ++shape[b];
    if (header[c] != std::string(block_prefix(static_cast<BlockKind>(b))) + "_" + std::to_string(shape[b])) {
      throw Error(ErrorKind::Format, path.string() + ": column '" + header[c] + "' is out of order");
    }
  }
  std::vector<FeatureRow> rows;
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& f = table[r];
    if (f.empty()) continue;
    const std::string at = where(path, r);
    if (f.size() != header.size()) {
      throw Error(ErrorKind::Format, at + ": expected " + std::to_string(header.size()) + " fields, found " +
                                         std::to_string(f.size()));
    }
    FeatureRow row;
    row.id = f[0];
    row.label = parse_optional_label(f[1], at);
    row.apple_id = parse_int(f[2], at);
    row.view_id = parse_int(f[3], at);
    std::size_t c = 4;
    for (std::size_t b = 0; b < 3; ++b) {
      auto& values = row.features.blocks[b].values;
      values.resize(shape[b]);
      for (double& v : values) {
        try {
          v = parse_real(f[c]);
        } catch (const Error&) {
          throw Error(ErrorKind::Format, at + ": column '" + header[c] + "' is not a number");
        }
        ++c;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Dataset to_dataset(const std::vector<FeatureRow>& rows, std::size_t* unlabeled) {
  Dataset data;
  std::size_t dropped = 0;
  for (const FeatureRow& r : rows) {
    if (!r.label) {
      ++dropped;
      continue;
    }
    data.samples.push_back({r.features, *r.label, r.apple_id, r.view_id});
  }
  if (unlabeled) *unlabeled = dropped;
  return data;
}

void write_candidates(const std::vector<CandidateRow>& rows, const std::filesystem::path& path) {
  std::string out = std::string(kCandidatesHeader) + "\n";
  for (const CandidateRow& r : rows) {
    out += r.id + "," + r.scene + "," + std::to_string(r.index) + "," + std::to_string(r.apple_id) + "," +
           std::to_string(r.view_id) + "," + (r.label ? to_string(*r.label) : "") + "," + std::to_string(r.bbox.x) +
           "," + std::to_string(r.bbox.y) + "," + std::to_string(r.bbox.width) + "," +
           std::to_string(r.bbox.height) + "," + std::to_string(r.area) + "," + r.mask_path + "," + r.gray_path +
           "\n";
  }
  write_text_file(path, out);
}

std::vector<CandidateRow> read_candidates(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  if (table.empty()) throw Error(ErrorKind::Format, path.string() + ": missing header");
  if (split_line(kCandidatesHeader) != table.front()) {
    throw Error(ErrorKind::Format, path.string() + ": unexpected candidate listing header");
  }
  std::vector<CandidateRow> rows;
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& f = table[r];
    if (f.empty()) continue;
    const std::string at = where(path, r);
    if (f.size() != 13) throw Error(ErrorKind::Format, at + ": expected 13 fields");
    CandidateRow row;
    row.id = f[0];
    row.scene = f[1];
    row.index = parse_int(f[2], at);
    row.apple_id = parse_int(f[3], at);
    row.view_id = parse_int(f[4], at);
    row.label = parse_optional_label(f[5], at);
    row.bbox = {parse_int(f[6], at), parse_int(f[7], at), parse_int(f[8], at), parse_int(f[9], at)};
    const int area = parse_int(f[10], at);
    if (area < 0) throw Error(ErrorKind::Format, at + ": negative area");
    row.area = static_cast<std::size_t>(area);
    row.mask_path = f[11];
    row.gray_path = f[12];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace stemcalyx
