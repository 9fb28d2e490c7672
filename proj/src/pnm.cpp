#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <string>

#include "stemcalyx/error.hpp"
#include "stemcalyx/image.hpp"

namespace stemcalyx {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long integer(const char* field) {
    skip_space_and_comments();
    const auto* begin = reinterpret_cast<const char*>(bytes_.data()) + pos_;
    const auto* end = reinterpret_cast<const char*>(bytes_.data()) + bytes_.size();
    long value = 0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr == begin) {
      throw Error(ErrorKind::Format, std::string("malformed PNM header: bad ") + field);
    }
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  std::size_t position() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_payload(HeaderReader& reader, std::span<const std::uint8_t> bytes,
                                       std::size_t count, bool ascii) {
  std::vector<std::uint8_t> out(count);
  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) {
      long v = 0;
      try {
        v = reader.integer("payload");
      } catch (const Error&) {
        throw Error(ErrorKind::Format, "truncated PNM payload: expected " + std::to_string(count) +
                                           " samples, got " + std::to_string(i));
      }
      if (v < 0 || v > 255) throw Error(ErrorKind::Format, "PNM payload sample out of range");
      out[i] = static_cast<std::uint8_t>(v);
    }
    return out;
  }
  // Exactly one whitespace byte separates maxval from binary data.
  std::size_t pos = reader.position();
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorKind::Format, "malformed PNM header: missing separator after maxval");
  }
  ++pos;
  if (bytes.size() - pos < count) {
    throw Error(ErrorKind::Format, "truncated PNM payload: expected " + std::to_string(count) +
                                       " bytes, got " + std::to_string(bytes.size() - pos));
  }
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), count, out.begin());
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::vector<std::uint8_t> encode(const char* magic, int width, int height,
                                 std::span<const std::uint8_t> payload) {
  const std::string header = std::string(magic) + "\n" + std::to_string(width) + " " +
                             std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  return bytes;
}

}  // namespace

AnyImage decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw Error(ErrorKind::Format, "malformed PNM header: bad magic");
  }
  const char kind = static_cast<char>(bytes[1]);
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
    throw Error(ErrorKind::Format, std::string("malformed PNM header: unsupported magic P") + kind);
  }
  HeaderReader reader(bytes);
  reader.advance(2);
  const long width = reader.integer("width");
  const long height = reader.integer("height");
  if (width < 1 || height < 1 || width > (1L << 20) || height > (1L << 20)) {
    throw Error(ErrorKind::Format, "PNM dimension error: width and height must be >= 1, got " +
                                       std::to_string(width) + "x" + std::to_string(height));
  }
  const long maxval = reader.integer("maxval");
  if (maxval != 255) {
    throw Error(ErrorKind::Format, "unsupported PNM maxval " + std::to_string(maxval) +
                                       " (only 255)");
  }
  const bool color = kind == '3' || kind == '6';
  const bool ascii = kind == '2' || kind == '3';
  const std::size_t count =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * (color ? 3 : 1);
  auto payload = read_payload(reader, bytes, count, ascii);
  const int w = static_cast<int>(width);
  const int h = static_cast<int>(height);
  if (color) return ColorImage(w, h, std::move(payload));
  return GrayImage(w, h, std::move(payload));
}

AnyImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_pnm(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

GrayImage load_gray(const std::filesystem::path& path) {
  auto image = load_image(path);
  if (auto* gray = std::get_if<GrayImage>(&image)) return std::move(*gray);
  return to_grayscale(std::get<ColorImage>(image));
}

std::vector<std::uint8_t> encode_pnm(const GrayImage& image) {
  return encode("P5", image.width(), image.height(), image.data());
}

std::vector<std::uint8_t> encode_pnm(const ColorImage& image) {
  return encode("P6", image.width(), image.height(), image.data());
}

void save_image(const GrayImage& image, const std::filesystem::path& path) {
  write_file(path, encode_pnm(image));
}

void save_image(const ColorImage& image, const std::filesystem::path& path) {
  write_file(path, encode_pnm(image));
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  save_image(mask_to_gray(mask), path);
}

BinaryMask load_mask(const std::filesystem::path& path) { return binarize(load_gray(path)); }

}  // namespace stemcalyx
