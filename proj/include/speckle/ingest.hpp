#pragma once

#include <png.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "speckle/error.hpp"
#include "speckle/sample.hpp"

namespace speckle::ingest {

/// Grayscale image as row-major doubles. `depth` is the largest representable
/// pixel value (255, 65535, the PGM maxval, or the observed maximum for CSV).
struct PixelMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  double depth = 0.0;

  [[nodiscard]] double at(std::size_t row, std::size_t col) const { return data[row * cols + col]; }
};

enum class ImageFormat { grayscale_png_8, grayscale_png_16, pgm, csv_matrix };

/// Rectangular pixel region: column x0, row y0, width columns, height rows.
struct RoiSpec {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t width = 1;
  std::size_t height = 1;

  [[nodiscard]] std::size_t area() const noexcept { return width * height; }
  friend bool operator==(const RoiSpec&, const RoiSpec&) = default;
};

inline constexpr double kDefaultDynamicRange = 2.0;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// libpng reports errors with longjmp, so the decode runs in a frame that holds
// no C++ objects with destructors.
struct PngRaw {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  unsigned char* data = nullptr;
  std::size_t rowbytes = 0;
  const char* error = nullptr;
};

inline void png_error_jump(png_structp png, png_const_charp) { png_longjmp(png, 1); }
inline void png_warning_ignore(png_structp, png_const_charp) {}

inline void png_read_raw(std::FILE* fp, PngRaw* out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_jump, png_warning_ignore);
  if (png == nullptr) {
    out->error = "corrupt image";
    return;
  }
  png_infop info = png_create_info_struct(png);
  png_bytep* volatile rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    std::free(rows);
    std::free(out->data);
    out->data = nullptr;
    png_destroy_read_struct(&png, &info, nullptr);
    if (out->error == nullptr) out->error = "corrupt image";
    return;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    out->error = "non-grayscale input";
    png_longjmp(png, 1);
  }
  out->bit_depth = png_get_bit_depth(png, info);
  if (out->bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->rowbytes = png_get_rowbytes(png, info);
  out->data = static_cast<unsigned char*>(std::malloc(out->rowbytes * out->height));
  rows = static_cast<png_bytep*>(std::malloc(sizeof(png_bytep) * out->height));
  if (out->data == nullptr || rows == nullptr) png_longjmp(png, 1);
  for (png_uint_32 r = 0; r < out->height; ++r) rows[r] = out->data + r * out->rowbytes;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  std::free(rows);
  png_destroy_read_struct(&png, &info, nullptr);
}

inline bool png_write_raw(std::FILE* fp, png_uint_32 width, png_uint_32 height, int bit_depth,
                          const unsigned char* data) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_jump, png_warning_ignore);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t rowbytes = static_cast<std::size_t>(width) * (bit_depth / 8);
  for (png_uint_32 r = 0; r < height; ++r) {
    png_write_row(png, const_cast<png_bytep>(data + r * rowbytes));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};

inline PixelMatrix load_png(const std::string& path, std::optional<int> expected_depth) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError("cannot read file: " + path);
  unsigned char signature[8] = {};
  if (std::fread(signature, 1, 8, fp.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw DataError("corrupt image: " + path);
  }
  std::rewind(fp.get());
  PngRaw raw;
  png_read_raw(fp.get(), &raw);
  std::unique_ptr<unsigned char, decltype(&std::free)> owned(raw.data, &std::free);
  if (raw.error != nullptr) throw DataError(std::string(raw.error) + ": " + path);
  const int depth_bits = raw.bit_depth == 16 ? 16 : 8;
  if (expected_depth && *expected_depth != depth_bits) {
    throw DataError("bit depth mismatch: expected " + std::to_string(*expected_depth) + "-bit PNG, found " +
                    std::to_string(depth_bits) + "-bit: " + path);
  }
  PixelMatrix m;
  m.rows = raw.height;
  m.cols = raw.width;
  m.depth = depth_bits == 16 ? 65535.0 : 255.0;
  m.data.resize(m.rows * m.cols);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const unsigned char* row = raw.data + r * raw.rowbytes;
    for (std::size_t c = 0; c < m.cols; ++c) {
      m.data[r * m.cols + c] = depth_bits == 16 ? static_cast<double>((row[2 * c] << 8) | row[2 * c + 1])
                                                : static_cast<double>(row[c]);
    }
  }
  return m;
}

// Netpbm token reader; skips whitespace and '#' comments.
class PnmTokens {
 public:
  PnmTokens(const std::string& bytes, std::size_t start) : bytes_(bytes), pos_(start) {}

  unsigned long next_number() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned long value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
      if (value > 0xFFFFFFFFul) throw DataError("corrupt image");
      ++pos_;
    }
    if (start == pos_) throw DataError("corrupt image");
    return value;
  }

  std::size_t position() const noexcept { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_;
};

inline PixelMatrix load_pgm(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 2 || bytes[0] != 'P') throw DataError("corrupt image: " + path);
  const char kind = bytes[1];
  if (kind == '1' || kind == '3' || kind == '4' || kind == '6') throw DataError("non-grayscale input: " + path);
  if (kind != '2' && kind != '5') throw DataError("corrupt image: " + path);

  try {
    PnmTokens tokens(bytes, 2);
    PixelMatrix m;
    m.cols = tokens.next_number();
    m.rows = tokens.next_number();
    const unsigned long maxval = tokens.next_number();
    if (m.cols == 0 || m.rows == 0 || maxval == 0 || maxval > 65535) throw DataError("corrupt image");
    m.depth = static_cast<double>(maxval);
    const std::size_t count = m.rows * m.cols;
    m.data.resize(count);
    if (kind == '2') {
      for (std::size_t i = 0; i < count; ++i) {
        const unsigned long v = tokens.next_number();
        if (v > maxval) throw DataError("corrupt image");
        m.data[i] = static_cast<double>(v);
      }
    } else {
      // Exactly one whitespace byte separates the header from the raster.
      const std::size_t start = tokens.position() + 1;
      const std::size_t width = maxval > 255 ? 2 : 1;
      if (start > bytes.size() || bytes.size() - start < count * width) throw DataError("corrupt image");
      const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + start);
      for (std::size_t i = 0; i < count; ++i) {
        const unsigned v = width == 2 ? (raster[2 * i] << 8) | raster[2 * i + 1] : raster[i];
        if (v > maxval) throw DataError("corrupt image");
        m.data[i] = static_cast<double>(v);
      }
    }
    return m;
  } catch (const DataError&) {
    throw DataError("corrupt image: " + path);
  }
}

inline PixelMatrix load_csv_matrix(const std::string& path) {
  const std::string text = read_file(path);
  PixelMatrix m;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (m.rows == 0) {
      m.cols = cells.size();
    } else if (cells.size() != m.cols) {
      throw DataError("dimension mismatch at line " + std::to_string(line_no) + " of " + path);
    }
    for (auto cell : cells) {
      const auto v = parse_double(cell);
      if (!v || !std::isfinite(*v) || *v < 0.0) {
        throw DataError("invalid pixel value '" + std::string(trim(cell)) + "' at line " + std::to_string(line_no) +
                        " of " + path);
      }
      m.data.push_back(*v);
    }
    ++m.rows;
  }
  if (m.rows == 0) throw DataError("empty matrix: " + path);
  m.depth = *std::max_element(m.data.begin(), m.data.end());
  return m;
}

}  // namespace detail

inline ImageFormat parse_image_format(std::string_view name) {
  if (name == "grayscale-png-8") return ImageFormat::grayscale_png_8;
  if (name == "grayscale-png-16") return ImageFormat::grayscale_png_16;
  if (name == "pgm") return ImageFormat::pgm;
  if (name == "csv-matrix") return ImageFormat::csv_matrix;
  throw InvalidArgument("unknown image format '" + std::string(name) +
                        "' (expected grayscale-png-8, grayscale-png-16, pgm or csv-matrix)");
}

/// Loads a grayscale image. Without a declared format, PNG files of either bit
/// depth are accepted and the format is inferred from the file contents.
inline PixelMatrix load_image(const std::string& path, std::optional<ImageFormat> format = std::nullopt) {
  if (!format) {
    const std::string bytes = detail::read_file(path);
    if (bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0) {
      return detail::load_png(path, std::nullopt);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7') return detail::load_pgm(path);
    return detail::load_csv_matrix(path);
  }
  switch (*format) {
    case ImageFormat::grayscale_png_8:
      return detail::load_png(path, 8);
    case ImageFormat::grayscale_png_16:
      return detail::load_png(path, 16);
    case ImageFormat::pgm:
      return detail::load_pgm(path);
    case ImageFormat::csv_matrix:
      return detail::load_csv_matrix(path);
  }
  throw InvalidArgument("unknown image format");
}

/// Writes an 8- or 16-bit grayscale PNG (values are rounded and clamped).
inline void save_png(const std::string& path, const PixelMatrix& m, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("PNG bit depth must be 8 or 16");
  const double top = bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<unsigned char> raster(m.data.size() * (bit_depth / 8));
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    const auto v = static_cast<unsigned>(std::clamp(std::round(m.data[i]), 0.0, top));
    if (bit_depth == 16) {
      raster[2 * i] = static_cast<unsigned char>(v >> 8);
      raster[2 * i + 1] = static_cast<unsigned char>(v & 0xFF);
    } else {
      raster[i] = static_cast<unsigned char>(v);
    }
  }
  std::unique_ptr<std::FILE, detail::FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp || !detail::png_write_raw(fp.get(), static_cast<png_uint_32>(m.cols), static_cast<png_uint_32>(m.rows),
                                    bit_depth, raster.data())) {
    throw DataError("cannot write PNG: " + path);
  }
}

/// Writes a binary PGM; maxval is the matrix depth rounded (1..65535).
inline void save_pgm(const std::string& path, const PixelMatrix& m) {
  const auto maxval = static_cast<unsigned>(std::clamp(std::round(m.depth), 1.0, 65535.0));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write PGM: " + path);
  out << "P5\n" << m.cols << ' ' << m.rows << '\n' << maxval << '\n';
  for (double p : m.data) {
    const auto v = static_cast<unsigned>(std::clamp(std::round(p), 0.0, static_cast<double>(maxval)));
    if (maxval > 255) out.put(static_cast<char>(v >> 8));
    out.put(static_cast<char>(v & 0xFF));
  }
  if (!out) throw DataError("cannot write PGM: " + path);
}

/// Undoes a decade-exponential display mapping: A = 10^((p / depth) * decades).
inline PixelMatrix inverse_log_transform(const PixelMatrix& pixels, double dynamic_range_decades = kDefaultDynamicRange) {
  if (!(dynamic_range_decades > 0.0) || !std::isfinite(dynamic_range_decades)) {
    throw InvalidArgument("dynamic range must be a positive number of decades");
  }
  if (!(pixels.depth > 0.0)) throw DataError("image depth must be positive (all-zero image?)");
  PixelMatrix out = pixels;
  const double slope = dynamic_range_decades / pixels.depth;
  for (double& p : out.data) {
    if (p < 0.0) throw DataError("negative pixel value");
    p = std::pow(10.0, p * slope);
  }
  out.depth = std::pow(10.0, dynamic_range_decades);
  return out;
}

/// Forward display mapping used for synthetic images: the largest amplitude maps
/// to `depth`, amplitudes `decades` below it map to 0, quantized to integers.
inline PixelMatrix log_compress(const PixelMatrix& amplitudes, double dynamic_range_decades, double depth) {
  if (!(dynamic_range_decades > 0.0)) throw InvalidArgument("dynamic range must be positive");
  if (!(depth >= 1.0)) throw InvalidArgument("depth must be >= 1");
  const double top = *std::max_element(amplitudes.data.begin(), amplitudes.data.end());
  if (!(top > 0.0)) throw InvalidArgument("cannot log-compress an all-zero image");
  PixelMatrix out = amplitudes;
  out.depth = depth;
  for (double& a : out.data) {
    const double level = a > 0.0 ? depth * (1.0 + std::log10(a / top) / dynamic_range_decades) : 0.0;
    a = std::round(std::clamp(level, 0.0, depth));
  }
  return out;
}

/// Parses "x0,y0,width,height" (commas, semicolons, colons or spaces).
inline RoiSpec parse_roi(std::string_view text) {
  std::string normalized(text);
  std::replace_if(normalized.begin(), normalized.end(), [](char ch) { return ch == ';' || ch == ':' || ch == ' '; }, ',');
  std::vector<std::size_t> parts;
  for (auto piece : detail::split(normalized, ',')) {
    piece = detail::trim(piece);
    if (piece.empty()) continue;
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (ec != std::errc() || ptr != piece.data() + piece.size()) {
      throw InvalidArgument("invalid ROI '" + std::string(text) + "' (expected x0,y0,width,height)");
    }
    parts.push_back(v);
  }
  if (parts.size() != 4) throw InvalidArgument("invalid ROI '" + std::string(text) + "' (expected x0,y0,width,height)");
  RoiSpec roi{parts[0], parts[1], parts[2], parts[3]};
  if (roi.width < 1 || roi.height < 1) throw InvalidArgument("ROI width and height must be >= 1");
  return roi;
}

inline std::string format_roi(const RoiSpec& roi) {
  return std::to_string(roi.x0) + "," + std::to_string(roi.y0) + "," + std::to_string(roi.width) + "," +
         std::to_string(roi.height);
}

/// Row-major copy of the pixels inside `roi`.
inline AmplitudeSample extract_roi(const PixelMatrix& pixels, const RoiSpec& roi) {
  if (roi.width < 1 || roi.height < 1 || roi.x0 >= pixels.cols || roi.y0 >= pixels.rows ||
      roi.width > pixels.cols - roi.x0 || roi.height > pixels.rows - roi.y0) {
    throw DataError("ROI " + format_roi(roi) + " lies outside the " + std::to_string(pixels.cols) + "x" +
                    std::to_string(pixels.rows) + " image");
  }
  std::vector<double> values;
  values.reserve(roi.area());
  for (std::size_t r = roi.y0; r < roi.y0 + roi.height; ++r) {
    const auto row = pixels.data.begin() + static_cast<std::ptrdiff_t>(r * pixels.cols + roi.x0);
    values.insert(values.end(), row, row + static_cast<std::ptrdiff_t>(roi.width));
  }
  return AmplitudeSample(std::move(values));
}

/// Divides every value by the sample RMS so that the mean square becomes one.
inline AmplitudeSample normalize_rms(const AmplitudeSample& sample) {
  if (sample.empty()) throw InvalidArgument("cannot normalize an empty sample");
  const double rms = std::sqrt(speckle::detail::mean_square(sample.values()));
  if (!(rms > 0.0)) throw InvalidArgument("cannot normalize an all-zero sample");
  std::vector<double> out(sample.values().begin(), sample.values().end());
  for (double& v : out) v /= rms;
  return AmplitudeSample(std::move(out), true);
}

/// Single-column amplitude CSV. A non-numeric first line is treated as a header.
inline AmplitudeSample read_amplitude_csv(const std::string& path) {
  const std::string text = detail::read_file(path);
  std::vector<double> values;
  std::size_t line_no = 0;
  for (std::string_view line : detail::split(text, '\n')) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto v = detail::parse_double(line);
    if (!v) {
      if (line_no == 1) continue;
      throw DataError("invalid amplitude '" + std::string(line) + "' at line " + std::to_string(line_no) + " of " +
                      path);
    }
    if (!std::isfinite(*v) || *v < 0.0) {
      throw DataError("amplitude must be finite and nonnegative at line " + std::to_string(line_no) + " of " + path);
    }
    values.push_back(*v);
  }
  if (values.empty()) throw DataError("no amplitudes in " + path);
  return AmplitudeSample(std::move(values));
}

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline void write_amplitude_csv(std::ostream& out, const AmplitudeSample& sample) {
  out << "amplitude\n";
  for (double v : sample.values()) out << format_double(v) << '\n';
}

}  // namespace speckle::ingest
