#include "tvdecomp/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tvdecomp {

namespace {

std::string lower_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

// Netpbm header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in, const std::string& path) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {}
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw IoError(path + ": truncated netpbm header");
  return tok;
}

int header_int(std::istream& in, const std::string& path, const char* what) {
  const std::string tok = next_token(in, path);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError(path + ": bad netpbm " + what + " '" + tok + "'");
  }
}

MultiImage read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw IoError(path + ": unsupported format (only binary PGM P5 / PPM P6 netpbm files are read)");
  }
  const int channels = magic[1] == '5' ? 1 : 3;
  const int width = header_int(in, path, "width");
  const int height = header_int(in, path, "height");
  const int maxval = header_int(in, path, "maxval");
  if (maxval > 255) throw IoError(path + ": unsupported bit depth (maxval " + std::to_string(maxval) + " > 255)");
  // Exactly one whitespace byte separates the header from the raster; next_token consumed it.
  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  std::vector<std::uint8_t> raw(n);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw IoError(path + ": truncated raster (" + std::to_string(in.gcount()) + " of " + std::to_string(n) + " bytes)");
  }
  std::vector<Image> planes;
  for (int c = 0; c < channels; ++c) {
    std::vector<std::uint8_t> plane(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = raw[i * channels + c];
    planes.push_back(from_bytes(height, width, plane, maxval));
  }
  return MultiImage(std::move(planes));
}

MultiImage read_png(const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError(path + ": cannot read PNG (" + image.message + ")");
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw IoError(path + ": unsupported PNG bit depth (16-bit)");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  image.format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB) : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
  const int stride_channels = (color ? 3 : 1) + (alpha ? 1 : 0);
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError(path + ": PNG decode failed (" + msg + ")");
  }
  const int h = static_cast<int>(image.height), w = static_cast<int>(image.width);
  const int channels = color ? 3 : 1;
  std::vector<Image> planes;
  for (int c = 0; c < channels; ++c) {
    std::vector<std::uint8_t> plane(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = buffer[i * stride_channels + c];
    planes.push_back(from_bytes(h, w, plane, 255.0));
  }
  return MultiImage(std::move(planes));
}

std::vector<std::uint8_t> interleave(const MultiImage& img) {
  const std::size_t n = static_cast<std::size_t>(img.height()) * img.width();
  const std::size_t ch = img.channels();
  std::vector<std::uint8_t> raw(n * ch);
  for (std::size_t c = 0; c < ch; ++c) {
    require_finite(img[c], "image to write");
    for (std::size_t i = 0; i < n; ++i) raw[i * ch + c] = quantize_unit(img[c][i]);
  }
  return raw;
}

void write_pnm(const MultiImage& img, const std::string& path) {
  const auto raw = interleave(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << (img.channels() == 1 ? "P5" : "P6") << '\n' << img.width() << ' ' << img.height() << '\n' << 255 << '\n';
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("failed writing " + path);
}

void write_png(const MultiImage& img, const std::string& path) {
  const auto raw = interleave(img);
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, raw.data(), 0, nullptr)) {
    throw IoError("failed writing " + path + " (" + image.message + ")");
  }
}

}  // namespace

std::uint8_t quantize_unit(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
}

MultiImage read_image(const std::string& path) {
  const std::string ext = lower_extension(path);
  if (ext == "png") return read_png(path);
  if (ext == "pgm" || ext == "ppm" || ext == "pnm") return read_pnm(path);
  // Unknown extension: sniff the magic bytes.
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  unsigned char sig[8] = {0};
  in.read(reinterpret_cast<char*>(sig), 8);
  if (in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  if (sig[0] == 'P') return read_pnm(path);
  throw IoError(path + ": unsupported image format");
}

void write_image(const MultiImage& img, const std::string& path) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw IoError("only 1- or 3-channel images can be written, got " + std::to_string(img.channels()));
  }
  const std::string ext = lower_extension(path);
  if (ext == "png") {
    write_png(img, path);
  } else if (ext == "pgm" || ext == "ppm" || ext == "pnm") {
    write_pnm(img, path);
  } else {
    throw IoError(path + ": unsupported output extension '" + ext + "' (use .pgm, .ppm, .pnm or .png)");
  }
}

void write_image(const Image& img, const std::string& path) { write_image(MultiImage(img), path); }

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

// The objective column always carries a decimal point ("0.0", "12.5", "3.0").
std::string format_objective(double v) {
  std::string s = format_real(v);
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::optional<double> parse_optional(const std::string& field) {
  if (field.empty()) return std::nullopt;
  return std::stod(field);
}

}  // namespace

std::string format_trace_row(const IterTrace& row) {
  std::ostringstream os;
  os << row.iter << ',' << format_real(row.r_p) << ',' << format_real(row.r_d) << ',' << format_real(row.r_c)
     << ',' << format_real(row.tol) << ',' << format_objective(row.objective) << ','
     << (row.psnr ? format_real(*row.psnr) : "") << ',' << (row.corr ? format_real(*row.corr) : "");
  return os.str();
}

void write_trace(const std::vector<IterTrace>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << kTraceHeader << '\n';
  for (const auto& row : rows) out << format_trace_row(row) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

std::vector<IterTrace> read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw IoError(path + ": missing trace header");
  std::vector<IterTrace> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 8) throw IoError(path + ": trace row with " + std::to_string(f.size()) + " fields");
    IterTrace r;
    r.iter = std::stoi(f[0]);
    r.r_p = std::stod(f[1]);
    r.r_d = std::stod(f[2]);
    r.r_c = std::stod(f[3]);
    r.tol = std::stod(f[4]);
    r.objective = std::stod(f[5]);
    r.psnr = parse_optional(f[6]);
    r.corr = parse_optional(f[7]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace tvdecomp
