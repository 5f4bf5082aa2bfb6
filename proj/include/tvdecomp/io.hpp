#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvdecomp/image.hpp"

namespace tvdecomp {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Reads binary PGM (P5), binary PPM (P6) or 8-bit PNG (gray/RGB; alpha dropped).
/// Samples are divided by the file's maxval.
MultiImage read_image(const std::string& path);

/// Clamps to [0,1], quantizes with round-half-up to 8 bits, and writes by
/// extension: .pgm/.ppm/.pnm (P5 for one channel, P6 for three) or .png.
void write_image(const MultiImage& img, const std::string& path);
void write_image(const Image& img, const std::string& path);

/// floor(clamp(v) * 255 + 0.5)
std::uint8_t quantize_unit(double v);

/// One row of the per-iteration CSV trace.
struct IterTrace {
  int iter = 0;
  double r_p = 0.0;
  double r_d = 0.0;
  double r_c = 0.0;
  double tol = 0.0;
  double objective = 0.0;
  std::optional<double> psnr;
  std::optional<double> corr;
};

inline constexpr const char* kTraceHeader = "iter,r_p,r_d,r_c,tol,objective,psnr,corr";

/// Formats a real with 9 significant digits (%.9g).
std::string format_real(double v);
std::string format_trace_row(const IterTrace& row);

void write_trace(const std::vector<IterTrace>& rows, const std::string& path);
std::vector<IterTrace> read_trace(const std::string& path);

}  // namespace tvdecomp
