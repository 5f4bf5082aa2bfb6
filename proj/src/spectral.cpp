#include "tvdecomp/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace tvdecomp {

namespace {

// FFTW planning and plan destruction are not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : ptr(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (ptr == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* ptr;
};

}  // namespace

struct Dft2::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
  std::size_t n = 0;

  Plans(int h, int w) : n(static_cast<std::size_t>(h) * static_cast<std::size_t>(w)) {
    FftwBuffer in(n), out(n);
    std::lock_guard lock(planner_mutex());
    fwd = fftw_plan_dft_2d(h, w, in.ptr, out.ptr, FFTW_FORWARD, FFTW_ESTIMATE);
    inv = fftw_plan_dft_2d(h, w, in.ptr, out.ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (fwd == nullptr || inv == nullptr) throw std::runtime_error("FFTW planning failed");
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;

  Spectrum run(fftw_plan plan, const Spectrum& data) const {
    FftwBuffer in(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
      in.ptr[i][0] = data[i].real();
      in.ptr[i][1] = data[i].imag();
    }
    fftw_execute_dft(plan, in.ptr, out.ptr);
    Spectrum result(n);
    for (std::size_t i = 0; i < n; ++i) result[i] = {out.ptr[i][0], out.ptr[i][1]};
    return result;
  }
};

Dft2::Dft2(int height, int width)
    : height_(height), width_(width), plans_(std::make_shared<Plans>(height, width)) {}

Spectrum Dft2::forward(const Image& img) const {
  if (img.height() != height_ || img.width() != width_) {
    throw DimensionError("DFT size mismatch");
  }
  Spectrum data(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) data[i] = img[i];
  return plans_->run(plans_->fwd, data);
}

Spectrum Dft2::forward(const Spectrum& data) const {
  if (data.size() != plans_->n) throw DimensionError("DFT size mismatch");
  return plans_->run(plans_->fwd, data);
}

Spectrum Dft2::inverse_complex(const Spectrum& spec) const {
  if (spec.size() != plans_->n) throw DimensionError("DFT size mismatch");
  Spectrum out = plans_->run(plans_->inv, spec);
  const double scale = 1.0 / static_cast<double>(plans_->n);
  for (auto& c : out) c *= scale;
  return out;
}

Image Dft2::inverse(const Spectrum& spec) const {
  Spectrum out = inverse_complex(spec);
  Image img(height_, width_);
  for (std::size_t i = 0; i < out.size(); ++i) img[i] = out[i].real();
  return img;
}

std::shared_ptr<const Dft2> dft_for(int height, int width) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const Dft2>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{height, width}];
  if (!slot) slot = std::make_shared<const Dft2>(height, width);
  return slot;
}

GradientSymbols periodic_gradient_symbols(int height, int width) {
  GradientSymbols s;
  const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  s.horizontal.resize(n);
  s.vertical.resize(n);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int k = 0; k < height; ++k) {
    const auto dv = std::polar(1.0, two_pi * k / height) - 1.0;
    for (int l = 0; l < width; ++l) {
      const std::size_t i = static_cast<std::size_t>(k) * width + l;
      s.horizontal[i] = std::polar(1.0, two_pi * l / width) - 1.0;
      s.vertical[i] = dv;
    }
  }
  return s;
}

std::vector<double> periodic_laplacian_symbol(int height, int width) {
  std::vector<double> sym(static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
  for (int k = 0; k < height; ++k) {
    const double sv = std::sin(std::numbers::pi * k / height);
    for (int l = 0; l < width; ++l) {
      const double sh = std::sin(std::numbers::pi * l / width);
      sym[static_cast<std::size_t>(k) * width + l] = 4.0 * (sv * sv + sh * sh);
    }
  }
  return sym;
}

}  // namespace tvdecomp
