#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "tvdecomp/image.hpp"

namespace tvdecomp {

using Spectrum = std::vector<std::complex<double>>;

/// 2-D DFT of a fixed grid size. Unnormalized forward transform; the inverse
/// divides by height*width so inverse(forward(x)) == x.
///
/// Plans are created once under a process-wide lock and then executed on
/// per-call buffers, so a single instance may be shared between threads.
class Dft2 {
public:
  Dft2(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }

  Spectrum forward(const Image& img) const;
  Spectrum forward(const Spectrum& data) const;
  Spectrum inverse_complex(const Spectrum& spec) const;
  /// Real part of the inverse transform.
  Image inverse(const Spectrum& spec) const;

private:
  struct Plans;
  int height_;
  int width_;
  std::shared_ptr<const Plans> plans_;
};

/// Shared transform for a grid size (cached).
std::shared_ptr<const Dft2> dft_for(int height, int width);

/// DFT symbols of the periodic forward differences: horizontal (g1) and vertical (g2).
struct GradientSymbols {
  Spectrum horizontal;
  Spectrum vertical;
};
GradientSymbols periodic_gradient_symbols(int height, int width);

/// |d1|^2 + |d2|^2, the symbol of grad^T grad (= -div grad) under periodic boundaries.
std::vector<double> periodic_laplacian_symbol(int height, int width);

}  // namespace tvdecomp
