#pragma once

#include <cstdint>

#include "tvdecomp/image.hpp"
#include "tvdecomp/operators.hpp"

namespace tvdecomp {

/// hsize x hsize samples of exp(-(x^2+y^2)/(2 sigma^2)) on coordinates
/// j - (hsize-1)/2, normalized to unit sum (the fspecial('gaussian') layout).
BlurKernel gaussian_kernel(int hsize, double sigma);

/// Out-of-focus kernel on a (2*ceil(r)+1)^2 grid; each tap is the fraction of
/// 16x16 subpixel samples inside the radius-r disk, normalized to unit sum.
BlurKernel disk_kernel(double radius);

/// img + N(mean, variance) i.i.d., drawn from CounterRng(seed); no clamping.
Image add_gaussian_noise(const Image& img, double mean, double variance, std::uint64_t seed);

/// i.i.d. Bernoulli(keep_prob) observation mask from CounterRng(seed).
PixelMask bernoulli_mask(int height, int width, double keep_prob, std::uint64_t seed);

/// Pixels >= 0.5 are observed.
PixelMask mask_from_image(const Image& img);

struct SynthOptions {
  int height = 64;
  int width = 64;
  int stripe_period = 6;
  double amplitude = 0.12;
  std::uint64_t seed = 1;
  /// Replace the random shapes by a flat 0.5 cartoon.
  bool flat_cartoon = false;
};

struct SynthImage {
  Image clean;
  Image cartoon;
  Image texture;
};

/// Piecewise-constant shapes plus zero-mean sinusoidal stripes confined to a
/// rectangular patch; clean = clamp(cartoon + texture).
SynthImage synth_cartoon_texture(const SynthOptions& options);

}  // namespace tvdecomp
