#include "tvdecomp/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tvdecomp/random.hpp"

namespace tvdecomp {

BlurKernel gaussian_kernel(int hsize, double sigma) {
  if (hsize < 1) throw std::invalid_argument("gaussian kernel size must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("gaussian sigma must be positive");
  Image taps(hsize, hsize);
  const double center = (hsize - 1) / 2.0;
  for (int r = 0; r < hsize; ++r) {
    for (int c = 0; c < hsize; ++c) {
      const double y = r - center, x = c - center;
      taps(r, c) = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
    }
  }
  return BlurKernel(std::move(taps), hsize / 2, hsize / 2);
}

BlurKernel disk_kernel(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("disk radius must be positive");
  constexpr int kSub = 16;
  const int half = static_cast<int>(std::ceil(radius));
  const int n = 2 * half + 1;
  const double r2 = radius * radius;
  Image taps(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      int inside = 0;
      for (int sr = 0; sr < kSub; ++sr) {
        const double y = (r - half) + (sr + 0.5) / kSub - 0.5;
        for (int sc = 0; sc < kSub; ++sc) {
          const double x = (c - half) + (sc + 0.5) / kSub - 0.5;
          if (x * x + y * y <= r2) ++inside;
        }
      }
      taps(r, c) = inside;
    }
  }
  return BlurKernel(std::move(taps), half, half);
}

Image add_gaussian_noise(const Image& img, double mean, double variance, std::uint64_t seed) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) throw std::invalid_argument("noise variance must be >= 0");
  require_finite(img, "noise input");
  Image out = img;
  if (variance == 0.0) {
    for (double& v : out.values()) v += mean;
    return out;
  }
  CounterRng rng(seed);
  const double sd = std::sqrt(variance);
  for (double& v : out.values()) v += mean + sd * rng.normal();
  return out;
}

PixelMask bernoulli_mask(int height, int width, double keep_prob, std::uint64_t seed) {
  if (!(keep_prob >= 0.0 && keep_prob <= 1.0)) throw std::invalid_argument("keep probability must lie in [0,1]");
  CounterRng rng(seed);
  Image keep(height, width);
  for (double& v : keep.values()) v = rng.uniform() < keep_prob ? 1.0 : 0.0;
  return PixelMask(std::move(keep));
}

PixelMask mask_from_image(const Image& img) {
  Image keep(img.height(), img.width());
  for (std::size_t i = 0; i < img.size(); ++i) keep[i] = img[i] >= 0.5 ? 1.0 : 0.0;
  return PixelMask(std::move(keep));
}

SynthImage synth_cartoon_texture(const SynthOptions& o) {
  if (o.height < 1 || o.width < 1) throw std::invalid_argument("synthetic image dimensions must be positive");
  if (o.stripe_period < 1) throw std::invalid_argument("stripe period must be >= 1");
  if (o.height < o.stripe_period || o.width < o.stripe_period) {
    throw std::invalid_argument("synthetic image must be at least one stripe period wide");
  }
  if (!(o.amplitude >= 0.0 && o.amplitude <= 0.25)) throw std::invalid_argument("stripe amplitude must lie in [0, 0.25]");

  const int h = o.height, w = o.width;
  CounterRng rng(o.seed);
  auto between = [&rng](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };

  Image cartoon(h, w, o.flat_cartoon ? 0.5 : 0.3);
  if (!o.flat_cartoon) {
    // Levels stay inside [0.25, 0.75] so stripes of amplitude <= 0.25 never clip.
    const int rects = 2, disks = 2;
    for (int k = 0; k < rects; ++k) {
      const int r0 = static_cast<int>(between(0.05, 0.5) * h);
      const int c0 = static_cast<int>(between(0.05, 0.5) * w);
      const int r1 = std::min(h, r0 + static_cast<int>(between(0.25, 0.45) * h));
      const int c1 = std::min(w, c0 + static_cast<int>(between(0.25, 0.45) * w));
      const double level = between(0.45, 0.75);
      for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) cartoon(r, c) = level;
    }
    for (int k = 0; k < disks; ++k) {
      const double cr = between(0.25, 0.75) * h, cc = between(0.25, 0.75) * w;
      const double rad = between(0.1, 0.22) * std::min(h, w);
      const double level = between(0.25, 0.6);
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= rad * rad) cartoon(r, c) = level;
    }
  }

  // Stripe patch: a rectangle covering roughly the middle half of the image.
  const int pr0 = h / 4, pr1 = h - h / 4;
  const int pc0 = w / 4, pc1 = w - w / 4;
  const double theta = between(0.0, std::numbers::pi);
  const double phase = between(0.0, 2.0 * std::numbers::pi);
  const double kx = std::cos(theta) * 2.0 * std::numbers::pi / o.stripe_period;
  const double ky = std::sin(theta) * 2.0 * std::numbers::pi / o.stripe_period;
  Image texture(h, w);
  double mean = 0.0;
  int count = 0;
  for (int r = pr0; r < pr1; ++r) {
    for (int c = pc0; c < pc1; ++c) {
      texture(r, c) = o.amplitude * std::sin(kx * c + ky * r + phase);
      mean += texture(r, c);
      ++count;
    }
  }
  if (count > 0) mean /= count;
  for (int r = pr0; r < pr1; ++r)
    for (int c = pc0; c < pc1; ++c) texture(r, c) -= mean;

  SynthImage out{clamp_to_unit(cartoon + texture), cartoon, texture};
  return out;
}

}  // namespace tvdecomp
