#pragma once

#include <optional>

#include "tvdecomp/image.hpp"

namespace tvdecomp {

/// Raised by correlation() when one argument has zero sample variance.
class ZeroVarianceError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct MetricReport {
  double mse = 0.0;
  double psnr = 0.0;  // +inf when mse == 0
  std::optional<double> corr;  // absent when either image is constant
};

double mse(const Image& reference, const Image& test);
/// Channel MSEs averaged before the logarithm.
double mse(const MultiImage& reference, const MultiImage& test);

double psnr_from_mse(double mse, double i_max = 1.0);
double psnr(const Image& reference, const Image& test, double i_max = 1.0);
double psnr(const MultiImage& reference, const MultiImage& test, double i_max = 1.0);

/// Sample cov(u,v)/sqrt(var(u) var(v)) over flattened pixels, clamped to [-1,1].
double correlation(const Image& u, const Image& v);

MetricReport evaluate(const Image& reference, const Image& test, double i_max = 1.0);

/// (v - min)/(max - min); a constant image maps to 0.5 everywhere.
Image normalize_texture(const Image& v);

}  // namespace tvdecomp
