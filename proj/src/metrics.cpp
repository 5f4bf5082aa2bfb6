#include "tvdecomp/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace tvdecomp {

double mse(const Image& reference, const Image& test) {
  require_same_shape(reference, test, "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - test[i];
    acc += d * d;
  }
  return acc / static_cast<double>(reference.size());
}

double mse(const MultiImage& reference, const MultiImage& test) {
  if (reference.channels() != test.channels()) throw DimensionError("mse: channel counts differ");
  double acc = 0.0;
  for (std::size_t c = 0; c < reference.channels(); ++c) acc += mse(reference[c], test[c]);
  return acc / static_cast<double>(reference.channels());
}

double psnr_from_mse(double m, double i_max) {
  if (!(i_max > 0.0)) throw std::invalid_argument("psnr: i_max must be positive");
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(i_max * i_max / m);
}

double psnr(const Image& reference, const Image& test, double i_max) {
  return psnr_from_mse(mse(reference, test), i_max);
}

double psnr(const MultiImage& reference, const MultiImage& test, double i_max) {
  return psnr_from_mse(mse(reference, test), i_max);
}

double correlation(const Image& u, const Image& v) {
  require_same_shape(u, v, "correlation");
  const auto n = static_cast<double>(u.size());
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double suu = 0.0, svv = 0.0, suv = 0.0;
  bool u_flat = true, v_flat = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i] - mu;
    const double b = v[i] - mv;
    suu += a * a;
    svv += b * b;
    suv += a * b;
    u_flat = u_flat && u[i] == u[0];
    v_flat = v_flat && v[i] == v[0];
  }
  // A rounded mean leaves a tiny residue on constant input, so test constancy exactly.
  if (u_flat) suu = 0.0;
  if (v_flat) svv = 0.0;
  if (suu == 0.0) throw ZeroVarianceError("correlation: first image is constant (zero variance)");
  if (svv == 0.0) throw ZeroVarianceError("correlation: second image is constant (zero variance)");
  return std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
}

MetricReport evaluate(const Image& reference, const Image& test, double i_max) {
  MetricReport r;
  r.mse = mse(reference, test);
  r.psnr = psnr_from_mse(r.mse, i_max);
  try {
    r.corr = correlation(reference, test);
  } catch (const ZeroVarianceError&) {
    r.corr.reset();
  }
  return r;
}

Image normalize_texture(const Image& v) {
  require_finite(v, "texture");
  const auto [lo, hi] = std::minmax_element(v.data().begin(), v.data().end());
  const double vmin = *lo, vmax = *hi;
  Image out(v.height(), v.width(), 0.5);
  if (vmax == vmin) return out;
  const double span = vmax - vmin;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - vmin) / span;
  return out;
}

}  // namespace tvdecomp
