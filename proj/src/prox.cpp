#include "tvdecomp/prox.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <functional>
#include <numeric>

namespace tvdecomp {

std::string to_string(SNorm s) {
  switch (s) {
    case SNorm::one: return "1";
    case SNorm::two: return "2";
    case SNorm::inf: return "inf";
  }
  return "?";
}

SNorm parse_snorm(const std::string& text) {
  if (text == "1") return SNorm::one;
  if (text == "2") return SNorm::two;
  if (text == "inf" || text == "Inf" || text == "INF") return SNorm::inf;
  throw std::invalid_argument("texture norm must be 1, 2 or inf, got '" + text + "'");
}

void TvProxParams::validate() const {
  if (!(weight > 0.0) || !std::isfinite(weight)) throw std::invalid_argument("tv_prox: weight must be positive");
  if (max_inner_iters < 1) throw std::invalid_argument("tv_prox: max_inner_iters must be >= 1");
  if (!(inner_tol > 0.0)) throw std::invalid_argument("tv_prox: inner_tol must be positive");
  if (!(inner_step > 0.0 && inner_step <= 0.25)) {
    throw std::invalid_argument("tv_prox: inner_step must lie in (0, 0.25]");
  }
}

namespace {

// weight * sum_i (|grad x|_i - <grad x_i, q_i>): the duality gap at x = y + weight*div q.
double duality_gap(const Image& x, const VectorField& q, double weight, Boundary bc) {
  const VectorField gx = grad(x, bc);
  const double* d1 = gx.g1().values().data();
  const double* d2 = gx.g2().values().data();
  const double* q1 = q.g1().values().data();
  const double* q2 = q.g2().values().data();
  double gap = 0.0;
  for (std::size_t i = 0; i < gx.pixels(); ++i) gap += std::sqrt(d1[i] * d1[i] + d2[i] * d2[i]) - (d1[i] * q1[i] + d2[i] * q2[i]);
  return weight * gap;
}

bool stop_now(const TvProxParams& params, const TvProxResult& res, double change_sq) {
  const double bound = params.inner_tol * std::max(norm(res.x), DBL_MIN);
  if (params.stop_rule == TvStopRule::relative_change) return std::sqrt(change_sq) <= bound;
  // 1-strong convexity: ||x - x*||^2 <= 2 gap.
  return 2.0 * duality_gap(res.x, res.dual, params.weight, params.boundary) <= bound * bound;
}

void chambolle(const Image& y, const TvProxParams& params, TvProxResult& res) {
  const double lambda = params.weight;
  const double t = params.inner_step;
  Image& x = res.x;
  double* q1 = res.dual.g1().values().data();
  double* q2 = res.dual.g2().values().data();
  for (int it = 1; it <= params.max_inner_iters; ++it) {
    // grad(div q + y/lambda) = grad(x) / lambda
    const VectorField gx = grad(x, params.boundary);
    const double* d1 = gx.g1().values().data();
    const double* d2 = gx.g2().values().data();
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double a = d1[i] / lambda;
      const double b = d2[i] / lambda;
      const double denom = 1.0 + t * std::sqrt(a * a + b * b);
      q1[i] = (q1[i] + t * a) / denom;
      q2[i] = (q2[i] + t * b) / denom;
    }
    Image next = y;
    next.axpy(lambda, div(res.dual, params.boundary));
    double change_sq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = next[i] - x[i];
      change_sq += d * d;
    }
    x = std::move(next);
    res.iterations = it;
    if (stop_now(params, res, change_sq)) {
      res.converged = true;
      return;
    }
  }
}

// Beck-Teboulle fast gradient projection on min_{|q_i| <= 1} 1/2 ||y + lambda div q||^2.
void fgp(const Image& y, const TvProxParams& params, TvProxResult& res) {
  const double lambda = params.weight;
  const double step = 1.0 / (8.0 * lambda);
  const std::size_t n = y.size();
  VectorField& q = res.dual;
  VectorField r = q;
  Image xr = res.x;  // primal point of the extrapolated dual r
  double t = 1.0;
  double energy = 0.5 * dot(res.x, res.x);  // dual objective at q
  for (int it = 1; it <= params.max_inner_iters; ++it) {
    const VectorField gr = grad(xr, params.boundary);
    VectorField prev = q;
    double* q1 = q.g1().values().data();
    double* q2 = q.g2().values().data();
    const double* r1 = r.g1().values().data();
    const double* r2 = r.g2().values().data();
    const double* d1 = gr.g1().values().data();
    const double* d2 = gr.g2().values().data();
    for (std::size_t i = 0; i < n; ++i) {
      double a = r1[i] + step * d1[i];
      double b = r2[i] + step * d2[i];
      const double m = std::sqrt(a * a + b * b);
      if (m > 1.0) {
        a /= m;
        b /= m;
      }
      q1[i] = a;
      q2[i] = b;
    }
    Image next = y;
    next.axpy(lambda, div(q, params.boundary));
    // Adaptive restart: drop the momentum whenever the dual objective goes up.
    const double next_energy = 0.5 * dot(next, next);
    double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (next_energy > energy) tn = 1.0;
    energy = next_energy;
    const double mom = (t - 1.0) / tn;
    t = tn;
    double change_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = next[i] - res.x[i];
      change_sq += d * d;
    }
    // x is affine in q, so the extrapolation carries over to the primal side.
    xr = next;
    xr *= 1.0 + mom;
    xr.axpy(-mom, res.x);
    r = q;
    r *= 1.0 + mom;
    r.axpy(-mom, prev);
    res.x = std::move(next);
    res.iterations = it;
    if (stop_now(params, res, change_sq)) {
      res.converged = true;
      return;
    }
  }
}

}  // namespace

TvProxResult tv_prox_with_dual(const Image& y, const TvProxParams& params, const VectorField* warm_start) {
  params.validate();
  require_finite(y, "tv_prox input");
  TvProxResult res;
  if (warm_start != nullptr && warm_start->matches(y)) {
    res.dual = *warm_start;
  } else {
    res.dual = VectorField(y.height(), y.width());
  }
  res.x = y;
  res.x.axpy(params.weight, div(res.dual, params.boundary));
  if (params.method == TvInnerMethod::fgp) {
    fgp(y, params, res);
  } else {
    chambolle(y, params, res);
  }
  return res;
}

Image tv_prox(const Image& y, const TvProxParams& params) { return tv_prox_with_dual(y, params).x; }

double tv_seminorm(const Image& x, Boundary bc) {
  const VectorField g = grad(x, bc);
  double total = 0.0;
  for (std::size_t i = 0; i < g.pixels(); ++i) total += g.magnitude(i);
  return total;
}

double tv_prox_objective(const Image& x, const Image& y, double weight, Boundary bc) {
  const Image d = x - y;
  return weight * tv_seminorm(x, bc) + 0.5 * dot(d, d);
}

namespace {

// Group magnitudes in a fixed order: isotropic -> one entry per pixel,
// componentwise -> g1 entries followed by g2 entries.
std::vector<double> group_magnitudes(const VectorField& g, ShrinkGrouping grouping) {
  const std::size_t n = g.pixels();
  std::vector<double> m;
  if (grouping == ShrinkGrouping::isotropic) {
    m.resize(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = g.magnitude(i);
  } else {
    m.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = std::abs(g.g1()[i]);
      m[n + i] = std::abs(g.g2()[i]);
    }
  }
  return m;
}

// Multiply each group of g by factor[group].
VectorField scale_groups(const VectorField& g, const std::vector<double>& factor, ShrinkGrouping grouping) {
  VectorField out = g;
  const std::size_t n = g.pixels();
  for (std::size_t i = 0; i < n; ++i) {
    const double f1 = factor[i];
    const double f2 = grouping == ShrinkGrouping::isotropic ? factor[i] : factor[n + i];
    out.g1()[i] *= f1;
    out.g2()[i] *= f2;
  }
  return out;
}

}  // namespace

double snorm(const VectorField& g, SNorm s, ShrinkGrouping grouping) {
  const auto m = group_magnitudes(g, grouping);
  switch (s) {
    case SNorm::one: return std::accumulate(m.begin(), m.end(), 0.0);
    case SNorm::two: return std::sqrt(std::inner_product(m.begin(), m.end(), m.begin(), 0.0));
    case SNorm::inf: return m.empty() ? 0.0 : *std::max_element(m.begin(), m.end());
  }
  return 0.0;
}

VectorField snorm_prox(const VectorField& y, double sigma, SNorm s, ShrinkGrouping grouping) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("snorm_prox: sigma must be positive");
  require_finite(y, "snorm_prox input");
  const auto m = group_magnitudes(y, grouping);
  std::vector<double> factor(m.size(), 0.0);
  switch (s) {
    case SNorm::one:
      // Group soft-thresholding; zero-magnitude groups stay at zero.
      for (std::size_t i = 0; i < m.size(); ++i) factor[i] = m[i] > sigma ? 1.0 - sigma / m[i] : 0.0;
      break;
    case SNorm::two: {
      const double total = std::sqrt(std::inner_product(m.begin(), m.end(), m.begin(), 0.0));
      std::fill(factor.begin(), factor.end(), total > sigma ? 1.0 - sigma / total : 0.0);
      break;
    }
    case SNorm::inf: {
      // y - P_Omega(y), Omega = {|||z|||_1 <= sigma}, projecting magnitudes and keeping directions.
      const auto projected = l1_ball_project(m, sigma);
      for (std::size_t i = 0; i < m.size(); ++i) factor[i] = m[i] > 0.0 ? 1.0 - projected[i] / m[i] : 0.0;
      break;
    }
  }
  return scale_groups(y, factor, grouping);
}

std::vector<double> l1_ball_project(std::span<const double> v, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("l1_ball_project: radius must be positive");
  std::vector<double> mag(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw NonFiniteError("l1_ball_project input contains NaN or Inf");
    mag[i] = std::abs(v[i]);
    total += mag[i];
  }
  if (total <= radius) return {v.begin(), v.end()};

  std::vector<double> sorted = mag;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    prefix += sorted[j];
    const double candidate = (prefix - radius) / static_cast<double>(j + 1);
    if (sorted[j] > candidate) theta = candidate;
    else break;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double shrunk = std::max(mag[i] - theta, 0.0);
    out[i] = std::copysign(shrunk, v[i]);
  }
  return out;
}

}  // namespace tvdecomp
