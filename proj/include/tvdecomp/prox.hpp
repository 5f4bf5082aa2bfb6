#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tvdecomp/image.hpp"
#include "tvdecomp/operators.hpp"

namespace tvdecomp {

/// Exponent s of the texture norm |||g|||_s.
enum class SNorm { one, two, inf };

std::string to_string(SNorm s);
/// Accepts "1", "2", "inf".
SNorm parse_snorm(const std::string& text);

/// How vector fields are grouped for the s-norm proxes. Isotropic groups the two
/// components of each pixel; componentwise treats every component on its own.
enum class ShrinkGrouping { isotropic, componentwise };

/// Inner iteration for the TV prox: Chambolle's fixed point or the accelerated
/// dual projected gradient (FGP) with adaptive restart.
enum class TvInnerMethod { chambolle, fgp };

/// relative_change: ||x_k - x_{k-1}|| <= inner_tol ||x_k||.
/// duality_gap: stop once the gap certifies ||x_k - x*|| <= inner_tol ||x_k||.
enum class TvStopRule { relative_change, duality_gap };

struct TvProxParams {
  double weight = 1.0;
  TvInnerMethod method = TvInnerMethod::chambolle;
  TvStopRule stop_rule = TvStopRule::relative_change;
  int max_inner_iters = 200;
  double inner_tol = 1e-6;
  /// Chambolle fixed-point step; convergence is guaranteed up to 1/8 and
  /// observed in practice up to 1/4. FGP always uses 1/8.
  double inner_step = 0.125;
  Boundary boundary = Boundary::neumann;

  void validate() const;
};

struct TvProxResult {
  Image x;
  /// Dual field q with |q|_i <= 1 and x = y + weight * div q.
  VectorField dual;
  int iterations = 0;
  /// False when max_inner_iters ran out before the stopping test passed.
  bool converged = false;
};

/// argmin_x weight*|||grad x|||_1 + 1/2 ||x - y||^2 through the dual x = y + weight*div q.
/// Chambolle: q <- (q + t grad(div q + y/weight)) / (1 + t |grad(div q + y/weight)|).
/// `warm_start` seeds q.
TvProxResult tv_prox_with_dual(const Image& y, const TvProxParams& params,
                               const VectorField* warm_start = nullptr);
Image tv_prox(const Image& y, const TvProxParams& params);

/// Isotropic total variation |||grad x|||_1.
double tv_seminorm(const Image& x, Boundary bc);
/// weight*TV(x) + 1/2 ||x - y||^2
double tv_prox_objective(const Image& x, const Image& y, double weight, Boundary bc);

/// |||g|||_s
double snorm(const VectorField& g, SNorm s, ShrinkGrouping grouping = ShrinkGrouping::isotropic);

/// argmin_x sigma*|||x|||_s + 1/2 ||x - y||^2 in closed form.
VectorField snorm_prox(const VectorField& y, double sigma, SNorm s,
                       ShrinkGrouping grouping = ShrinkGrouping::isotropic);

/// Euclidean projection onto {z : ||z||_1 <= radius} by sort-and-threshold.
std::vector<double> l1_ball_project(std::span<const double> v, double radius);

/// Prox_{f*/sigma}(y/sigma) = (y - Prox_{sigma f}(y)) / sigma, where
/// base_prox(point, sigma) returns Prox_{sigma f}(point).
template <class Point, class BaseProx>
Point conjugate_prox(const Point& y, double sigma, BaseProx&& base_prox) {
  if (!(sigma > 0.0)) throw std::invalid_argument("conjugate_prox: sigma must be positive");
  Point out = y;
  out -= std::forward<BaseProx>(base_prox)(y, sigma);
  out *= 1.0 / sigma;
  return out;
}

}  // namespace tvdecomp
