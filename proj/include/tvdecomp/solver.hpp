#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvdecomp/image.hpp"
#include "tvdecomp/io.hpp"
#include "tvdecomp/operators.hpp"
#include "tvdecomp/prox.hpp"

namespace tvdecomp {

/// min_{x,g} tv_weight*|||grad x|||_1 + 1/2 ||H(x + div g) - b||^2 + texture_weight*|||g|||_s
struct ModelSpec {
  LinearOp degradation = LinearOp::identity(Shape::scalar(1, 1));  // H
  Image observed;                                                   // b
  double tv_weight = 1.0;
  double texture_weight = 1.0;
  SNorm texture_norm = SNorm::one;
  ShrinkGrouping grouping = ShrinkGrouping::isotropic;
  /// Boundary convention of grad/div in the model.
  Boundary boundary = Boundary::neumann;

  void validate() const;
  int height() const { return observed.height(); }
  int width() const { return observed.width(); }
};

enum class LinearSolver { automatic, spectral, cg };

std::string to_string(LinearSolver s);

/// Golden ratio; step_length must stay strictly below it.
inline constexpr double kMaxStepLength = 1.6180339887498948482;

struct SolverParams {
  double penalty = 1.0;        // sigma of the augmented Lagrangian
  double step_length = 1.618;  // multiplier step, in (0, golden ratio)
  int max_iters = 70;
  double tol = 1e-3;
  LinearSolver linear_solver = LinearSolver::automatic;
  double cg_tol = 1e-10;
  int cg_max_iters = 500;
  // Inner iteration of the TV prox inside each step and in R_C, warm-started from the state.
  TvInnerMethod tv_inner_method = TvInnerMethod::fgp;
  int tv_max_inner_iters = 1000;
  double tv_inner_tol = 1e-6;
  double tv_inner_step = 0.125;

  SolverParams() = default;
  /// Validating constructor; throws std::invalid_argument on a bad penalty or step length.
  SolverParams(double penalty, double step_length);

  void validate() const;
};

enum class Preset { case1, case2, case3, case4 };

struct PresetValues {
  double tv_weight;
  double texture_weight;
  double penalty;
};

PresetValues preset_values(Preset p);
/// Accepts "case1".."case4"; throws std::invalid_argument otherwise.
Preset parse_preset(const std::string& name);

struct SolverState {
  Image u;          // dual variable in the observation space
  Image v;          // dual point for the TV term
  VectorField w;    // dual point for the texture term
  Image x;          // cartoon
  VectorField y;    // texture potential
  int iter = 0;
  /// Dual field of the last TV prox, reused to warm-start the next one.
  VectorField tv_dual;

  static SolverState zeros(int height, int width);
  bool all_finite() const;
};

struct KktResidual {
  double r_p = 0.0;
  double r_d = 0.0;
  double r_c = 0.0;
  double tol = 0.0;  // max of the three
};

struct DecompositionResult {
  Image cartoon;
  VectorField texture_potential;
  Image texture;   // div(texture_potential)
  Image restored;  // clamp(cartoon + texture)
  std::vector<IterTrace> trace;
  SolverState state;
  KktResidual residual;
  int iterations = 0;
  bool converged = false;
};

class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class CgNotConvergedError : public SolverError {
public:
  CgNotConvergedError(double relative_residual, int iterations);
  double relative_residual() const { return residual_; }
  int iterations() const { return iterations_; }

private:
  double residual_;
  int iterations_;
};

/// Raised when an iterate stops being finite.
class DivergenceError : public SolverError {
public:
  explicit DivergenceError(int iteration);
  int iteration() const { return iteration_; }

private:
  int iteration_;
};

/// M = I + sigma (A A* + B B*) with A = H and B = H div.
LinearOp build_normal_op(const ModelSpec& spec, double penalty);

/// Largest singular value by power iteration on op^T op.
double operator_norm(const LinearOp& op, int iters = 1000, std::uint64_t seed = 1);

/// Value of the primal model at (x, y).
double primal_objective(const ModelSpec& spec, const Image& x, const VectorField& y);

/// Precomputes the operator norm and linear-solver data for one problem.
class DadmmSolver {
public:
  DadmmSolver(ModelSpec spec, SolverParams params);

  const ModelSpec& spec() const { return spec_; }
  const SolverParams& params() const { return params_; }
  double a_norm() const { return a_norm_; }
  /// Linear solver actually used after resolving `automatic`.
  LinearSolver linear_solver() const { return solver_; }
  /// CG iterations spent in the last solve_u (0 on the spectral path).
  int last_cg_iterations() const { return last_cg_iters_; }

  Image solve_u(const SolverState& state) const;
  std::pair<SolverState, KktResidual> step(const SolverState& state) const;
  KktResidual residuals(const SolverState& state) const;

private:
  Image rhs(const SolverState& state) const;
  Image solve_spectral(const Image& rhs) const;
  Image solve_cg(const Image& rhs, const Image& guess) const;
  Image precondition(const Image& r) const;

  ModelSpec spec_;
  SolverParams params_;
  LinearOp normal_;
  double a_norm_ = 0.0;
  LinearSolver solver_ = LinearSolver::spectral;
  std::vector<double> symbol_;          // spectral M, when available
  std::vector<double> precond_symbol_;  // mask-free spectral M for CG, when a blur is present
  std::optional<PixelMask> precond_mask_;
  mutable int last_cg_iters_ = 0;
};

Image solve_u(const ModelSpec& spec, const SolverParams& params, const SolverState& state);
std::pair<SolverState, KktResidual> dadmm_step(const ModelSpec& spec, const SolverParams& params,
                                               const SolverState& state);
KktResidual kkt_residuals(const ModelSpec& spec, const SolverState& state, double a_norm,
                          const SolverParams& params = {});

struct DecomposeOptions {
  std::optional<SolverState> initial;
  /// Ground truth for the per-iteration psnr column.
  std::optional<Image> reference;
  /// Called once per iteration; the corr column is Corr(cartoon, texture), empty when either is constant.
  std::function<void(const IterTrace&)> sink;
};

DecompositionResult decompose(const ModelSpec& spec, const SolverParams& params,
                              const DecomposeOptions& options = {});

/// Solves each channel independently; at most `max_threads` run at once (0 = hardware).
std::vector<DecompositionResult> decompose_channels(const std::vector<ModelSpec>& specs,
                                                    const SolverParams& params,
                                                    const std::vector<DecomposeOptions>& options,
                                                    unsigned max_threads = 0);

}  // namespace tvdecomp
