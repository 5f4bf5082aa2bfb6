#include "tvdecomp/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "tvdecomp/metrics.hpp"
#include "tvdecomp/spectral.hpp"

namespace tvdecomp {

namespace {

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

// What the solver needs to know about H to pick a linear solver.
struct DegradationInfo {
  bool shift_invariant = true;  // only identity / periodic convolution / scaling
  bool recognized = true;       // built from identity, convolution, mask and scaling only
  bool has_blur = false;
  bool has_mask = false;
  double scale = 1.0;
  std::vector<BlurKernel> kernels;
  std::optional<Image> keep;  // product of all masks
};

void inspect(const LinearOp& op, DegradationInfo& info) {
  using Kind = LinearOp::Kind;
  switch (op.kind()) {
    case Kind::identity:
      return;
    case Kind::convolution:
      info.has_blur = true;
      info.kernels.push_back(op.kernel());
      if (op.boundary() != Boundary::periodic) info.shift_invariant = false;
      return;
    case Kind::mask: {
      info.has_mask = true;
      info.shift_invariant = false;
      const Image& k = op.mask_data().keep();
      if (!info.keep) {
        info.keep = k;
      } else {
        for (std::size_t i = 0; i < k.size(); ++i) (*info.keep)[i] *= k[i];
      }
      return;
    }
    case Kind::scaled:
      info.scale *= op.factor();
      inspect(op.first(), info);
      return;
    case Kind::composition:
      for (const LinearOp& f : op.factors()) inspect(f, info);
      return;
    default:
      info.recognized = false;
      info.shift_invariant = false;
      return;
  }
}

// 1 + sigma |c h(w)|^2 (1 + |d(w)|^2) for the blur/scaling part of H.
std::vector<double> normal_symbol(const DegradationInfo& info, double sigma, int h, int w) {
  const std::vector<double> lap = periodic_laplacian_symbol(h, w);
  std::vector<double> gain(lap.size(), info.scale * info.scale);
  for (const BlurKernel& k : info.kernels) {
    const Spectrum s = kernel_spectrum(k, h, w);
    for (std::size_t i = 0; i < gain.size(); ++i) gain[i] *= std::norm(s[i]);
  }
  std::vector<double> m(lap.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 1.0 + sigma * gain[i] * (1.0 + lap[i]);
  return m;
}

Image spectral_divide(const Image& rhs, const std::vector<double>& symbol) {
  auto dft = dft_for(rhs.height(), rhs.width());
  Spectrum s = dft->forward(rhs);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] /= symbol[i];
  return dft->inverse(s);
}

void scale_signal(Signal& s, double a) {
  std::visit([a](auto& v) { v *= a; }, s);
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameters

void ModelSpec::validate() const {
  if (!positive_finite(tv_weight)) throw std::invalid_argument("tv_weight must be positive");
  if (!positive_finite(texture_weight)) throw std::invalid_argument("texture_weight must be positive");
  const Shape img = Shape::scalar(observed.height(), observed.width());
  if (degradation.out_shape() != img) {
    throw DimensionError("observed image " + to_string(img) + " does not match degradation output " +
                         to_string(degradation.out_shape()));
  }
  if (degradation.in_shape() != img) {
    throw DimensionError("degradation must map " + to_string(img) + " to itself, got input " +
                         to_string(degradation.in_shape()));
  }
  require_finite(observed, "observed image");
}

std::string to_string(LinearSolver s) {
  switch (s) {
    case LinearSolver::automatic: return "auto";
    case LinearSolver::spectral: return "spectral";
    case LinearSolver::cg: return "cg";
  }
  return "?";
}

SolverParams::SolverParams(double penalty_, double step_length_) : penalty(penalty_), step_length(step_length_) {
  validate();
}

void SolverParams::validate() const {
  if (!positive_finite(penalty)) throw std::invalid_argument("penalty must be positive");
  if (!(step_length > 0.0 && step_length < kMaxStepLength)) {
    throw std::invalid_argument("step_length must lie in (0, (1+sqrt 5)/2), got " + format_real(step_length));
  }
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!positive_finite(tol)) throw std::invalid_argument("tol must be positive");
  if (!positive_finite(cg_tol)) throw std::invalid_argument("cg_tol must be positive");
  if (cg_max_iters < 1) throw std::invalid_argument("cg_max_iters must be >= 1");
  TvProxParams tv;
  tv.max_inner_iters = tv_max_inner_iters;
  tv.inner_tol = tv_inner_tol;
  tv.inner_step = tv_inner_step;
  tv.method = tv_inner_method;
  tv.validate();
}

PresetValues preset_values(Preset p) {
  switch (p) {
    case Preset::case1: return {1e-1, 3e-2, 0.8};
    case Preset::case2: return {8e-6, 4e-4, 2e2};
    case Preset::case3: return {4e-3, 1e-3, 3e3};
    case Preset::case4: return {5e-3, 3e-3, 3e3};
  }
  throw std::invalid_argument("unknown preset");
}

Preset parse_preset(const std::string& name) {
  if (name == "case1") return Preset::case1;
  if (name == "case2") return Preset::case2;
  if (name == "case3") return Preset::case3;
  if (name == "case4") return Preset::case4;
  throw std::invalid_argument("unknown preset '" + name + "' (expected case1, case2, case3 or case4)");
}

SolverState SolverState::zeros(int height, int width) {
  SolverState s;
  s.u = Image(height, width);
  s.v = Image(height, width);
  s.w = VectorField(height, width);
  s.x = Image(height, width);
  s.y = VectorField(height, width);
  s.tv_dual = VectorField(height, width);
  return s;
}

bool SolverState::all_finite() const {
  return u.all_finite() && v.all_finite() && w.all_finite() && x.all_finite() && y.all_finite();
}

CgNotConvergedError::CgNotConvergedError(double relative_residual, int iterations)
    : SolverError("conjugate gradient did not converge: relative residual " + format_real(relative_residual) +
                  " after " + std::to_string(iterations) + " iterations"),
      residual_(relative_residual),
      iterations_(iterations) {}

DivergenceError::DivergenceError(int iteration)
    : SolverError("non-finite iterate at iteration " + std::to_string(iteration) +
                  " (parameters too aggressive for this problem?)"),
      iteration_(iteration) {}

// ---------------------------------------------------------------------------
// Building blocks

LinearOp build_normal_op(const ModelSpec& spec, double penalty) {
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) throw std::invalid_argument("penalty must be >= 0");
  const LinearOp& h = spec.degradation;
  const Shape img = h.out_shape();
  const LinearOp b = compose(h, LinearOp::divergence(img.height, img.width, spec.boundary));
  const LinearOp aa = compose(h, LinearOp::transpose(h));
  const LinearOp bb = compose(b, LinearOp::transpose(b));
  return LinearOp::sum(LinearOp::identity(img), LinearOp::scaled(penalty, LinearOp::sum(aa, bb)));
}

double operator_norm(const LinearOp& op, int iters, std::uint64_t seed) {
  if (iters < 1) throw std::invalid_argument("operator_norm: iters must be >= 1");
  Signal x = random_signal(op.in_shape(), seed);
  const double n0 = norm(x);
  if (n0 == 0.0) return 0.0;
  scale_signal(x, 1.0 / n0);
  double lambda = 0.0;
  for (int i = 0; i < iters; ++i) {
    Signal y = op.adjoint(op.apply(x));
    const double next = norm(y);
    if (next == 0.0) return 0.0;
    scale_signal(y, 1.0 / next);
    x = std::move(y);
    const bool settled = i > 0 && std::abs(next - lambda) <= 1e-6 * next;
    lambda = next;
    if (settled) break;
  }
  return std::sqrt(lambda);
}

double primal_objective(const ModelSpec& spec, const Image& x, const VectorField& y) {
  Image fit = x + div(y, spec.boundary);
  Image r = spec.degradation.apply_to_image(fit);
  r -= spec.observed;
  return spec.tv_weight * tv_seminorm(x, spec.boundary) + 0.5 * dot(r, r) +
         spec.texture_weight * snorm(y, spec.texture_norm, spec.grouping);
}

// ---------------------------------------------------------------------------
// DadmmSolver

DadmmSolver::DadmmSolver(ModelSpec spec, SolverParams params)
    : spec_((spec.validate(), std::move(spec))),
      params_((params.validate(), params)),
      normal_(build_normal_op(spec_, params_.penalty)) {
  a_norm_ = operator_norm(spec_.degradation);

  DegradationInfo info;
  inspect(spec_.degradation, info);
  const bool spectral_ok = info.recognized && info.shift_invariant && spec_.boundary == Boundary::periodic;
  const int h = spec_.height(), w = spec_.width();

  switch (params_.linear_solver) {
    case LinearSolver::automatic:
      solver_ = spectral_ok ? LinearSolver::spectral : LinearSolver::cg;
      break;
    case LinearSolver::spectral:
      if (!spectral_ok) {
        std::string why = info.has_mask ? "the degradation contains a pixel mask"
                          : spec_.boundary != Boundary::periodic ? "the model boundary is not periodic"
                                                                  : "the degradation is not shift invariant";
        throw SolverError("spectral u-solve unavailable: " + why + "; use the cg linear solver");
      }
      solver_ = LinearSolver::spectral;
      break;
    case LinearSolver::cg:
      solver_ = LinearSolver::cg;
      break;
  }
  if (solver_ == LinearSolver::spectral) {
    symbol_ = normal_symbol(info, params_.penalty, h, w);
  } else if (info.recognized && info.has_blur) {
    precond_symbol_ = normal_symbol(info, params_.penalty, h, w);
    if (info.keep) precond_mask_ = PixelMask(*info.keep);
  }
}

Image DadmmSolver::rhs(const SolverState& s) const {
  // A x + B y - b - sigma A v - sigma B w = H((x - sigma v) + div(y - sigma w)) - b
  const double sigma = params_.penalty;
  Image p = s.x;
  p.axpy(-sigma, s.v);
  VectorField q = s.y;
  q.axpy(-sigma, s.w);
  p += div(q, spec_.boundary);
  Image r = spec_.degradation.apply_to_image(p);
  r -= spec_.observed;
  return r;
}

Image DadmmSolver::solve_spectral(const Image& rhs) const { return spectral_divide(rhs, symbol_); }

Image DadmmSolver::precondition(const Image& r) const {
  if (precond_symbol_.empty()) return r;
  if (!precond_mask_) return spectral_divide(r, precond_symbol_);
  // (I - K) r + K P^{-1} K r: identity on missing pixels, mask-free inverse on observed ones.
  const Image& keep = precond_mask_->keep();
  Image kr = apply_mask(r, *precond_mask_);
  Image out = apply_mask(spectral_divide(kr, precond_symbol_), *precond_mask_);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (keep[i] == 0.0) out[i] = r[i];
  }
  return out;
}

Image DadmmSolver::solve_cg(const Image& rhs, const Image& guess) const {
  const double sigma = params_.penalty;
  const LinearOp& h = spec_.degradation;
  auto apply_m = [&](const Image& p) {
    // p + sigma H (t - div grad t), t = H* p
    const Image t = h.adjoint_to_image(p);
    Image inner = t;
    inner -= div(grad(t, spec_.boundary), spec_.boundary);
    Image out = p;
    out.axpy(sigma, h.apply_to_image(inner));
    return out;
  };

  last_cg_iters_ = 0;
  const double bnorm = norm(rhs);
  if (bnorm == 0.0) return Image(rhs.height(), rhs.width());
  Image x = guess.same_shape(rhs) ? guess : Image(rhs.height(), rhs.width());
  Image r = rhs;
  r -= apply_m(x);
  double rnorm = norm(r);
  if (rnorm <= params_.cg_tol * bnorm) return x;
  Image z = precondition(r);
  Image p = z;
  double rz = dot(r, z);
  for (int k = 1; k <= params_.cg_max_iters; ++k) {
    const Image mp = apply_m(p);
    const double alpha = rz / dot(p, mp);
    x.axpy(alpha, p);
    r.axpy(-alpha, mp);
    rnorm = norm(r);
    last_cg_iters_ = k;
    if (!std::isfinite(rnorm)) break;
    if (rnorm <= params_.cg_tol * bnorm) return x;
    z = precondition(r);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    p *= beta;
    p += z;
  }
  throw CgNotConvergedError(rnorm / bnorm, last_cg_iters_);
}

Image DadmmSolver::solve_u(const SolverState& state) const {
  const Image r = rhs(state);
  if (solver_ == LinearSolver::spectral) return solve_spectral(r);
  return solve_cg(r, state.u);
}

namespace {

struct AdjointImages {
  Image at_u;        // A* u = H* u
  VectorField bt_u;  // B* u = -grad H* u
};

AdjointImages adjoints(const ModelSpec& spec, const Image& u) {
  AdjointImages a;
  a.at_u = spec.degradation.adjoint_to_image(u);
  a.bt_u = grad(a.at_u, spec.boundary);
  a.bt_u *= -1.0;
  return a;
}

TvProxParams tv_params(const ModelSpec& spec, const SolverParams& params, double weight) {
  TvProxParams tv;
  tv.weight = weight;
  tv.max_inner_iters = params.tv_max_inner_iters;
  tv.inner_tol = params.tv_inner_tol;
  tv.inner_step = params.tv_inner_step;
  tv.method = params.tv_inner_method;
  tv.boundary = spec.boundary;
  return tv;
}

KktResidual residuals_at(const ModelSpec& spec, const SolverParams& params, const SolverState& s,
                         const AdjointImages& adj, double a_norm) {
  const double scale = 1.0 + a_norm;
  KktResidual res;

  // u + b - A x - B y = u + b - H(x + div y)
  Image primal = s.u;
  primal += spec.observed;
  primal -= spec.degradation.apply_to_image(s.x + div(s.y, spec.boundary));
  res.r_p = norm(primal) / scale;

  Image dv = adj.at_u;
  dv += s.v;
  VectorField dw = adj.bt_u;
  dw += s.w;
  res.r_d = (norm(dv) + norm(dw)) / scale;

  // v - Prox_{p*}(v + x) = Prox_p(v + x) - x, and likewise for the texture term.
  const VectorField* warm = s.tv_dual.matches(s.x) ? &s.tv_dual : nullptr;
  Image cv = tv_prox_with_dual(s.v + s.x, tv_params(spec, params, spec.tv_weight), warm).x;
  cv -= s.x;
  VectorField cw = snorm_prox(s.w + s.y, spec.texture_weight, spec.texture_norm, spec.grouping);
  cw -= s.y;
  res.r_c = (norm(cv) + norm(cw)) / scale;

  res.tol = std::max({res.r_p, res.r_d, res.r_c});
  return res;
}

}  // namespace

KktResidual DadmmSolver::residuals(const SolverState& state) const {
  return residuals_at(spec_, params_, state, adjoints(spec_, state.u), a_norm_);
}

std::pair<SolverState, KktResidual> DadmmSolver::step(const SolverState& s) const {
  const double sigma = params_.penalty;
  const double gain = params_.step_length * sigma;

  SolverState next;
  next.iter = s.iter + 1;
  next.u = solve_u(s);
  const AdjointImages adj = adjoints(spec_, next.u);

  // v = (z - Prox_{sigma p}(z)) / sigma with z = x - sigma A* u
  Image z = s.x;
  z.axpy(-sigma, adj.at_u);
  const VectorField* warm = s.tv_dual.matches(z) ? &s.tv_dual : nullptr;
  TvProxResult tv = tv_prox_with_dual(z, tv_params(spec_, params_, sigma * spec_.tv_weight), warm);
  next.v = z;
  next.v -= tv.x;
  next.v *= 1.0 / sigma;
  next.tv_dual = std::move(tv.dual);

  VectorField zz = s.y;
  zz.axpy(-sigma, adj.bt_u);
  next.w = zz;
  next.w -= snorm_prox(zz, sigma * spec_.texture_weight, spec_.texture_norm, spec_.grouping);
  next.w *= 1.0 / sigma;

  // x += step sigma (-A* u - v), y += step sigma (-B* u - w)
  next.x = s.x;
  next.x.axpy(-gain, adj.at_u);
  next.x.axpy(-gain, next.v);
  next.y = s.y;
  next.y.axpy(-gain, adj.bt_u);
  next.y.axpy(-gain, next.w);

  if (!next.all_finite()) throw DivergenceError(next.iter);
  return {std::move(next), residuals_at(spec_, params_, next, adj, a_norm_)};
}

// ---------------------------------------------------------------------------
// Free-function forms

Image solve_u(const ModelSpec& spec, const SolverParams& params, const SolverState& state) {
  return DadmmSolver(spec, params).solve_u(state);
}

std::pair<SolverState, KktResidual> dadmm_step(const ModelSpec& spec, const SolverParams& params,
                                               const SolverState& state) {
  return DadmmSolver(spec, params).step(state);
}

KktResidual kkt_residuals(const ModelSpec& spec, const SolverState& state, double a_norm,
                          const SolverParams& params) {
  return residuals_at(spec, params, state, adjoints(spec, state.u), a_norm);
}

DecompositionResult decompose(const ModelSpec& spec, const SolverParams& params, const DecomposeOptions& options) {
  const DadmmSolver solver(spec, params);
  SolverState state = options.initial ? *options.initial : SolverState::zeros(spec.height(), spec.width());
  if (options.reference) require_same_shape(*options.reference, spec.observed, "reference image");

  DecompositionResult result;
  for (int k = 0; k < params.max_iters; ++k) {
    std::pair<SolverState, KktResidual> stepped;
    try {
      stepped = solver.step(state);
    } catch (const NonFiniteError&) {
      throw DivergenceError(state.iter + 1);
    }
    state = std::move(stepped.first);
    result.residual = stepped.second;

    IterTrace row;
    row.iter = state.iter;
    row.r_p = result.residual.r_p;
    row.r_d = result.residual.r_d;
    row.r_c = result.residual.r_c;
    row.tol = result.residual.tol;
    row.objective = primal_objective(spec, state.x, state.y);
    if (!std::isfinite(row.objective) || !std::isfinite(row.tol)) throw DivergenceError(state.iter);
    const Image texture = div(state.y, spec.boundary);
    if (options.reference) row.psnr = psnr(*options.reference, clamp_to_unit(state.x + texture));
    try {
      row.corr = correlation(state.x, texture);
    } catch (const ZeroVarianceError&) {
    }
    result.trace.push_back(row);
    if (options.sink) options.sink(row);

    if (result.residual.tol <= params.tol) {
      result.converged = true;
      break;
    }
  }

  result.iterations = state.iter;
  result.cartoon = state.x;
  result.texture_potential = state.y;
  result.texture = div(state.y, spec.boundary);
  result.restored = clamp_to_unit(result.cartoon + result.texture);
  result.state = std::move(state);
  return result;
}

std::vector<DecompositionResult> decompose_channels(const std::vector<ModelSpec>& specs, const SolverParams& params,
                                                    const std::vector<DecomposeOptions>& options,
                                                    unsigned max_threads) {
  if (!options.empty() && options.size() != specs.size()) {
    throw std::invalid_argument("decompose_channels: one options entry per channel expected");
  }
  const std::size_t n = specs.size();
  std::vector<DecompositionResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  unsigned workers = max_threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : max_threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = decompose(specs[i], params, options.empty() ? DecomposeOptions{} : options[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace tvdecomp
