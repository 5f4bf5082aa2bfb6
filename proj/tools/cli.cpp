#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tvdecomp/degrade.hpp"
#include "tvdecomp/io.hpp"
#include "tvdecomp/metrics.hpp"
#include "tvdecomp/random.hpp"
#include "tvdecomp/solver.hpp"

namespace tvdecomp {

namespace {

constexpr int kUsage = 1;
constexpr int kFileError = 2;
constexpr int kSolverError = 3;

class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) return parts;
    start = pos + 1;
  }
}

double to_real(const std::string& s, const std::string& flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(flag + ": '" + s + "' is not a number");
}

// "kind:a,b" -> {kind, [a, b]}
std::pair<std::string, std::vector<std::string>> parse_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return {text, {}};
  return {text.substr(0, colon), split(text.substr(colon + 1), ',')};
}

std::optional<BlurKernel> parse_blur(const std::string& text) {
  const auto [kind, args] = parse_spec(text);
  if (kind == "none" && args.empty()) return std::nullopt;
  if (kind == "gaussian" && args.size() == 2) {
    const double size = to_real(args[0], "--blur");
    if (size != std::floor(size) || size < 1) throw UsageError("--blur gaussian: size must be a positive integer");
    return gaussian_kernel(static_cast<int>(size), to_real(args[1], "--blur"));
  }
  if (kind == "disk" && args.size() == 1) return disk_kernel(to_real(args[0], "--blur"));
  throw UsageError("--blur expects gaussian:H,S, disk:R or none, got '" + text + "'");
}

struct NoiseSpec {
  double mean = 0.0;
  double variance = 0.0;
};

std::optional<NoiseSpec> parse_noise(const std::string& text) {
  const auto [kind, args] = parse_spec(text);
  if (kind == "none" && args.empty()) return std::nullopt;
  if (kind == "gaussian" && args.size() == 2) return NoiseSpec{to_real(args[0], "--noise"), to_real(args[1], "--noise")};
  throw UsageError("--noise expects gaussian:MEAN,VAR or none, got '" + text + "'");
}

// Mask and noise draws use separate seeds so they stay independent.
std::uint64_t mask_seed(std::uint64_t seed) { return CounterRng::mix64(seed ^ 0x6d61736bULL); }
std::uint64_t noise_seed(std::uint64_t seed, std::size_t channel) { return seed + 1000003ULL * channel; }

std::optional<PixelMask> parse_mask(const std::string& text, int height, int width, std::uint64_t seed) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (text == "none") return std::nullopt;
  if (kind == "bernoulli" && !arg.empty()) {
    return bernoulli_mask(height, width, to_real(arg, "--mask"), mask_seed(seed));
  }
  if (kind == "file" && !arg.empty()) {
    const MultiImage m = read_image(arg);
    if (m.height() != height || m.width() != width) {
      throw UsageError("--mask file " + arg + " is " + std::to_string(m.height()) + "x" + std::to_string(m.width()) +
                       ", image is " + std::to_string(height) + "x" + std::to_string(width));
    }
    return mask_from_image(m[0]);
  }
  throw UsageError("--mask expects bernoulli:P, file:PATH or none, got '" + text + "'");
}

Boundary parse_boundary(const std::string& s) { return s == "neumann" ? Boundary::neumann : Boundary::periodic; }

// H = K S (mask after blur), either factor optional.
LinearOp degradation_op(int h, int w, const std::optional<BlurKernel>& blur, const std::optional<PixelMask>& mask,
                        Boundary bc) {
  std::optional<LinearOp> op;
  if (blur) op = LinearOp::convolution(h, w, *blur, bc);
  if (mask) op = op ? compose(LinearOp::mask(*mask), *op) : LinearOp::mask(*mask);
  return op ? *op : LinearOp::identity(Shape::scalar(h, w));
}

// "out/x.pgm" + "_mask" -> "out/x_mask.pgm"
std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

unsigned thread_cap() {
  const char* env = std::getenv("TVDECOMP_THREADS");
  if (env == nullptr) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  return (end != env && *end == '\0' && v > 0) ? static_cast<unsigned>(v) : 0;
}

// All planes stacked into one image, for a single correlation over every sample.
Image stacked(const MultiImage& img) {
  if (img.channels() == 1) return img[0];
  Image out(img.height() * static_cast<int>(img.channels()), img.width());
  std::size_t k = 0;
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (double v : img[c].values()) out[k++] = v;
  return out;
}

// Stretched for display; a constant texture (no texture found) is written as is.
Image display_texture(const Image& v) {
  const auto [lo, hi] = std::minmax_element(v.data().begin(), v.data().end());
  return *lo == *hi ? clamp_to_unit(v) : normalize_texture(v);
}

// ---------------------------------------------------------------------------

struct DegradeArgs {
  std::string in, out, mask_out;
  std::string blur = "none", noise = "none", mask = "none", boundary = "periodic";
  std::uint64_t seed = 0;
};

int cmd_degrade(const DegradeArgs& a, std::ostream& out) {
  const MultiImage input = read_image(a.in);
  const int h = input.height(), w = input.width();
  const auto blur = parse_blur(a.blur);
  const auto noise = parse_noise(a.noise);
  const auto mask = parse_mask(a.mask, h, w, a.seed);
  const Boundary bc = parse_boundary(a.boundary);

  std::vector<Image> planes;
  for (std::size_t c = 0; c < input.channels(); ++c) {
    Image p = input[c];
    if (blur) p = convolve(p, *blur, bc);
    if (noise) p = add_gaussian_noise(p, noise->mean, noise->variance, noise_seed(a.seed, c));
    if (mask) p = apply_mask(p, *mask);
    planes.push_back(clamp_to_unit(p));
  }
  const MultiImage degraded(std::move(planes));
  write_image(degraded, a.out);
  if (mask) write_image(mask->keep(), a.mask_out.empty() ? with_suffix(a.out, "_mask") : a.mask_out);
  out << "psnr0=" << format_real(psnr(input, degraded)) << '\n';
  return 0;
}

struct DecomposeArgs {
  std::string in, out_prefix, trace, reference, ext;
  std::string blur = "none", mask = "none", s = "1", boundary = "periodic", preset, linear_solver = "auto";
  double tv_weight = NAN, texture_weight = NAN, penalty = NAN;
  double step = 1.618, tol = 1e-3, cg_tol = 1e-10;
  int max_iters = 70, cg_max_iters = 500;
  std::uint64_t seed = 0;
  bool componentwise = false;
};

int cmd_decompose(const DecomposeArgs& a, std::ostream& out) {
  const MultiImage observed = read_image(a.in);
  const int h = observed.height(), w = observed.width();
  const auto blur = parse_blur(a.blur);
  const auto mask = parse_mask(a.mask, h, w, a.seed);
  const Boundary bc = parse_boundary(a.boundary);

  // Without an explicit preset, pick the one matching the declared degradation.
  Preset preset = blur ? (mask ? Preset::case4 : Preset::case2) : (mask ? Preset::case3 : Preset::case1);
  if (!a.preset.empty()) preset = parse_preset(a.preset);
  const PresetValues pv = preset_values(preset);

  SolverParams params;
  params.penalty = std::isnan(a.penalty) ? pv.penalty : a.penalty;
  params.step_length = a.step;
  params.max_iters = a.max_iters;
  params.tol = a.tol;
  params.cg_tol = a.cg_tol;
  params.cg_max_iters = a.cg_max_iters;
  params.linear_solver = a.linear_solver == "spectral" ? LinearSolver::spectral
                         : a.linear_solver == "cg"     ? LinearSolver::cg
                                                       : LinearSolver::automatic;
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::optional<MultiImage> reference;
  if (!a.reference.empty()) {
    reference = read_image(a.reference);
    if (reference->height() != h || reference->width() != w || reference->channels() != observed.channels()) {
      throw UsageError("--reference does not match the input image dimensions");
    }
  }

  const LinearOp op = degradation_op(h, w, blur, mask, bc);
  std::vector<ModelSpec> specs;
  std::vector<DecomposeOptions> options;
  for (std::size_t c = 0; c < observed.channels(); ++c) {
    ModelSpec spec;
    spec.degradation = op;
    spec.observed = observed[c];
    spec.tv_weight = std::isnan(a.tv_weight) ? pv.tv_weight : a.tv_weight;
    spec.texture_weight = std::isnan(a.texture_weight) ? pv.texture_weight : a.texture_weight;
    spec.texture_norm = parse_snorm(a.s);
    spec.grouping = a.componentwise ? ShrinkGrouping::componentwise : ShrinkGrouping::isotropic;
    spec.boundary = bc;
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    specs.push_back(std::move(spec));
    DecomposeOptions o;
    if (reference) o.reference = (*reference)[c];
    options.push_back(std::move(o));
  }

  const std::vector<DecompositionResult> results = decompose_channels(specs, params, options, thread_cap());

  std::vector<Image> cartoon, texture, restored;
  int iters = 0;
  double tol = 0.0, corr_sum = 0.0;
  int corr_count = 0;
  for (std::size_t c = 0; c < results.size(); ++c) {
    const DecompositionResult& r = results[c];
    cartoon.push_back(r.cartoon);
    texture.push_back(display_texture(r.texture));
    restored.push_back(r.restored);
    iters = std::max(iters, r.iterations);
    tol = std::max(tol, r.residual.tol);
    if (!r.trace.empty() && r.trace.back().corr) {
      corr_sum += *r.trace.back().corr;
      ++corr_count;
    }
    if (!a.trace.empty()) {
      write_trace(r.trace, results.size() == 1 ? a.trace : with_suffix(a.trace, "_c" + std::to_string(c)));
    }
  }

  const std::string ext = !a.ext.empty() ? a.ext : (observed.channels() == 1 ? "pgm" : "ppm");
  const MultiImage restored_img(restored);
  write_image(MultiImage(cartoon), a.out_prefix + "_cartoon." + ext);
  write_image(MultiImage(texture), a.out_prefix + "_texture." + ext);
  write_image(restored_img, a.out_prefix + "_restored." + ext);

  out << "iters=" << iters << '\n';
  out << "tol=" << format_real(tol) << '\n';
  out << "psnr=" << (reference ? format_real(psnr(*reference, restored_img)) : "nan") << '\n';
  out << "corr=" << (corr_count > 0 ? format_real(corr_sum / corr_count) : "nan") << '\n';
  return 0;
}

struct MetricsArgs {
  std::string a, b;
  double imax = 1.0;
};

int cmd_metrics(const MetricsArgs& m, std::ostream& out) {
  const MultiImage a = read_image(m.a);
  const MultiImage b = read_image(m.b);
  if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels()) {
    throw UsageError("images differ in size: " + m.a + " vs " + m.b);
  }
  const double e = mse(a, b);
  out << "mse=" << format_real(e) << '\n';
  out << "psnr=" << format_real(psnr_from_mse(e, m.imax)) << '\n';
  try {
    const double c = correlation(stacked(a), stacked(b));
    out << "corr=" << format_real(c) << '\n';
  } catch (const ZeroVarianceError&) {
  }
  return 0;
}

struct SynthArgs {
  SynthOptions options;
  std::string out_prefix, ext = "pgm";
};

int cmd_synth(const SynthArgs& s, std::ostream& out) {
  SynthImage img;
  try {
    img = synth_cartoon_texture(s.options);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  // The texture truth is zero-mean; it is stored shifted by +0.5.
  Image shifted = img.texture;
  for (double& v : shifted.values()) v += 0.5;
  write_image(img.clean, s.out_prefix + "_clean." + s.ext);
  write_image(img.cartoon, s.out_prefix + "_cartoon." + s.ext);
  write_image(shifted, s.out_prefix + "_texture." + s.ext);
  out << "wrote " << s.out_prefix << "_{clean,cartoon,texture}." << s.ext << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cartoon + texture decomposition and restoration by a dual ADMM"};
  app.name("tvdecomp");
  app.require_subcommand(1);

  const auto spec_grammar = "gaussian:H,S | disk:R | none";
  const auto mask_grammar = "bernoulli:P | file:PATH | none";
  const std::vector<std::string> boundaries = {"periodic", "neumann"};
  const std::vector<std::string> exts = {"pgm", "ppm", "pnm", "png"};

  DegradeArgs da;
  auto* deg = app.add_subcommand("degrade", "Blur, add noise to and mask an image");
  deg->add_option("--in", da.in, "Input image")->required();
  deg->add_option("--out", da.out, "Degraded output image")->required();
  deg->add_option("--blur", da.blur, spec_grammar);
  deg->add_option("--noise", da.noise, "gaussian:MEAN,VAR | none");
  deg->add_option("--mask", da.mask, mask_grammar);
  deg->add_option("--mask-out", da.mask_out, "Where to write the mask (default <out>_mask)");
  deg->add_option("--seed", da.seed, "Seed for noise and random masks");
  deg->add_option("--boundary", da.boundary, "Convolution boundary")->check(CLI::IsMember(boundaries));

  DecomposeArgs xa;
  auto* dec = app.add_subcommand("decompose", "Split an observed image into cartoon and texture");
  dec->add_option("--in", xa.in, "Observed image")->required();
  dec->add_option("--out-prefix", xa.out_prefix, "Prefix of the output images")->required();
  dec->add_option("--blur", xa.blur, "Blur in the degradation model: " + std::string(spec_grammar));
  dec->add_option("--mask", xa.mask, "Mask in the degradation model: " + std::string(mask_grammar));
  dec->add_option("--seed", xa.seed, "Seed used to regenerate a bernoulli mask");
  dec->add_option("--s", xa.s, "Texture norm exponent")->check(CLI::IsMember({"1", "2", "inf"}));
  dec->add_flag("--componentwise", xa.componentwise, "Shrink texture components separately");
  dec->add_option("--tv-weight", xa.tv_weight, "Cartoon TV weight");
  dec->add_option("--texture-weight", xa.texture_weight, "Texture norm weight");
  dec->add_option("--penalty", xa.penalty, "Augmented Lagrangian penalty");
  dec->add_option("--step", xa.step, "Multiplier step length in (0, 1.618034)");
  dec->add_option("--max-iters", xa.max_iters, "Iteration cap");
  dec->add_option("--tol", xa.tol, "Stopping tolerance on the KKT residual");
  dec->add_option("--preset", xa.preset, "Parameter preset")
      ->check(CLI::IsMember({"case1", "case2", "case3", "case4"}));
  dec->add_option("--linear-solver", xa.linear_solver, "u-subproblem solver")
      ->check(CLI::IsMember({"auto", "spectral", "cg"}));
  dec->add_option("--cg-tol", xa.cg_tol, "Relative CG tolerance");
  dec->add_option("--cg-max-iters", xa.cg_max_iters, "CG iteration cap");
  dec->add_option("--boundary", xa.boundary, "Boundary of grad/div and blur")->check(CLI::IsMember(boundaries));
  dec->add_option("--trace", xa.trace, "CSV trace output");
  dec->add_option("--reference", xa.reference, "Ground truth for PSNR");
  dec->add_option("--ext", xa.ext, "Output image format")->check(CLI::IsMember(exts));

  MetricsArgs ma;
  auto* met = app.add_subcommand("metrics", "Compare two images");
  met->add_option("--a", ma.a, "First image")->required();
  met->add_option("--b", ma.b, "Second image")->required();
  met->add_option("--imax", ma.imax, "Peak intensity");

  SynthArgs sa;
  auto* syn = app.add_subcommand("synth", "Generate a cartoon + texture test image");
  syn->add_option("--height", sa.options.height);
  syn->add_option("--width", sa.options.width);
  syn->add_option("--stripe-period", sa.options.stripe_period);
  syn->add_option("--amplitude", sa.options.amplitude, "Stripe amplitude in [0, 0.25]");
  syn->add_option("--seed", sa.options.seed);
  syn->add_flag("--flat", sa.options.flat_cartoon, "Flat 0.5 cartoon");
  syn->add_option("--out-prefix", sa.out_prefix)->required();
  syn->add_option("--ext", sa.ext, "Output image format")->check(CLI::IsMember(exts));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : kUsage;
  }

  try {
    if (deg->parsed()) return cmd_degrade(da, out);
    if (dec->parsed()) return cmd_decompose(xa, out);
    if (met->parsed()) return cmd_metrics(ma, out);
    if (syn->parsed()) return cmd_synth(sa, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kFileError;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace tvdecomp
