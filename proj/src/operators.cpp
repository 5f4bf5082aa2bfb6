#include "tvdecomp/operators.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "tvdecomp/random.hpp"
#include "tvdecomp/spectral.hpp"

namespace tvdecomp {

std::string to_string(Boundary bc) { return bc == Boundary::periodic ? "periodic" : "neumann"; }

VectorField grad(const Image& u, Boundary bc) {
  const int h = u.height(), w = u.width();
  VectorField g(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double dx = 0.0, dy = 0.0;
      if (c + 1 < w) {
        dx = u(r, c + 1) - u(r, c);
      } else if (bc == Boundary::periodic) {
        dx = u(r, 0) - u(r, c);
      }
      if (r + 1 < h) {
        dy = u(r + 1, c) - u(r, c);
      } else if (bc == Boundary::periodic) {
        dy = u(0, c) - u(r, c);
      }
      g.g1()(r, c) = dx;
      g.g2()(r, c) = dy;
    }
  }
  return g;
}

Image div(const VectorField& g, Boundary bc) {
  const int h = g.height(), w = g.width();
  const Image& p1 = g.g1();
  const Image& p2 = g.g2();
  Image out(h, w);
  if (bc == Boundary::periodic) {
    for (int r = 0; r < h; ++r) {
      const int rp = (r == 0) ? h - 1 : r - 1;
      for (int c = 0; c < w; ++c) {
        const int cp = (c == 0) ? w - 1 : c - 1;
        out(r, c) = p1(r, c) - p1(r, cp) + p2(r, c) - p2(rp, c);
      }
    }
    return out;
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double v = 0.0;
      if (c + 1 < w) v += p1(r, c);
      if (c > 0) v -= p1(r, c - 1);
      if (r + 1 < h) v += p2(r, c);
      if (r > 0) v -= p2(r - 1, c);
      out(r, c) = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernels and masks

namespace {

Image normalized_taps(Image taps) {
  double total = 0.0;
  for (double v : taps.values()) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("blur kernel taps must be finite and nonnegative");
    total += v;
  }
  if (!(total > 0.0)) throw std::invalid_argument("blur kernel taps must have positive sum");
  taps *= 1.0 / total;
  return taps;
}

}  // namespace

BlurKernel::BlurKernel(Image taps) : BlurKernel(taps, taps.height() / 2, taps.width() / 2) {}

BlurKernel::BlurKernel(Image taps, int anchor_row, int anchor_col)
    : taps_(normalized_taps(std::move(taps))), anchor_row_(anchor_row), anchor_col_(anchor_col) {
  if (anchor_row < 0 || anchor_row >= taps_.height() || anchor_col < 0 || anchor_col >= taps_.width()) {
    throw std::invalid_argument("blur kernel anchor outside the taps");
  }
}

PixelMask::PixelMask(Image keep) : keep_(std::move(keep)) {
  for (double v : keep_.values()) {
    if (v != 0.0 && v != 1.0) throw std::invalid_argument("pixel mask entries must be exactly 0 or 1");
  }
}

std::size_t PixelMask::observed_count() const {
  return static_cast<std::size_t>(std::count(keep_.data().begin(), keep_.data().end(), 1.0));
}

Image apply_mask(const Image& img, const PixelMask& m) {
  require_same_shape(img, m.keep(), "apply_mask");
  Image out = img;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= m.keep()[i];
  return out;
}

// ---------------------------------------------------------------------------
// Convolution

namespace {

int wrap(int i, int n) {
  const int m = i % n;
  return m < 0 ? m + n : m;
}

}  // namespace

Spectrum kernel_spectrum(const BlurKernel& k, int h, int w) {
  if (k.rows() > h || k.cols() > w) {
    throw std::invalid_argument("blur kernel " + std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                                " larger than image " + std::to_string(h) + "x" + std::to_string(w) +
                                " in periodic mode");
  }
  Image embedded(h, w);
  for (int a = 0; a < k.rows(); ++a) {
    for (int b = 0; b < k.cols(); ++b) {
      embedded(wrap(a - k.anchor_row(), h), wrap(b - k.anchor_col(), w)) += k.taps()(a, b);
    }
  }
  return dft_for(h, w)->forward(embedded);
}

namespace {

Image spectral_filter(const Image& img, const Spectrum& symbol, bool conjugate) {
  auto dft = dft_for(img.height(), img.width());
  Spectrum x = dft->forward(img);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= conjugate ? std::conj(symbol[i]) : symbol[i];
  return dft->inverse(x);
}

Image replicate_convolve(const Image& img, const BlurKernel& k) {
  const int h = img.height(), w = img.width();
  Image out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int a = 0; a < k.rows(); ++a) {
        const int rr = std::clamp(r - a + k.anchor_row(), 0, h - 1);
        for (int b = 0; b < k.cols(); ++b) {
          const int cc = std::clamp(c - b + k.anchor_col(), 0, w - 1);
          acc += k.taps()(a, b) * img(rr, cc);
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

Image replicate_convolve_adjoint(const Image& img, const BlurKernel& k) {
  const int h = img.height(), w = img.width();
  Image out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double y = img(r, c);
      for (int a = 0; a < k.rows(); ++a) {
        const int rr = std::clamp(r - a + k.anchor_row(), 0, h - 1);
        for (int b = 0; b < k.cols(); ++b) {
          const int cc = std::clamp(c - b + k.anchor_col(), 0, w - 1);
          out(rr, cc) += k.taps()(a, b) * y;
        }
      }
    }
  }
  return out;
}

}  // namespace

Image convolve(const Image& img, const BlurKernel& k, Boundary bc) {
  if (bc == Boundary::periodic) {
    return spectral_filter(img, kernel_spectrum(k, img.height(), img.width()), false);
  }
  return replicate_convolve(img, k);
}

Image convolve_adjoint(const Image& img, const BlurKernel& k, Boundary bc) {
  if (bc == Boundary::periodic) {
    return spectral_filter(img, kernel_spectrum(k, img.height(), img.width()), true);
  }
  return replicate_convolve_adjoint(img, k);
}

// ---------------------------------------------------------------------------
// Signals

std::string to_string(const Shape& s) {
  return std::string(s.kind == Shape::Kind::scalar ? "image" : "field") + "[" + std::to_string(s.height) +
         "x" + std::to_string(s.width) + "]";
}

Shape shape_of(const Signal& s) {
  if (const auto* img = std::get_if<Image>(&s)) return Shape::scalar(img->height(), img->width());
  const auto& f = std::get<VectorField>(s);
  return Shape::vector(f.height(), f.width());
}

double dot(const Signal& a, const Signal& b) {
  if (shape_of(a) != shape_of(b)) throw DimensionError("dot: signal shapes differ");
  if (const auto* img = std::get_if<Image>(&a)) return dot(*img, std::get<Image>(b));
  return dot(std::get<VectorField>(a), std::get<VectorField>(b));
}

double norm(const Signal& a) { return std::sqrt(dot(a, a)); }

namespace {

Signal zeros_like(const Shape& s) {
  if (s.kind == Shape::Kind::scalar) return Image(s.height, s.width);
  return VectorField(s.height, s.width);
}

void add_to(Signal& acc, const Signal& x) {
  if (auto* img = std::get_if<Image>(&acc)) {
    *img += std::get<Image>(x);
  } else {
    std::get<VectorField>(acc) += std::get<VectorField>(x);
  }
}

void scale(Signal& s, double a) {
  std::visit([a](auto& v) { v *= a; }, s);
}

}  // namespace

Signal random_signal(const Shape& s, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  auto fill = [&rng](Image& img) {
    for (double& v : img.values()) v = 2.0 * rng.uniform() - 1.0;
  };
  Signal out = zeros_like(s);
  if (auto* img = std::get_if<Image>(&out)) {
    fill(*img);
  } else {
    auto& f = std::get<VectorField>(out);
    fill(f.g1());
    fill(f.g2());
  }
  return out;
}

// ---------------------------------------------------------------------------
// LinearOp

struct LinearOp::Node {
  Kind kind;
  Shape in;
  Shape out;
  Boundary bc = Boundary::neumann;
  std::optional<BlurKernel> kernel;
  Spectrum kernel_symbol;  // periodic convolution only
  std::optional<PixelMask> mask;
  double factor = 1.0;
  std::optional<LinearOp> first;
  std::optional<LinearOp> second;
};

LinearOp LinearOp::identity(Shape s) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::identity;
  n->in = n->out = s;
  return LinearOp(std::move(n));
}

LinearOp LinearOp::gradient(int height, int width, Boundary bc) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::gradient;
  n->in = Shape::scalar(height, width);
  n->out = Shape::vector(height, width);
  n->bc = bc;
  return LinearOp(std::move(n));
}

LinearOp LinearOp::divergence(int height, int width, Boundary bc) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::divergence;
  n->in = Shape::vector(height, width);
  n->out = Shape::scalar(height, width);
  n->bc = bc;
  return LinearOp(std::move(n));
}

LinearOp LinearOp::convolution(int height, int width, BlurKernel k, Boundary bc) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::convolution;
  n->in = n->out = Shape::scalar(height, width);
  n->bc = bc;
  if (bc == Boundary::periodic) n->kernel_symbol = kernel_spectrum(k, height, width);
  n->kernel = std::move(k);
  return LinearOp(std::move(n));
}

LinearOp LinearOp::mask(PixelMask m) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::mask;
  n->in = n->out = Shape::scalar(m.height(), m.width());
  n->mask = std::move(m);
  return LinearOp(std::move(n));
}

LinearOp LinearOp::scaled(double factor, LinearOp op) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::scaled;
  n->in = op.in_shape();
  n->out = op.out_shape();
  n->factor = factor;
  n->first = std::move(op);
  return LinearOp(std::move(n));
}

LinearOp LinearOp::sum(LinearOp lhs, LinearOp rhs) {
  if (lhs.in_shape() != rhs.in_shape() || lhs.out_shape() != rhs.out_shape()) {
    throw DimensionError("sum of operators with different shapes");
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::sum;
  n->in = lhs.in_shape();
  n->out = lhs.out_shape();
  n->first = std::move(lhs);
  n->second = std::move(rhs);
  return LinearOp(std::move(n));
}

LinearOp LinearOp::transpose(LinearOp op) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::transpose;
  n->in = op.out_shape();
  n->out = op.in_shape();
  n->first = std::move(op);
  return LinearOp(std::move(n));
}

LinearOp compose(LinearOp outer, LinearOp inner) {
  if (inner.out_shape() != outer.in_shape()) {
    throw DimensionError("compose: inner codomain " + to_string(inner.out_shape()) +
                         " does not match outer domain " + to_string(outer.in_shape()));
  }
  auto n = std::make_shared<LinearOp::Node>();
  n->kind = LinearOp::Kind::composition;
  n->in = inner.in_shape();
  n->out = outer.out_shape();
  n->first = std::move(outer);
  n->second = std::move(inner);
  return LinearOp(std::move(n));
}

LinearOp::Kind LinearOp::kind() const { return node_->kind; }
Shape LinearOp::in_shape() const { return node_->in; }
Shape LinearOp::out_shape() const { return node_->out; }

Signal LinearOp::apply(const Signal& x) const {
  const Node& n = *node_;
  if (shape_of(x) != n.in) {
    throw DimensionError("apply: expected " + to_string(n.in) + ", got " + to_string(shape_of(x)));
  }
  switch (n.kind) {
    case Kind::identity:
      return x;
    case Kind::gradient:
      return grad(std::get<Image>(x), n.bc);
    case Kind::divergence:
      return div(std::get<VectorField>(x), n.bc);
    case Kind::convolution:
      if (n.bc == Boundary::periodic) return spectral_filter(std::get<Image>(x), n.kernel_symbol, false);
      return replicate_convolve(std::get<Image>(x), *n.kernel);
    case Kind::mask:
      return apply_mask(std::get<Image>(x), *n.mask);
    case Kind::composition:
      return n.first->apply(n.second->apply(x));
    case Kind::scaled: {
      Signal y = n.first->apply(x);
      scale(y, n.factor);
      return y;
    }
    case Kind::sum: {
      Signal y = n.first->apply(x);
      add_to(y, n.second->apply(x));
      return y;
    }
    case Kind::transpose:
      return n.first->adjoint(x);
  }
  throw std::logic_error("unknown operator kind");
}

Signal LinearOp::adjoint(const Signal& y) const {
  const Node& n = *node_;
  if (shape_of(y) != n.out) {
    throw DimensionError("adjoint: expected " + to_string(n.out) + ", got " + to_string(shape_of(y)));
  }
  switch (n.kind) {
    case Kind::identity:
      return y;
    case Kind::gradient: {
      Image d = div(std::get<VectorField>(y), n.bc);
      d *= -1.0;
      return d;
    }
    case Kind::divergence: {
      VectorField g = grad(std::get<Image>(y), n.bc);
      g *= -1.0;
      return g;
    }
    case Kind::convolution:
      if (n.bc == Boundary::periodic) return spectral_filter(std::get<Image>(y), n.kernel_symbol, true);
      return replicate_convolve_adjoint(std::get<Image>(y), *n.kernel);
    case Kind::mask:
      return apply_mask(std::get<Image>(y), *n.mask);
    case Kind::composition:
      return n.second->adjoint(n.first->adjoint(y));
    case Kind::scaled: {
      Signal x = n.first->adjoint(y);
      scale(x, n.factor);
      return x;
    }
    case Kind::sum: {
      Signal x = n.first->adjoint(y);
      add_to(x, n.second->adjoint(y));
      return x;
    }
    case Kind::transpose:
      return n.first->apply(y);
  }
  throw std::logic_error("unknown operator kind");
}

Image LinearOp::apply_to_image(const Signal& x) const { return std::get<Image>(apply(x)); }
Image LinearOp::adjoint_to_image(const Signal& y) const { return std::get<Image>(adjoint(y)); }
VectorField LinearOp::apply_to_field(const Signal& x) const { return std::get<VectorField>(apply(x)); }
VectorField LinearOp::adjoint_to_field(const Signal& y) const { return std::get<VectorField>(adjoint(y)); }

Boundary LinearOp::boundary() const { return node_->bc; }

const BlurKernel& LinearOp::kernel() const {
  if (!node_->kernel) throw std::logic_error("operator has no kernel");
  return *node_->kernel;
}

const PixelMask& LinearOp::mask_data() const {
  if (!node_->mask) throw std::logic_error("operator has no mask");
  return *node_->mask;
}

double LinearOp::factor() const { return node_->factor; }

const LinearOp& LinearOp::first() const {
  if (!node_->first) throw std::logic_error("operator has no operands");
  return *node_->first;
}

const LinearOp& LinearOp::second() const {
  if (!node_->second) throw std::logic_error("operator has no second operand");
  return *node_->second;
}

std::vector<LinearOp> LinearOp::factors() const {
  if (kind() != Kind::composition) return {*this};
  auto out = first().factors();
  auto rest = second().factors();
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::string LinearOp::describe() const {
  switch (kind()) {
    case Kind::identity: return "I";
    case Kind::gradient: return "grad(" + to_string(boundary()) + ")";
    case Kind::divergence: return "div(" + to_string(boundary()) + ")";
    case Kind::convolution:
      return "conv" + std::to_string(kernel().rows()) + "x" + std::to_string(kernel().cols()) + "(" +
             to_string(boundary()) + ")";
    case Kind::mask: return "mask";
    case Kind::composition: return first().describe() + "*" + second().describe();
    case Kind::scaled: return std::to_string(factor()) + "*" + first().describe();
    case Kind::sum: return "(" + first().describe() + " + " + second().describe() + ")";
    case Kind::transpose: return first().describe() + "^T";
  }
  return "?";
}

double adjoint_check(const LinearOp& op, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("adjoint_check needs at least one trial");
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Signal x = random_signal(op.in_shape(), seed, 2 * static_cast<std::uint64_t>(t));
    const Signal y = random_signal(op.out_shape(), seed, 2 * static_cast<std::uint64_t>(t) + 1);
    const double lhs = dot(op.apply(x), y);
    const double rhs = dot(x, op.adjoint(y));
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
  }
  return worst;
}

}  // namespace tvdecomp
