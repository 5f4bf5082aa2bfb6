#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "tvdecomp/image.hpp"

namespace tvdecomp {

/// Boundary convention shared by the difference operators and convolution.
/// Neumann differences vanish on the last row/column; convolution under
/// Neumann replicates edge pixels.
enum class Boundary { neumann, periodic };

std::string to_string(Boundary bc);

/// Forward differences: g1 horizontal (along columns), g2 vertical (along rows).
VectorField grad(const Image& u, Boundary bc = Boundary::neumann);

/// div = -grad^T under the same boundary convention.
Image div(const VectorField& g, Boundary bc = Boundary::neumann);

/// Normalized, nonnegative 2-D filter taps with an anchor tap.
class BlurKernel {
public:
  /// Normalizes `taps` to unit sum. Anchor defaults to (rows/2, cols/2).
  explicit BlurKernel(Image taps);
  BlurKernel(Image taps, int anchor_row, int anchor_col);

  static BlurKernel delta() { return BlurKernel(Image(1, 1, 1.0)); }

  const Image& taps() const { return taps_; }
  int rows() const { return taps_.height(); }
  int cols() const { return taps_.width(); }
  int anchor_row() const { return anchor_row_; }
  int anchor_col() const { return anchor_col_; }

private:
  Image taps_;
  int anchor_row_;
  int anchor_col_;
};

/// Binary observation mask (1 = observed, 0 = missing).
class PixelMask {
public:
  /// Throws unless every entry is exactly 0 or 1.
  explicit PixelMask(Image keep);
  static PixelMask all_observed(int height, int width) { return PixelMask(Image(height, width, 1.0)); }

  const Image& keep() const { return keep_; }
  int height() const { return keep_.height(); }
  int width() const { return keep_.width(); }
  std::size_t observed_count() const;

private:
  Image keep_;
};

/// Linear shift-invariant filtering, (k * img)(r,c) = sum_ab k(a,b) img(r-a+ar, c-b+ac).
/// Periodic mode goes through the DFT; neumann mode sums directly with edge replication.
Image convolve(const Image& img, const BlurKernel& k, Boundary bc);
/// Exact adjoint of convolve (correlation, or a scatter for replicate borders).
Image convolve_adjoint(const Image& img, const BlurKernel& k, Boundary bc);

/// DFT of the kernel embedded (and wrapped) on an h x w periodic grid, anchor at the origin.
std::vector<std::complex<double>> kernel_spectrum(const BlurKernel& k, int height, int width);

/// Hadamard product with the mask.
Image apply_mask(const Image& img, const PixelMask& m);

/// Domain/codomain descriptor.
struct Shape {
  enum class Kind { scalar, vector };
  Kind kind = Kind::scalar;
  int height = 0;
  int width = 0;

  static Shape scalar(int h, int w) { return {Kind::scalar, h, w}; }
  static Shape vector(int h, int w) { return {Kind::vector, h, w}; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

using Signal = std::variant<Image, VectorField>;

Shape shape_of(const Signal& s);
double dot(const Signal& a, const Signal& b);
double norm(const Signal& a);

/// Immutable linear map with an exact adjoint. Cheap to copy (shared node).
class LinearOp {
public:
  enum class Kind { identity, gradient, divergence, convolution, mask, composition, scaled, sum, transpose };

  static LinearOp identity(Shape s);
  static LinearOp gradient(int height, int width, Boundary bc);
  static LinearOp divergence(int height, int width, Boundary bc);
  static LinearOp convolution(int height, int width, BlurKernel k, Boundary bc);
  static LinearOp mask(PixelMask m);
  static LinearOp scaled(double factor, LinearOp op);
  static LinearOp sum(LinearOp lhs, LinearOp rhs);
  /// Operator whose apply is op.adjoint and vice versa.
  static LinearOp transpose(LinearOp op);

  Kind kind() const;
  Shape in_shape() const;
  Shape out_shape() const;

  Signal apply(const Signal& x) const;
  Signal adjoint(const Signal& y) const;

  // Typed conveniences; throw if the shapes do not fit.
  Image apply_to_image(const Signal& x) const;
  Image adjoint_to_image(const Signal& y) const;
  VectorField apply_to_field(const Signal& x) const;
  VectorField adjoint_to_field(const Signal& y) const;

  // Introspection used for solver dispatch.
  Boundary boundary() const;                       // gradient/divergence/convolution
  const BlurKernel& kernel() const;                // convolution
  const PixelMask& mask_data() const;              // mask
  double factor() const;                           // scaled
  const LinearOp& first() const;                   // composition: outer; scaled/transpose: operand; sum: lhs
  const LinearOp& second() const;                  // composition: inner; sum: rhs
  /// Compositions flattened outer-to-inner; a non-composition yields itself.
  std::vector<LinearOp> factors() const;

  std::string describe() const;

  struct Node;

private:
  explicit LinearOp(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;

  friend LinearOp compose(LinearOp outer, LinearOp inner);
};

/// outer after inner; throws DimensionError if inner's codomain differs from outer's domain.
LinearOp compose(LinearOp outer, LinearOp inner);

/// Random signal of a given shape, entries uniform on [-1,1).
Signal random_signal(const Shape& s, std::uint64_t seed, std::uint64_t stream = 0);

/// max over trials of |<Ax,y> - <x,A^T y>| / (1 + |<Ax,y>|) on seeded random x, y.
double adjoint_check(const LinearOp& op, int trials, std::uint64_t seed);

}  // namespace tvdecomp
