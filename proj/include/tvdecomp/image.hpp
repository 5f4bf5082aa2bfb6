#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvdecomp {

/// Raised when an image or field contains NaN/Inf where finite data is required.
class NonFiniteError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when two grids that must agree in size do not.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Single-channel real image, row-major, nominal range [0,1].
class Image {
public:
  Image() = default;
  Image(int height, int width, double fill = 0.0);
  Image(int height, int width, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int row, int col) { return data_[index(row, col)]; }
  double operator()(int row, int col) const { return data_[index(row, col)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool all_finite() const;

  Image& operator+=(const Image& rhs);
  Image& operator-=(const Image& rhs);
  Image& operator*=(double s);
  /// this += alpha * x
  Image& axpy(double alpha, const Image& x);

private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

Image operator+(Image lhs, const Image& rhs);
Image operator-(Image lhs, const Image& rhs);
Image operator*(double s, Image img);

double dot(const Image& a, const Image& b);
double norm(const Image& a);

/// Pair of same-shaped grids g = (g1, g2); g1 is the horizontal component.
class VectorField {
public:
  VectorField() = default;
  VectorField(int height, int width);
  VectorField(Image g1, Image g2);

  int height() const { return g1_.height(); }
  int width() const { return g1_.width(); }
  std::size_t pixels() const { return g1_.size(); }

  Image& g1() { return g1_; }
  Image& g2() { return g2_; }
  const Image& g1() const { return g1_; }
  const Image& g2() const { return g2_; }

  /// |g|_i = sqrt(g1_i^2 + g2_i^2)
  double magnitude(std::size_t i) const;
  Image magnitudes() const;
  bool all_finite() const { return g1_.all_finite() && g2_.all_finite(); }
  bool same_shape(const VectorField& other) const { return g1_.same_shape(other.g1_); }
  bool matches(const Image& img) const { return g1_.same_shape(img); }

  VectorField& operator+=(const VectorField& rhs);
  VectorField& operator-=(const VectorField& rhs);
  VectorField& operator*=(double s);
  VectorField& axpy(double alpha, const VectorField& x);

private:
  Image g1_;
  Image g2_;
};

VectorField operator+(VectorField lhs, const VectorField& rhs);
VectorField operator-(VectorField lhs, const VectorField& rhs);
VectorField operator*(double s, VectorField f);

double dot(const VectorField& a, const VectorField& b);
double norm(const VectorField& a);

/// Ordered list of same-shaped channels (1 for grayscale, 3 for RGB).
class MultiImage {
public:
  MultiImage() = default;
  explicit MultiImage(std::vector<Image> channels);
  explicit MultiImage(Image gray);

  std::size_t channels() const { return channels_.size(); }
  int height() const { return channels_.front().height(); }
  int width() const { return channels_.front().width(); }
  const Image& operator[](std::size_t c) const { return channels_[c]; }
  Image& operator[](std::size_t c) { return channels_[c]; }
  const std::vector<Image>& planes() const { return channels_; }

private:
  std::vector<Image> channels_;
};

/// Scales raw integer samples in [0, max_intensity] onto [0,1].
Image from_bytes(int height, int width, std::span<const std::uint8_t> raw,
                 double max_intensity = 255.0);

/// Pointwise min(1, max(0, v)). Rejects NaN/Inf with NonFiniteError.
Image clamp_to_unit(const Image& img);

/// Throws NonFiniteError naming `what` if any value is NaN/Inf.
void require_finite(const Image& img, const std::string& what);
void require_finite(const VectorField& field, const std::string& what);

void require_same_shape(const Image& a, const Image& b, const std::string& what);

}  // namespace tvdecomp
