#include "tvdecomp/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tvdecomp {

namespace {

std::size_t checked_area(int height, int width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("image dimensions must be positive, got " +
                                std::to_string(height) + "x" + std::to_string(width));
  }
  return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
}

}  // namespace

Image::Image(int height, int width, double fill)
    : height_(height), width_(width), data_(checked_area(height, width), fill) {}

Image::Image(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (data_.size() != checked_area(height, width)) {
    throw DimensionError("image data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(height) + "x" +
                         std::to_string(width));
  }
}

bool Image::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Image& Image::operator+=(const Image& rhs) {
  require_same_shape(*this, rhs, "image addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Image& Image::operator-=(const Image& rhs) {
  require_same_shape(*this, rhs, "image subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Image& Image::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Image& Image::axpy(double alpha, const Image& x) {
  require_same_shape(*this, x, "axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += alpha * x.data_[i];
  return *this;
}

Image operator+(Image lhs, const Image& rhs) { return lhs += rhs; }
Image operator-(Image lhs, const Image& rhs) { return lhs -= rhs; }
Image operator*(double s, Image img) { return img *= s; }

double dot(const Image& a, const Image& b) {
  require_same_shape(a, b, "dot product");
  return std::inner_product(a.data().begin(), a.data().end(), b.data().begin(), 0.0);
}

double norm(const Image& a) { return std::sqrt(dot(a, a)); }

VectorField::VectorField(int height, int width) : g1_(height, width), g2_(height, width) {}

VectorField::VectorField(Image g1, Image g2) : g1_(std::move(g1)), g2_(std::move(g2)) {
  require_same_shape(g1_, g2_, "vector field components");
}

double VectorField::magnitude(std::size_t i) const { return std::hypot(g1_[i], g2_[i]); }

Image VectorField::magnitudes() const {
  Image out(height(), width());
  for (std::size_t i = 0; i < pixels(); ++i) out[i] = magnitude(i);
  return out;
}

VectorField& VectorField::operator+=(const VectorField& rhs) {
  g1_ += rhs.g1_;
  g2_ += rhs.g2_;
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& rhs) {
  g1_ -= rhs.g1_;
  g2_ -= rhs.g2_;
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  g1_ *= s;
  g2_ *= s;
  return *this;
}

VectorField& VectorField::axpy(double alpha, const VectorField& x) {
  g1_.axpy(alpha, x.g1_);
  g2_.axpy(alpha, x.g2_);
  return *this;
}

VectorField operator+(VectorField lhs, const VectorField& rhs) { return lhs += rhs; }
VectorField operator-(VectorField lhs, const VectorField& rhs) { return lhs -= rhs; }
VectorField operator*(double s, VectorField f) { return f *= s; }

double dot(const VectorField& a, const VectorField& b) {
  return dot(a.g1(), b.g1()) + dot(a.g2(), b.g2());
}

double norm(const VectorField& a) { return std::sqrt(dot(a, a)); }

MultiImage::MultiImage(std::vector<Image> channels) : channels_(std::move(channels)) {
  if (channels_.empty()) throw std::invalid_argument("multi-channel image needs at least one channel");
  for (const auto& c : channels_) require_same_shape(channels_.front(), c, "image channels");
}

MultiImage::MultiImage(Image gray) { channels_.push_back(std::move(gray)); }

Image from_bytes(int height, int width, std::span<const std::uint8_t> raw, double max_intensity) {
  if (!(max_intensity > 0.0) || !std::isfinite(max_intensity)) {
    throw std::invalid_argument("max_intensity must be positive");
  }
  Image out(height, width);
  if (raw.size() != out.size()) {
    throw DimensionError("raw buffer holds " + std::to_string(raw.size()) + " samples, expected " +
                         std::to_string(out.size()));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<double>(raw[i]) / max_intensity;
  return out;
}

Image clamp_to_unit(const Image& img) {
  require_finite(img, "clamp input");
  Image out = img;
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

void require_finite(const Image& img, const std::string& what) {
  if (!img.all_finite()) throw NonFiniteError(what + " contains NaN or Inf");
}

void require_finite(const VectorField& field, const std::string& what) {
  if (!field.all_finite()) throw NonFiniteError(what + " contains NaN or Inf");
}

void require_same_shape(const Image& a, const Image& b, const std::string& what) {
  if (!a.same_shape(b)) {
    throw DimensionError(what + ": shape mismatch " + std::to_string(a.height()) + "x" +
                         std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                         std::to_string(b.width()));
  }
}

}  // namespace tvdecomp
