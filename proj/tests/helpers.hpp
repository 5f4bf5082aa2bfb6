#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tvdecomp/image.hpp"
#include "tvdecomp/random.hpp"

namespace testing {

inline oracle::Vec to_vec(const tvdecomp::Image& img) { return img.data(); }

inline oracle::Vec to_vec(const tvdecomp::VectorField& f) {
  oracle::Vec v = f.g1().data();
  v.insert(v.end(), f.g2().data().begin(), f.g2().data().end());
  return v;
}

inline tvdecomp::Image to_image(const oracle::Vec& v, int h, int w) { return tvdecomp::Image(h, w, v); }

inline tvdecomp::VectorField to_field(const oracle::Vec& v, int h, int w) {
  const auto n = static_cast<std::ptrdiff_t>(h) * w;
  return tvdecomp::VectorField(tvdecomp::Image(h, w, oracle::Vec(v.begin(), v.begin() + n)),
                               tvdecomp::Image(h, w, oracle::Vec(v.begin() + n, v.end())));
}

inline tvdecomp::Image random_image(int h, int w, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  tvdecomp::CounterRng rng(seed, 77);
  tvdecomp::Image img(h, w);
  for (double& v : img.values()) v = lo + (hi - lo) * rng.uniform();
  return img;
}

inline tvdecomp::VectorField random_field(int h, int w, std::uint64_t seed, double scale = 1.0) {
  return tvdecomp::VectorField(random_image(h, w, 2 * seed + 1, -scale, scale),
                               random_image(h, w, 2 * seed + 2, -scale, scale));
}

inline double l2_diff(const oracle::Vec& a, const oracle::Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double l2(const oracle::Vec& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline std::filesystem::path tmp_dir(const std::string& name) {
  const auto dir = std::filesystem::path(TVDECOMP_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

}  // namespace testing
