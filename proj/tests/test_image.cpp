#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "tvdecomp/image.hpp"

using namespace tvdecomp;

TEST_SUITE("image") {
  TEST_CASE("from_bytes scales by maxval") {
    const std::vector<std::uint8_t> one = {255};
    CHECK(from_bytes(1, 1, one)[0] == 1.0);
    const std::vector<std::uint8_t> two = {0, 255};
    const Image e = from_bytes(1, 2, two);
    CHECK(e[0] == 0.0);
    CHECK(e[1] == 1.0);
    const std::vector<std::uint8_t> mid = {128};
    CHECK(from_bytes(1, 1, mid)[0] == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
    CHECK_THROWS_AS(from_bytes(1, 1, mid, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(from_bytes(1, 1, mid, -3.0), std::invalid_argument);
  }

  TEST_CASE("from_bytes round-trips every 8-bit value") {
    std::vector<std::uint8_t> all(256);
    for (int i = 0; i < 256; ++i) all[i] = static_cast<std::uint8_t>(i);
    const Image img = from_bytes(16, 16, all);
    for (int i = 0; i < 256; ++i) CHECK(std::lround(img[i] * 255.0) == i);
  }

  TEST_CASE("clamp_to_unit") {
    const Image a = clamp_to_unit(Image(1, 3, {-0.2, 0.5, 1.3}));
    CHECK(a.data() == std::vector<double>{0.0, 0.5, 1.0});
    const Image b = clamp_to_unit(Image(1, 2, {0.0, 1.0}));
    CHECK(b.data() == std::vector<double>{0.0, 1.0});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(clamp_to_unit(Image(1, 2, {nan, nan})), NonFiniteError);
  }

  TEST_CASE("clamp_to_unit is idempotent") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Image x = testing::random_image(5, 7, seed, -2.0, 3.0);
      const Image once = clamp_to_unit(x);
      CHECK(clamp_to_unit(once).data() == once.data());
    }
  }

  TEST_CASE("shape checks") {
    CHECK_THROWS_AS(Image(2, 2, std::vector<double>{1.0, 2.0}), DimensionError);
    Image a(2, 2), b(2, 3);
    CHECK_THROWS_AS(a += b, DimensionError);
    CHECK_THROWS_AS(VectorField(Image(2, 2), Image(3, 2)), DimensionError);
    CHECK_THROWS_AS(MultiImage(std::vector<Image>{}), std::invalid_argument);
    CHECK_THROWS_AS(MultiImage(std::vector<Image>{Image(2, 2), Image(2, 3)}), DimensionError);
  }

  TEST_CASE("vector field magnitude") {
    VectorField f(1, 2);
    f.g1()[0] = 3.0;
    f.g2()[0] = 4.0;
    CHECK(f.magnitude(0) == 5.0);
    CHECK(f.magnitude(1) == 0.0);
    CHECK(f.magnitudes().data() == std::vector<double>{5.0, 0.0});
  }

  TEST_CASE("arithmetic and inner products") {
    const Image a(1, 3, {1.0, 2.0, 3.0});
    const Image b(1, 3, {4.0, 5.0, 6.0});
    CHECK(dot(a, b) == 32.0);
    CHECK((a + b).data() == std::vector<double>{5.0, 7.0, 9.0});
    CHECK((b - a).data() == std::vector<double>{3.0, 3.0, 3.0});
    CHECK((2.0 * a).data() == std::vector<double>{2.0, 4.0, 6.0});
    Image c = a;
    c.axpy(-1.0, a);
    CHECK(norm(c) == 0.0);
    CHECK(norm(Image(1, 2, {3.0, 4.0})) == 5.0);
  }

  TEST_CASE("finiteness checks") {
    Image a(2, 2);
    CHECK(a.all_finite());
    a[3] = std::numeric_limits<double>::infinity();
    CHECK_FALSE(a.all_finite());
    CHECK_THROWS_AS(require_finite(a, "x"), NonFiniteError);
  }
}
