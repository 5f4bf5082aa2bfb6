#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "tvdecomp/degrade.hpp"
#include "tvdecomp/operators.hpp"
#include "tvdecomp/spectral.hpp"

using namespace tvdecomp;
using testing::to_vec;

namespace {

oracle::Kernel oracle_kernel(const BlurKernel& k) {
  oracle::Kernel o;
  o.rows = k.rows();
  o.cols = k.cols();
  o.ar = k.anchor_row();
  o.ac = k.anchor_col();
  o.taps = k.taps().data();
  return o;
}

BlurKernel random_kernel(int rows, int cols, std::uint64_t seed) {
  return BlurKernel(testing::random_image(rows, cols, seed, 0.05, 1.0));
}

}  // namespace

TEST_SUITE("operators") {
  TEST_CASE("grad of a constant is zero, div of grad of a constant is zero") {
    for (Boundary bc : {Boundary::neumann, Boundary::periodic}) {
      const Image c(5, 6, 0.37);
      const VectorField g = grad(c, bc);
      CHECK(norm(g) == 0.0);
      CHECK(norm(div(g, bc)) == 0.0);
    }
  }

  TEST_CASE("grad of a 1x2 ramp") {
    const VectorField g = grad(Image(1, 2, {0.0, 1.0}));
    CHECK(g.g1().data() == std::vector<double>{1.0, 0.0});
    CHECK(g.g2().data() == std::vector<double>{0.0, 0.0});
  }

  TEST_CASE("div of zero field is zero") { CHECK(norm(div(VectorField(4, 4))) == 0.0); }

  TEST_CASE("grad and div against independent loops") {
    for (Boundary bc : {Boundary::neumann, Boundary::periodic}) {
      const oracle::Grid grid{7, 5, bc == Boundary::periodic};
      const Image u = testing::random_image(7, 5, 3);
      oracle::Vec gx, gy;
      oracle::grad(grid, to_vec(u), gx, gy);
      const VectorField g = grad(u, bc);
      CHECK(testing::l2_diff(g.g1().data(), gx) == 0.0);
      CHECK(testing::l2_diff(g.g2().data(), gy) == 0.0);
      const VectorField p = testing::random_field(7, 5, 4);
      const oracle::Vec d = oracle::div(grid, p.g1().data(), p.g2().data());
      CHECK(testing::l2_diff(div(p, bc).data(), d) <= 1e-14);
    }
  }

  TEST_CASE("grad/div adjoint on 4x4 to 1e-12") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Image u = testing::random_image(4, 4, seed);
      const VectorField p = testing::random_field(4, 4, seed + 10);
      CHECK(std::abs(dot(grad(u), p) + dot(u, div(p))) <= 1e-12);
    }
  }

  TEST_CASE("div equals the dense negative transpose of grad on 8x8") {
    for (Boundary bc : {Boundary::neumann, Boundary::periodic}) {
      const int h = 8, w = 8, n = 64;
      const Eigen::MatrixXd G = oracle::probe(n, 2 * n, [&](const oracle::Vec& x) {
        return to_vec(grad(testing::to_image(x, h, w), bc));
      });
      const VectorField g = testing::random_field(h, w, 9);
      const oracle::Vec gv = to_vec(g);
      const Eigen::VectorXd expect = -G.transpose() * Eigen::Map<const Eigen::VectorXd>(gv.data(), 2 * n);
      const Image d = div(g, bc);
      double err = 0.0;
      for (int i = 0; i < n; ++i) err = std::max(err, std::abs(d[i] - expect(i)));
      CHECK(err <= 1e-13);
    }
  }

  TEST_CASE("delta kernel and constant images") {
    const Image x = testing::random_image(6, 6, 1);
    for (Boundary bc : {Boundary::neumann, Boundary::periodic}) {
      CHECK(testing::l2_diff(convolve(x, BlurKernel::delta(), bc).data(), x.data()) <= 1e-14);
      const Image c(6, 6, 0.42);
      const Image kc = convolve(c, random_kernel(3, 3, 2), bc);
      for (double v : kc.values()) CHECK(v == doctest::Approx(0.42).epsilon(1e-13));
    }
  }

  TEST_CASE("kernels are normalized and validated") {
    const BlurKernel k = random_kernel(3, 4, 5);
    double s = 0.0;
    for (double v : k.taps().values()) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
    CHECK(k.anchor_row() == 1);
    CHECK(k.anchor_col() == 2);
    CHECK_THROWS_AS(BlurKernel(Image(1, 2, {1.0, -0.5})), std::invalid_argument);
    CHECK_THROWS_AS(BlurKernel(Image(1, 2, {0.0, 0.0})), std::invalid_argument);
  }

  TEST_CASE("periodic convolution matches direct circular sums") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const Image x = testing::random_image(8, 8, seed);
      const BlurKernel k = random_kernel(3, 3, seed + 100);
      const oracle::Grid grid{8, 8, true};
      const oracle::Vec direct = oracle::conv(grid, oracle_kernel(k), to_vec(x));
      CHECK(testing::l2_diff(convolve(x, k, Boundary::periodic).data(), direct) <= 1e-10);
      const oracle::Vec direct_t = oracle::conv(grid, oracle_kernel(k), to_vec(x), true);
      CHECK(testing::l2_diff(convolve_adjoint(x, k, Boundary::periodic).data(), direct_t) <= 1e-10);
    }
  }

  TEST_CASE("replicate convolution matches clamped sums") {
    const Image x = testing::random_image(7, 9, 2);
    const BlurKernel k = random_kernel(3, 5, 8);
    const oracle::Grid grid{7, 9, false};
    CHECK(testing::l2_diff(convolve(x, k, Boundary::neumann).data(), oracle::conv(grid, oracle_kernel(k), to_vec(x))) <=
          1e-13);
  }

  TEST_CASE("kernel larger than the image is rejected in periodic mode") {
    const Image x(4, 4, 0.5);
    CHECK_THROWS_AS(convolve(x, disk_kernel(3.0), Boundary::periodic), std::invalid_argument);
    CHECK_NOTHROW(convolve(x, disk_kernel(3.0), Boundary::neumann));
  }

  TEST_CASE("periodic grad, div and blur are diagonalized by the DFT") {
    const int h = 16, w = 16;
    const Image u = testing::random_image(h, w, 12);
    auto dft = dft_for(h, w);
    const Spectrum U = dft->forward(u);
    const GradientSymbols sym = periodic_gradient_symbols(h, w);
    auto filtered = [&](const Spectrum& s) {
      Spectrum out = U;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s[i];
      return dft->inverse(out);
    };
    const VectorField g = grad(u, Boundary::periodic);
    CHECK(testing::l2_diff(g.g1().data(), filtered(sym.horizontal).data()) <= 1e-10);
    CHECK(testing::l2_diff(g.g2().data(), filtered(sym.vertical).data()) <= 1e-10);

    // div = -grad^T: symbol -conj(d1) on g1 plus -conj(d2) on g2
    const VectorField p = testing::random_field(h, w, 13);
    const Spectrum P1 = dft->forward(p.g1()), P2 = dft->forward(p.g2());
    Spectrum D(P1.size());
    for (std::size_t i = 0; i < D.size(); ++i) {
      D[i] = -std::conj(sym.horizontal[i]) * P1[i] - std::conj(sym.vertical[i]) * P2[i];
    }
    CHECK(testing::l2_diff(div(p, Boundary::periodic).data(), dft->inverse(D).data()) <= 1e-10);

    const BlurKernel k = random_kernel(5, 5, 14);
    CHECK(testing::l2_diff(convolve(u, k, Boundary::periodic).data(), filtered(kernel_spectrum(k, h, w)).data()) <=
          1e-10);

    const std::vector<double> lap = periodic_laplacian_symbol(h, w);
    for (std::size_t i = 0; i < lap.size(); ++i) {
      CHECK(lap[i] == doctest::Approx(std::norm(sym.horizontal[i]) + std::norm(sym.vertical[i])).epsilon(1e-12));
    }
  }

  TEST_CASE("mask is a self-adjoint projection") {
    const Image x = testing::random_image(6, 5, 1);
    const PixelMask ones = PixelMask::all_observed(6, 5);
    CHECK(apply_mask(x, ones).data() == x.data());
    const PixelMask zeros(Image(6, 5, 0.0));
    CHECK(norm(apply_mask(x, zeros)) == 0.0);
    const PixelMask m = bernoulli_mask(6, 5, 0.5, 3);
    const Image once = apply_mask(x, m);
    CHECK(apply_mask(once, m).data() == once.data());
    const Image y = testing::random_image(6, 5, 2);
    CHECK(dot(apply_mask(x, m), y) == doctest::Approx(dot(x, apply_mask(y, m))).epsilon(1e-15));
    CHECK_THROWS_AS(PixelMask(Image(1, 2, {0.5, 1.0})), std::invalid_argument);
    CHECK_THROWS_AS(apply_mask(Image(2, 2), m), DimensionError);
  }

  TEST_CASE("composition") {
    const Shape s = Shape::scalar(8, 8);
    const LinearOp id = compose(LinearOp::identity(s), LinearOp::identity(s));
    const Image x = testing::random_image(8, 8, 4);
    CHECK(id.apply_to_image(x).data() == x.data());

    const BlurKernel k = random_kernel(3, 3, 6);
    const PixelMask m = bernoulli_mask(8, 8, 0.7, 9);
    const LinearOp ks = compose(LinearOp::mask(m), LinearOp::convolution(8, 8, k, Boundary::periodic));
    CHECK(testing::l2_diff(ks.apply_to_image(x).data(), apply_mask(convolve(x, k, Boundary::periodic), m).data()) <=
          1e-15);
    const Image y = testing::random_image(8, 8, 5);
    CHECK(std::abs(dot(ks.apply_to_image(x), y) - dot(x, ks.adjoint_to_image(y))) <= 1e-10);
    CHECK(ks.factors().size() == 2);
    CHECK(ks.factors()[0].kind() == LinearOp::Kind::mask);

    CHECK_THROWS_AS(compose(LinearOp::identity(s), LinearOp::gradient(8, 8, Boundary::neumann)), DimensionError);
    CHECK_THROWS_AS(LinearOp::identity(s).apply(Signal(Image(4, 4))), DimensionError);
  }

  TEST_CASE("adjoint_check on every operator kind") {
    const int h = 9, w = 7;
    const Shape s = Shape::scalar(h, w);
    const BlurKernel k = random_kernel(3, 3, 21);
    const PixelMask m = bernoulli_mask(h, w, 0.6, 22);
    CHECK(adjoint_check(LinearOp::identity(s), 20, 1) == 0.0);
    for (Boundary bc : {Boundary::neumann, Boundary::periodic}) {
      CHECK(adjoint_check(LinearOp::gradient(h, w, bc), 20, 2) <= 1e-12);
      CHECK(adjoint_check(LinearOp::divergence(h, w, bc), 20, 3) <= 1e-12);
      CHECK(adjoint_check(LinearOp::convolution(h, w, k, bc), 20, 4) <= 1e-10);
      const LinearOp hop = compose(LinearOp::mask(m), LinearOp::convolution(h, w, k, bc));
      CHECK(adjoint_check(hop, 20, 5) <= 1e-10);
      CHECK(adjoint_check(compose(hop, LinearOp::divergence(h, w, bc)), 20, 6) <= 1e-10);
    }
    CHECK(adjoint_check(LinearOp::mask(m), 20, 7) <= 1e-15);
    CHECK(adjoint_check(LinearOp::scaled(2.5, LinearOp::gradient(h, w, Boundary::neumann)), 20, 8) <= 1e-12);
    CHECK(adjoint_check(LinearOp::sum(LinearOp::identity(s), LinearOp::mask(m)), 20, 9) <= 1e-15);
    CHECK(adjoint_check(LinearOp::transpose(LinearOp::gradient(h, w, Boundary::neumann)), 20, 10) <= 1e-12);
  }

  TEST_CASE("random_signal is seeded") {
    const Shape s = Shape::vector(3, 3);
    CHECK(norm(random_signal(s, 5)) == norm(random_signal(s, 5)));
    CHECK(norm(random_signal(s, 5)) != norm(random_signal(s, 6)));
  }
}
