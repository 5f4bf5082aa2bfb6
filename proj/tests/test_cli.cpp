#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "helpers.hpp"
#include "tvdecomp/io.hpp"
#include "tvdecomp/metrics.hpp"

using namespace tvdecomp;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "tvdecomp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Value of a `key=value` line.
std::string field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return "";
}

std::string synth(const std::filesystem::path& dir, const std::string& seed = "1") {
  const std::string prefix = (dir / "syn").string();
  const Run r = run({"synth", "--height", "32", "--width", "32", "--seed", seed, "--out-prefix", prefix});
  REQUIRE(r.code == 0);
  return prefix;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("identity degradation reproduces the canonical input") {
    const auto dir = testing::tmp_dir("cli_identity");
    const std::string p = synth(dir);
    const Run r = run({"degrade", "--in", p + "_clean.pgm", "--out", (dir / "d.pgm").string(), "--blur", "none",
                       "--noise", "none", "--mask", "none"});
    REQUIRE(r.code == 0);
    CHECK(testing::slurp(dir / "d.pgm") == testing::slurp(p + "_clean.pgm"));
    CHECK(field(r.out, "psnr0") == "inf");
  }

  TEST_CASE("heavy blur lowers the PSNR") {
    const auto dir = testing::tmp_dir("cli_blur");
    const std::string p = (dir / "big").string();
    REQUIRE(run({"synth", "--height", "96", "--width", "96", "--out-prefix", p}).code == 0);
    const Run r = run({"degrade", "--in", p + "_clean.pgm", "--out", (dir / "d.pgm").string(), "--blur", "disk:40"});
    REQUIRE(r.code == 0);
    CHECK(std::stod(field(r.out, "psnr0")) < 30.0);
  }

  TEST_CASE("seeded noise and masks are reproducible") {
    const auto dir = testing::tmp_dir("cli_seed");
    const std::string p = synth(dir);
    for (const char* name : {"a.pgm", "b.pgm"}) {
      REQUIRE(run({"degrade", "--in", p + "_clean.pgm", "--out", (dir / name).string(), "--noise", "gaussian:0,0.1",
                   "--mask", "bernoulli:0.7", "--seed", "7"})
                  .code == 0);
    }
    CHECK(testing::slurp(dir / "a.pgm") == testing::slurp(dir / "b.pgm"));
    CHECK(testing::slurp(dir / "a_mask.pgm") == testing::slurp(dir / "b_mask.pgm"));
    REQUIRE(run({"degrade", "--in", p + "_clean.pgm", "--out", (dir / "c.pgm").string(), "--noise", "gaussian:0,0.1",
                 "--seed", "8"})
                .code == 0);
    CHECK(testing::slurp(dir / "a.pgm") != testing::slurp(dir / "c.pgm"));
  }

  TEST_CASE("decompose writes every artifact") {
    const auto dir = testing::tmp_dir("cli_decompose");
    const std::string p = synth(dir);
    const std::string deg = (dir / "n.pgm").string();
    REQUIRE(run({"degrade", "--in", p + "_clean.pgm", "--out", deg, "--noise", "gaussian:0,0.001", "--seed", "3"})
                .code == 0);
    const std::string prefix = (dir / "out").string();
    const Run r = run({"decompose", "--in", deg, "--out-prefix", prefix, "--preset", "case1", "--trace",
                       prefix + ".csv", "--reference", p + "_clean.pgm"});
    REQUIRE(r.code == 0);
    const int iters = std::stoi(field(r.out, "iters"));
    CHECK(iters >= 1);
    CHECK(iters <= 70);
    CHECK(std::stod(field(r.out, "psnr")) > 0.0);
    CHECK_FALSE(field(r.out, "corr").empty());
    for (const char* suffix : {"_cartoon.pgm", "_texture.pgm", "_restored.pgm"}) {
      CHECK(read_image(prefix + suffix).height() == 32);
    }
    const auto trace = read_trace(prefix + ".csv");
    CHECK(trace.size() == static_cast<std::size_t>(iters));
    CHECK(trace.front().psnr.has_value());
    CHECK(format_real(trace.back().tol) == field(r.out, "tol"));
  }

  TEST_CASE("zero input gives zero outputs after one iteration") {
    const auto dir = testing::tmp_dir("cli_zero");
    write_image(Image(16, 16), (dir / "z.pgm").string());
    const std::string prefix = (dir / "out").string();
    for (const char* blur : {"none", "disk:3"}) {
      const Run r = run({"decompose", "--in", (dir / "z.pgm").string(), "--out-prefix", prefix, "--blur", blur});
      REQUIRE(r.code == 0);
      CHECK(field(r.out, "iters") == "1");
      CHECK(field(r.out, "psnr") == "nan");
      for (const char* suffix : {"_cartoon.pgm", "_texture.pgm", "_restored.pgm"}) {
        const Image img = read_image(prefix + suffix)[0];
        CHECK(norm(img) == 0.0);
      }
    }
  }

  TEST_CASE("a kernel larger than a periodic image is rejected") {
    const auto dir = testing::tmp_dir("cli_big_kernel");
    const std::string p = synth(dir);
    const Run r = run({"degrade", "--in", p + "_clean.pgm", "--out", (dir / "d.pgm").string(), "--blur", "disk:40"});
    CHECK(r.code == 1);
    CHECK(run({"degrade", "--in", p + "_clean.pgm", "--out", (dir / "d.pgm").string(), "--blur", "disk:40",
               "--boundary", "neumann"})
              .code == 0);
  }

  TEST_CASE("usage errors") {
    const auto dir = testing::tmp_dir("cli_usage");
    const std::string p = synth(dir);
    const std::string in = p + "_clean.pgm";
    const std::string prefix = (dir / "o").string();
    CHECK(run({"decompose", "--in", in, "--out-prefix", prefix, "--preset", "case9"}).code == 1);
    CHECK(run({"decompose", "--in", in, "--out-prefix", prefix, "--step", "1.62"}).code == 1);
    CHECK(run({"decompose", "--in", in, "--out-prefix", prefix, "--s", "3"}).code == 1);
    CHECK(run({"decompose", "--in", in}).code == 1);
    CHECK(run({"degrade", "--in", in, "--out", prefix + ".pgm", "--blur", "box:3"}).code == 1);
    CHECK(run({"synth", "--height", "0", "--out-prefix", prefix}).code == 1);
    CHECK(run({}).code == 1);
    const Run help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("decompose") != std::string::npos);
  }

  TEST_CASE("metrics") {
    const auto dir = testing::tmp_dir("cli_metrics");
    const std::string p = synth(dir);
    const Run same = run({"metrics", "--a", p + "_clean.pgm", "--b", p + "_clean.pgm"});
    REQUIRE(same.code == 0);
    CHECK(field(same.out, "mse") == "0");
    CHECK(field(same.out, "psnr") == "inf");
    CHECK(field(same.out, "corr") == "1");

    write_image(Image(4, 4, 0.5), (dir / "flat.pgm").string());
    const Run flat = run({"metrics", "--a", (dir / "flat.pgm").string(), "--b", (dir / "flat.pgm").string()});
    REQUIRE(flat.code == 0);
    CHECK(flat.out.find("corr=") == std::string::npos);

    const Image a = read_image(p + "_clean.pgm")[0];
    const Image b = read_image(p + "_cartoon.pgm")[0];
    const Run pair = run({"metrics", "--a", p + "_clean.pgm", "--b", p + "_cartoon.pgm"});
    CHECK(field(pair.out, "mse") == format_real(mse(a, b)));
    CHECK(field(pair.out, "psnr") == format_real(psnr(a, b)));
    CHECK(field(pair.out, "corr") == format_real(correlation(a, b)));

    const Run missing = run({"metrics", "--a", (dir / "nope.pgm").string(), "--b", p + "_clean.pgm"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("nope.pgm") != std::string::npos);
    write_image(Image(5, 4), (dir / "other.pgm").string());
    CHECK(run({"metrics", "--a", (dir / "other.pgm").string(), "--b", p + "_clean.pgm"}).code != 0);
  }

  TEST_CASE("synth") {
    const auto dir = testing::tmp_dir("cli_synth");
    const std::string prefix = (dir / "s").string();
    REQUIRE(run({"synth", "--amplitude", "0", "--out-prefix", prefix}).code == 0);
    CHECK(testing::slurp(prefix + "_clean.pgm") == testing::slurp(prefix + "_cartoon.pgm"));
    CHECK(testing::slurp(prefix + "_clean.pgm").rfind("P5\n64 64\n255\n", 0) == 0);

    const std::string a = (dir / "a").string(), b = (dir / "b").string();
    REQUIRE(run({"synth", "--seed", "5", "--out-prefix", a}).code == 0);
    REQUIRE(run({"synth", "--seed", "5", "--out-prefix", b}).code == 0);
    for (const char* suffix : {"_clean.pgm", "_cartoon.pgm", "_texture.pgm"}) {
      CHECK(testing::slurp(a + suffix) == testing::slurp(b + suffix));
    }
    const MultiImage img = read_image(a + "_clean.pgm");
    CHECK(img.channels() == 1);
    CHECK(img.height() == 64);
  }

  TEST_CASE("color images are decomposed per channel") {
    const auto dir = testing::tmp_dir("cli_color");
    const MultiImage rgb(std::vector<Image>{testing::random_image(12, 10, 1), testing::random_image(12, 10, 2),
                                            testing::random_image(12, 10, 3)});
    write_image(rgb, (dir / "c.ppm").string());
    const std::string prefix = (dir / "o").string();
    const Run r = run({"decompose", "--in", (dir / "c.ppm").string(), "--out-prefix", prefix, "--trace",
                       prefix + ".csv", "--max-iters", "5"});
    REQUIRE(r.code == 0);
    CHECK(read_image(prefix + "_restored.ppm").channels() == 3);
    for (int c = 0; c < 3; ++c) CHECK(read_trace(prefix + "_c" + std::to_string(c) + ".csv").size() == 5);
  }
}
