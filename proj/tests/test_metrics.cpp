#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "ctbayes/metrics.hpp"
#include "test_util.hpp"

using namespace ctbayes;
using namespace ctbayes::metrics;

namespace {

struct OraclePair {
  Image ref, test;
  double ssim, gmsd;
};

std::vector<OraclePair> load_oracle() {
  std::ifstream is(std::string(CTBAYES_TEST_DATA) + "/metric_oracle.json");
  REQUIRE(is.good());
  const auto j = nlohmann::json::parse(is);
  const int64_t n = j.at("size").get<int64_t>();
  std::vector<OraclePair> out;
  for (const auto& p : j.at("pairs")) {
    OraclePair op{Image(n, n), Image(n, n), p.at("ssim").get<double>(), p.at("gmsd").get<double>()};
    const auto r = p.at("ref").get<std::vector<double>>(), t = p.at("test").get<std::vector<double>>();
    for (size_t i = 0; i < r.size(); ++i) {
      op.ref.pixels[i] = static_cast<float>(r[i]);
      op.test.pixels[i] = static_cast<float>(t[i]);
    }
    out.push_back(std::move(op));
  }
  return out;
}

// Per-block reference: DCT coefficients straight from the cosine double sum,
// population moments per sub-band, then the documented weighting.
double dss_similarity_oracle(const Image& a, const Image& b) {
  const int n = 8;
  const int64_t br = a.height / n, bc = a.width / n;
  auto alpha = [&](int k) { return k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n); };
  auto coeff = [&](const Image& img, int64_t by, int64_t bx, int u, int v) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        s += img(by * n + i, bx * n + j) * std::cos(std::numbers::pi * (2 * i + 1) * u / (2.0 * n)) *
             std::cos(std::numbers::pi * (2 * j + 1) * v / (2.0 * n));
    return alpha(u) * alpha(v) * s;
  };
  double s_dc = 0, low = 0, high = 0;
  int n_low = 0, n_high = 0;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      std::vector<double> xa, xb;
      for (int64_t by = 0; by < br; ++by)
        for (int64_t bx = 0; bx < bc; ++bx) {
          xa.push_back(coeff(a, by, bx, u, v));
          xb.push_back(coeff(b, by, bx, u, v));
        }
      const double cnt = static_cast<double>(xa.size());
      double ma = 0, mb = 0;
      for (size_t k = 0; k < xa.size(); ++k) ma += xa[k] / cnt, mb += xb[k] / cnt;
      double va = 0, vb = 0, cv = 0;
      for (size_t k = 0; k < xa.size(); ++k) {
        va += (xa[k] - ma) * (xa[k] - ma) / cnt;
        vb += (xb[k] - mb) * (xb[k] - mb) / cnt;
        cv += (xa[k] - ma) * (xb[k] - mb) / cnt;
      }
      if (u == 0 && v == 0) {
        const double c1 = 0.08 * 0.08, c2 = 0.24 * 0.24;
        s_dc = std::max(0.0, (2 * ma * mb + c1) * (2 * cv + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2)));
      } else {
        const double s = std::max(0.0, (2 * cv + 0.0009) / (va + vb + 0.0009));
        if (u + v <= 3) low += s, ++n_low;
        else high += s, ++n_high;
      }
    }
  return 0.5 * s_dc + 0.3 * low / n_low + 0.2 * high / n_high;
}

Image box_blur(const Image& img) {
  Image out = img;
  for (int64_t r = 1; r + 1 < img.height; ++r)
    for (int64_t c = 1; c + 1 < img.width; ++c) {
      double s = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) s += img(r + dr, c + dc);
      out(r, c) = static_cast<float>(s / 9.0);
    }
  return out;
}

}  // namespace

TEST_CASE("identities") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 5; ++k) {
    const Image x = testing::random_image(32, 40, rng);
    const auto v = evaluate(x, x);
    CHECK(v.psnr == kPsnrCapDb);
    CHECK(v.ssim == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.gmsd == 0.0);
    CHECK(v.dss == 0.0);
  }
  const Image c(16, 16, 0.5f);
  CHECK(ssim(c, c) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("PSNR closed form") {
  const Image a(16, 16, 0.2f);
  Image b = a;
  for (auto& p : b.pixels) p += 0.1f;
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-5));
  // MSE = 0.01 from a checkerboard of +-0.1.
  Image c = a;
  for (int64_t i = 0; i < c.size(); ++i) c.pixels[i] += (i % 2 ? 0.1f : -0.1f);
  CHECK(psnr(a, c) == doctest::Approx(20.0).epsilon(1e-5));
  CHECK_THROWS_AS(psnr(a, Image(16, 15)), ShapeError);
}

TEST_CASE("SSIM and GMSD match independent references") {
  const auto pairs = load_oracle();
  REQUIRE(pairs.size() == 10);
  for (const auto& p : pairs) {
    CHECK(std::abs(ssim(p.ref, p.test) - p.ssim) < 1e-4);
    CHECK(std::abs(gmsd(p.ref, p.test) - p.gmsd) < 1e-4);
  }
}

TEST_CASE("DSS matches the per-block reference") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const Image a = testing::smooth_image(48, rng);
    const Image b = testing::add_gaussian(a, 0.01 + 0.03 * k, rng);
    CHECK(dss_detail(a, b).similarity == doctest::Approx(dss_similarity_oracle(a, b)).epsilon(1e-6));
    CHECK(dss(a, b) == doctest::Approx(1.0 - dss_similarity_oracle(a, b)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(dss(Image(8, 8), Image(8, 8)), ShapeError);
}

TEST_CASE("degenerate cases") {
  std::mt19937_64 rng(4);
  const Image a = testing::smooth_image(32, rng);
  CHECK(gmsd(a, box_blur(a)) > 0.0);
  const Image n1 = testing::random_image(32, 32, rng), n2 = testing::random_image(32, 32, rng);
  const double d = dss(n1, n2);
  CHECK(d > 0.0);
  CHECK(d <= 1.0);
  CHECK_THROWS_AS(ssim(Image(10, 10), Image(10, 10)), ShapeError);
}

TEST_CASE("symmetry") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 5; ++k) {
    const Image a = testing::smooth_image(40, rng);
    const Image b = testing::add_gaussian(a, 0.05, rng);
    const auto ab = evaluate(a, b), ba = evaluate(b, a);
    CHECK(std::abs(ab.psnr - ba.psnr) < 1e-9);
    CHECK(std::abs(ab.ssim - ba.ssim) < 1e-9);
    CHECK(std::abs(ab.gmsd - ba.gmsd) < 1e-9);
    CHECK(std::abs(ab.dss - ba.dss) < 1e-9);
  }
}

TEST_CASE("monotone degradation") {
  const double levels[] = {0.01, 0.03, 0.06, 0.1, 0.15};
  for (uint64_t seed = 0; seed < 3; ++seed) {
    std::mt19937_64 rng(seed);
    const Image ref = testing::smooth_image(64, rng);
    // Common noise field scaled per level keeps the comparison paired.
    const Image unit = testing::add_gaussian(Image(64, 64), 1.0, rng);
    MetricValues prev{};
    for (size_t i = 0; i < 5; ++i) {
      Image test = ref;
      for (int64_t p = 0; p < test.size(); ++p) test.pixels[p] += static_cast<float>(levels[i] * unit.pixels[p]);
      const auto v = evaluate(ref, test);
      if (i > 0) {
        CHECK(v.psnr < prev.psnr);
        CHECK(v.ssim < prev.ssim);
        CHECK(v.gmsd > prev.gmsd);
        CHECK(v.dss > prev.dss);
      }
      prev = v;
    }
  }
}

TEST_CASE("report aggregation") {
  CHECK(mean_std({1.0, 2.0, 3.0}).mean == 2.0);
  CHECK(mean_std({1.0, 2.0, 3.0}).std == doctest::Approx(1.0));
  CHECK(mean_std({4.0}).std == 0.0);

  MetricReport rep;
  std::mt19937_64 rng(6);
  for (int k = 0; k < 3; ++k) {
    const Image a = testing::smooth_image(32, rng);
    rep.add("img" + std::to_string(k), evaluate(a, testing::add_gaussian(a, 0.05, rng)));
  }
  const auto j = rep.summary();
  for (const char* m : {"psnr", "ssim", "gmsd", "dss"}) {
    CHECK(j.at(m).contains("mean"));
    CHECK(j.at(m).contains("std"));
  }
  const auto dir = testing::scratch_dir("report");
  rep.write_csv(dir / "m.csv");
  rep.write_summary(dir / "s.json");
  std::ifstream is(dir / "m.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "image,psnr,ssim,gmsd,dss,dss_similarity");
}
