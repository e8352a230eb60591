#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <random>
#include <set>

#include "ctbayes/data.hpp"
#include "test_util.hpp"

using namespace ctbayes;
namespace fs = std::filesystem;

namespace {

// Two-sample Kolmogorov-Smirnov statistic by merged sweep.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

std::vector<double> flat_noise(const DomainSpec& spec, int slices, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  for (int s = 0; s < slices; ++s) {
    const auto pair = apply_low_dose_noise(generate_phantom(spec, 128, rng), spec, rng);
    const auto mask = flat_region_mask(pair.ndct);
    for (size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) out.push_back(pair.ldct.pixels[i] - pair.ndct.pixels[i]);
  }
  return out;
}

DatasetConfig small_dataset(uint64_t seed) {
  DatasetConfig cfg;
  cfg.slice_size = 32;
  cfg.seed = seed;
  for (auto& d : cfg.domains) d.counts = {3, 2, 2};
  return cfg;
}

}  // namespace

TEST_CASE("phantom construction") {
  SUBCASE("head centre sits in brain tissue") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      std::mt19937_64 rng(seed);
      const auto img = generate_phantom(DomainSpec::head_default(), 128, rng);
      CHECK(img(64, 64) >= 20.0f);
      CHECK(img(64, 64) <= 50.0f);
    }
  }
  SUBCASE("abdomen corners are air") {
    std::mt19937_64 rng(3);
    const auto img = generate_phantom(DomainSpec::abdomen_default(), 128, rng);
    for (auto [r, c] : {std::pair{0, 0}, {0, 127}, {127, 0}, {127, 127}}) CHECK(img(r, c) == -1000.0f);
  }
  SUBCASE("same seed, same phantom") {
    std::mt19937_64 a(9), b(9);
    CHECK(generate_phantom(DomainSpec::abdomen_default(), 64, a).pixels ==
          generate_phantom(DomainSpec::abdomen_default(), 64, b).pixels);
  }
}

TEST_CASE("window_normalize") {
  CHECK(window_normalize(35.0f, 35.0, 90.0) == 0.5f);
  CHECK(window_normalize(80.0f, 35.0, 90.0) == 1.0f);
  CHECK(window_normalize(-10.0f, 35.0, 90.0) == 0.0f);
  CHECK(window_normalize(-500.0f, 35.0, 90.0) == 0.0f);
  CHECK_THROWS_AS(window_normalize(0.0f, 0.0, 0.0), std::invalid_argument);
  // Monotone non-decreasing on a dense sweep.
  float prev = -1.0f;
  for (float hu = -1200.0f; hu <= 1200.0f; hu += 0.37f) {
    const float v = window_normalize(hu, 40.0, 400.0);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("low-dose noise model") {
  SUBCASE("noiseless limit") {
    DomainSpec spec = DomainSpec::abdomen_default();
    spec.mas_jitter_pct = 0.0;
    spec.noise_sigma_base = 1e-12;
    spec.photon_count_base = 1e15;
    std::mt19937_64 rng(1);
    const auto pair = apply_low_dose_noise(generate_phantom(spec, 64, rng), spec, rng);
    for (size_t i = 0; i < pair.ldct.pixels.size(); ++i)
      CHECK(std::abs(pair.ldct.pixels[i] - pair.ndct.pixels[i]) < 1e-4f);
  }
  SUBCASE("flat-region std matches the effective sigma within 10%") {
    for (auto spec : {DomainSpec::head_default(), DomainSpec::abdomen_default()}) {
      spec.mas_jitter_pct = 0.0;
      const float hu = static_cast<float>(spec.window_level);
      Image flat(128, 128, hu);
      std::mt19937_64 rng(5);
      const auto pair = apply_low_dose_noise(flat, spec, rng);
      double mean = 0.0, var = 0.0;
      const double n = static_cast<double>(flat.size());
      for (int64_t i = 0; i < flat.size(); ++i) mean += (pair.ldct.pixels[i] - pair.ndct.pixels[i]) / n;
      for (int64_t i = 0; i < flat.size(); ++i) {
        const double d = pair.ldct.pixels[i] - pair.ndct.pixels[i] - mean;
        var += d * d / (n - 1);
      }
      CHECK(std::sqrt(var) == doctest::Approx(effective_noise_sigma(spec, hu, 1.0)).epsilon(0.1));
    }
  }
  SUBCASE("abdomen Gaussian level is 2.5x the head level") {
    CHECK(DomainSpec::abdomen_default().noise_sigma_base ==
          doctest::Approx(2.5 * DomainSpec::head_default().noise_sigma_base));
    CHECK(effective_noise_sigma(DomainSpec::abdomen_default(), 40, 1.0) >
          effective_noise_sigma(DomainSpec::head_default(), 35, 1.0));
  }
}

TEST_CASE("noise distributions differ between domains") {
  const auto head = flat_noise(DomainSpec::head_default(), 4, 11);
  const auto abdomen = flat_noise(DomainSpec::abdomen_default(), 4, 12);
  REQUIRE(head.size() > 1000);
  REQUIRE(abdomen.size() > 1000);
  CHECK(ks_statistic(head, abdomen) > 0.1);
  // Same domain, independent draws: no meaningful shift.
  CHECK(ks_statistic(head, flat_noise(DomainSpec::head_default(), 4, 13)) < 0.1);
}

TEST_CASE("extract_patches") {
  std::mt19937_64 rng(2);
  const auto spec = DomainSpec::abdomen_default();
  const auto pair = apply_low_dose_noise(generate_phantom(spec, 128, rng), spec, rng);
  std::mt19937_64 r1(4), r2(4);
  const auto patches = extract_patches(pair, kDefaultPatchesPerSlice, kDefaultPatchSize, r1);
  CHECK(patches.size() == 8);
  for (const auto& p : patches) {
    CHECK(p.x.height == 64);
    CHECK(p.x.pixels == pair.ldct.crop(p.row, p.col, 64, 64).pixels);
    CHECK(p.y.pixels == pair.ndct.crop(p.row, p.col, 64, 64).pixels);
  }
  const auto again = extract_patches(pair, 8, 64, r2);
  for (size_t i = 0; i < 8; ++i) {
    CHECK(again[i].row == patches[i].row);
    CHECK(again[i].col == patches[i].col);
  }
  std::mt19937_64 r3(4);
  const auto single = extract_patches(pair.ldct, 8, 64, r3);
  for (size_t i = 0; i < 8; ++i) CHECK(single[i].pixels == patches[i].x.pixels);
  CHECK_THROWS_AS(extract_patches(pair, 1, 129, r1), ShapeError);
}

TEST_CASE("flat_region_mask") {
  Image img(14, 14, 0.5f);
  img(5, 5) = 0.6f;
  const auto mask = flat_region_mask(img);
  CHECK(mask[10 * 14 + 10] == 1);
  CHECK(mask[0] == 0);  // border pixels lack a full neighbourhood
  CHECK(mask[5 * 14 + 5] == 0);
  CHECK(mask[4 * 14 + 4] == 0);
  Image clamped(10, 10, 0.0f);
  const auto none = flat_region_mask(clamped);
  CHECK(std::count(none.begin(), none.end(), 1) == 0);
}

TEST_CASE("slice files round-trip bit-exactly") {
  const auto dir = testing::scratch_dir("slice_io");
  std::mt19937_64 rng(6);
  for (int k = 0; k < 5; ++k) {
    Image img = testing::random_image(7 + k, 13, rng, -1e6f, 1e6f);
    img.pixels[0] = std::numeric_limits<float>::denorm_min();
    img.pixels[1] = -0.0f;
    const auto path = dir / ("s" + std::to_string(k) + ".bin");
    write_slice(path, img);
    const Image back = read_slice(path);
    CHECK(back.height == img.height);
    CHECK(back.width == img.width);
    CHECK(std::memcmp(back.pixels.data(), img.pixels.data(), img.pixels.size() * sizeof(float)) == 0);
    CHECK(fs::file_size(path) == 16 + img.pixels.size() * 4);
  }
  std::ofstream(dir / "bad.bin") << "XXXX";
  CHECK_THROWS_AS(read_slice(dir / "bad.bin"), std::runtime_error);
  CHECK_THROWS_AS(read_slice(dir / "missing.bin"), std::runtime_error);
}

TEST_CASE("build_dataset") {
  const auto root = testing::scratch_dir("dataset");
  const auto cfg = small_dataset(21);
  const Manifest m = build_dataset(cfg, root / "a");

  SUBCASE("split counts follow the config") {
    for (const auto& d : cfg.domains)
      for (const auto& split : kSplits) CHECK(m.count(d.spec.name, split) == static_cast<size_t>(d.counts.get(split)));
    const Manifest loaded = load_manifest(root / "a");
    CHECK(loaded.count("head", "test") == 2);
  }
  SUBCASE("target training split never carries NDCT") {
    const DatasetView view(root / "a");
    CHECK(view.target_train().size() == 3);
    CHECK_THROWS_AS(view.paired(view.target(), "train"), std::logic_error);
    for (const auto& r : m.slices.at("abdomen").at("train")) CHECK_FALSE(r.ndct_file.has_value());
    CHECK(view.source_train().size() == 3);
    CHECK(view.paired("abdomen", "val").size() == 2);
  }
  SUBCASE("no duplicate slices across splits and domains") {
    std::set<std::string> hashes;
    size_t total = 0;
    for (const auto& [domain, splits] : m.slices)
      for (const auto& [split, records] : splits)
        for (const auto& r : records) {
          hashes.insert(r.ldct_hash);
          ++total;
        }
    CHECK(hashes.size() == total);
  }
  SUBCASE("same seed reproduces the manifest hashes") {
    const Manifest again = build_dataset(cfg, root / "b");
    for (const auto& [domain, splits] : m.slices)
      for (const auto& [split, records] : splits)
        for (size_t i = 0; i < records.size(); ++i) {
          CHECK(records[i].ldct_hash == again.slices.at(domain).at(split)[i].ldct_hash);
          CHECK(records[i].ndct_hash == again.slices.at(domain).at(split)[i].ndct_hash);
        }
  }
  SUBCASE("missing dataset is reported") { CHECK_THROWS_AS(DatasetView(root / "nope"), std::runtime_error); }
}

TEST_CASE("dataset config JSON") {
  const auto cfg = small_dataset(4);
  const nlohmann::json j = cfg;
  const auto back = j.get<DatasetConfig>();
  CHECK(nlohmann::json(back) == j);
  auto bad = j;
  bad["bogus"] = 1;
  CHECK_THROWS(bad.get<DatasetConfig>());
  CHECK_THROWS_AS(phantom_style_from_string("torso"), std::invalid_argument);
}
