#include "ctbayes/data.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ctbayes/rng.hpp"

namespace ctbayes {

namespace fs = std::filesystem;
using nlohmann::json;

Image Image::crop(int64_t row, int64_t col, int64_t h, int64_t w) const {
  if (row < 0 || col < 0 || row + h > height || col + w > width) {
    throw ShapeError("crop " + std::to_string(h) + "x" + std::to_string(w) + " at (" +
                     std::to_string(row) + "," + std::to_string(col) + ") exceeds " +
                     std::to_string(height) + "x" + std::to_string(width));
  }
  Image out(h, w);
  for (int64_t r = 0; r < h; ++r) {
    std::copy_n(&pixels[static_cast<size_t>((row + r) * width + col)], w, &out.pixels[static_cast<size_t>(r * w)]);
  }
  return out;
}

std::string to_string(PhantomStyle style) {
  return style == PhantomStyle::head_like ? "head_like" : "abdomen_like";
}

PhantomStyle phantom_style_from_string(const std::string& name) {
  if (name == "head_like") return PhantomStyle::head_like;
  if (name == "abdomen_like") return PhantomStyle::abdomen_like;
  throw std::invalid_argument("unknown phantom_style '" + name + "'");
}

void DomainSpec::validate() const {
  if (name.empty()) throw std::invalid_argument("domain name must be non-empty");
  if (!(noise_sigma_base > 0.0)) throw std::invalid_argument(name + ": noise_sigma_base must be > 0");
  if (!(photon_count_base > 0.0)) throw std::invalid_argument(name + ": photon_count_base must be > 0");
  if (!(mas_jitter_pct >= 0.0 && mas_jitter_pct < 1.0))
    throw std::invalid_argument(name + ": mas_jitter_pct must lie in [0, 1)");
  if (!(window_width > 0.0)) throw std::invalid_argument(name + ": window_width must be > 0");
}

// Head scans are the quieter domain: the Gaussian component of the abdomen
// default is 2.5x the head one.
DomainSpec DomainSpec::abdomen_default() {
  return {"abdomen", PhantomStyle::abdomen_like, 0.05, 5.0e4, 0.3, 40.0, 400.0};
}

DomainSpec DomainSpec::head_default() {
  return {"head", PhantomStyle::head_like, 0.02, 1.0e6, 0.1, 35.0, 90.0};
}

void to_json(json& j, const DomainSpec& spec) {
  j = json{{"name", spec.name},
           {"phantom_style", to_string(spec.phantom_style)},
           {"noise_sigma_base", spec.noise_sigma_base},
           {"photon_count_base", spec.photon_count_base},
           {"mas_jitter_pct", spec.mas_jitter_pct},
           {"window_level", spec.window_level},
           {"window_width", spec.window_width}};
}

void from_json(const json& j, DomainSpec& spec) {
  static const std::array<const char*, 7> keys = {"name", "phantom_style", "noise_sigma_base", "photon_count_base",
                                                  "mas_jitter_pct", "window_level", "window_width"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw std::invalid_argument("unknown domain key '" + k + "'");
  }
  // Unspecified fields fall back to the style's defaults.
  const std::string style = j.value("phantom_style", std::string("abdomen_like"));
  spec = phantom_style_from_string(style) == PhantomStyle::head_like ? DomainSpec::head_default()
                                                                      : DomainSpec::abdomen_default();
  spec.name = j.value("name", spec.name);
  spec.noise_sigma_base = j.value("noise_sigma_base", spec.noise_sigma_base);
  spec.photon_count_base = j.value("photon_count_base", spec.photon_count_base);
  spec.mas_jitter_pct = j.value("mas_jitter_pct", spec.mas_jitter_pct);
  spec.window_level = j.value("window_level", spec.window_level);
  spec.window_width = j.value("window_width", spec.window_width);
}

// ---------------------------------------------------------------------------
// Phantoms

namespace {

struct Ellipse {
  double cx, cy, a, b, theta;
};

bool inside(const Ellipse& e, double x, double y) {
  const double c = std::cos(e.theta), s = std::sin(e.theta);
  const double dx = x - e.cx, dy = y - e.cy;
  const double u = (c * dx + s * dy) / e.a;
  const double v = (-s * dx + c * dy) / e.b;
  return u * u + v * v <= 1.0;
}

template <typename F>
void paint(Image& img, const Ellipse& e, F&& value_at) {
  const double n = static_cast<double>(img.width);
  for (int64_t r = 0; r < img.height; ++r) {
    const double y = (static_cast<double>(r) + 0.5) / static_cast<double>(img.height) * 2.0 - 1.0;
    for (int64_t c = 0; c < img.width; ++c) {
      const double x = (static_cast<double>(c) + 0.5) / n * 2.0 - 1.0;
      if (inside(e, x, y)) img(r, c) = value_at(img(r, c));
    }
  }
}

void paint_value(Image& img, const Ellipse& e, float value) {
  paint(img, e, [value](float) { return value; });
}

// 3x3 binomial blur with edge replication.
Image smooth(const Image& in) {
  static constexpr std::array<float, 3> k = {0.25f, 0.5f, 0.25f};
  Image tmp(in.height, in.width), out(in.height, in.width);
  auto clampi = [](int64_t v, int64_t hi) { return std::clamp<int64_t>(v, 0, hi - 1); };
  for (int64_t r = 0; r < in.height; ++r)
    for (int64_t c = 0; c < in.width; ++c) {
      float acc = 0.0f;
      for (int d = -1; d <= 1; ++d) acc += k[d + 1] * in(r, clampi(c + d, in.width));
      tmp(r, c) = acc;
    }
  for (int64_t r = 0; r < in.height; ++r)
    for (int64_t c = 0; c < in.width; ++c) {
      float acc = 0.0f;
      for (int d = -1; d <= 1; ++d) acc += k[d + 1] * tmp(clampi(r + d, in.height), c);
      out(r, c) = acc;
    }
  return out;
}

constexpr float kAirHu = -1000.0f;

Image abdomen_phantom(int64_t size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  Image img(size, size, kAirHu);
  const Ellipse body{uni(-0.04, 0.04), uni(-0.04, 0.04), uni(0.75, 0.88), uni(0.55, 0.68), uni(-0.1, 0.1)};
  paint_value(img, body, 40.0f);

  std::uniform_int_distribution<int> n_organs(3, 8);
  const int n = n_organs(rng);
  for (int i = 0; i < n; ++i) {
    const double rad = std::sqrt(u01(rng)) * 0.55;
    const double ang = uni(0.0, 2.0 * std::numbers::pi);
    const Ellipse organ{body.cx + rad * body.a * std::cos(ang), body.cy + rad * body.b * std::sin(ang),
                        uni(0.05, 0.22), uni(0.05, 0.18), uni(0.0, std::numbers::pi)};
    const auto hu = static_cast<float>(uni(-100.0, 300.0));
    paint(img, organ, [&](float prev) { return prev == kAirHu ? prev : hu; });
  }
  return smooth(img);
}

Image head_phantom(int64_t size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  Image img(size, size, kAirHu);
  const double a = uni(0.78, 0.88), b = uni(0.86, 0.94), t = uni(0.06, 0.1);
  const Ellipse skull{0.0, 0.0, a, b, 0.0};
  const Ellipse brain{0.0, 0.0, a - t, b - t, 0.0};
  paint_value(img, skull, 1000.0f);
  paint_value(img, brain, 35.0f);

  std::uniform_int_distribution<int> n_struct(2, 6);
  const int n = n_struct(rng);
  for (int i = 0; i < n; ++i) {
    const double rad = std::sqrt(u01(rng)) * 0.5;
    const double ang = uni(0.0, 2.0 * std::numbers::pi);
    const Ellipse s{rad * brain.a * std::cos(ang), rad * brain.b * std::sin(ang), uni(0.06, 0.2), uni(0.06, 0.2),
                    uni(0.0, std::numbers::pi)};
    const auto hu = static_cast<float>(35.0 + uni(-10.0, 10.0));
    paint_value(img, s, hu);
  }
  return smooth(img);
}

}  // namespace

Image generate_phantom(const DomainSpec& spec, int64_t size, std::mt19937_64& rng) {
  spec.validate();
  if (size < 8) throw std::invalid_argument("phantom size must be >= 8");
  return spec.phantom_style == PhantomStyle::head_like ? head_phantom(size, rng) : abdomen_phantom(size, rng);
}

// ---------------------------------------------------------------------------
// Windowing and noise

float window_normalize(float hu, double level, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("window width must be > 0");
  const double v = (static_cast<double>(hu) - (level - width / 2.0)) / width;
  return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

Image window_normalize(const Image& hu, double level, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("window width must be > 0");
  Image out(hu.height, hu.width);
  std::transform(hu.pixels.begin(), hu.pixels.end(), out.pixels.begin(),
                 [&](float v) { return window_normalize(v, level, width); });
  return out;
}

namespace {

double relative_density(double hu) { return std::max(hu + 1000.0, 0.0) / 1000.0; }

}  // namespace

double effective_noise_sigma(const DomainSpec& spec, double hu, double noise_scale) {
  const double gauss = spec.noise_sigma_base * noise_scale;
  const double photons = spec.photon_count_base / noise_scale;
  const double poisson_hu = 1000.0 * std::sqrt(relative_density(hu) / photons);
  const double poisson = poisson_hu / spec.window_width;
  return std::sqrt(gauss * gauss + poisson * poisson);
}

SlicePair apply_low_dose_noise(const Image& clean_hu, const DomainSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  std::uniform_real_distribution<double> jitter(1.0 - spec.mas_jitter_pct, 1.0 + spec.mas_jitter_pct);
  const double scale = spec.mas_jitter_pct > 0.0 ? jitter(rng) : 1.0;
  const double photons = spec.photon_count_base / scale;
  const double sigma = spec.noise_sigma_base * scale;
  const double lo = spec.window_level - spec.window_width / 2.0;

  std::normal_distribution<double> gauss(0.0, 1.0);
  SlicePair pair;
  pair.domain = spec.name;
  pair.slice_noise_scale = scale;
  pair.ndct = window_normalize(clean_hu, spec.window_level, spec.window_width);
  pair.ldct = Image(clean_hu.height, clean_hu.width);

  for (int64_t i = 0; i < clean_hu.size(); ++i) {
    const double hu = clean_hu.pixels[static_cast<size_t>(i)];
    // Quantum noise lives in pre-window intensity space.
    const double mean_counts = photons * relative_density(hu);
    double counts = mean_counts;
    if (mean_counts > 0.0) {
      if (mean_counts < 1.0e7) {
        std::poisson_distribution<int64_t> poisson(mean_counts);
        counts = static_cast<double>(poisson(rng));
      } else {
        counts = mean_counts + std::sqrt(mean_counts) * gauss(rng);
      }
    }
    const double noisy_hu = counts / photons * 1000.0 - 1000.0;
    const double v = (noisy_hu - lo) / spec.window_width + sigma * gauss(rng);
    pair.ldct.pixels[static_cast<size_t>(i)] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return pair;
}

// ---------------------------------------------------------------------------
// Patches

namespace {

std::vector<std::pair<int64_t, int64_t>> patch_origins(int64_t h, int64_t w, int n, int size, std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("patch count must be >= 1");
  if (size < 1 || size > h || size > w) {
    throw ShapeError("patch size " + std::to_string(size) + " exceeds image " + std::to_string(h) + "x" +
                     std::to_string(w));
  }
  std::uniform_int_distribution<int64_t> rows(0, h - size), cols(0, w - size);
  std::vector<std::pair<int64_t, int64_t>> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int64_t r = rows(rng);
    out.emplace_back(r, cols(rng));
  }
  return out;
}

}  // namespace

std::vector<PatchPair> extract_patches(const SlicePair& pair, int n, int size, std::mt19937_64& rng) {
  require_same_shape(pair.ldct, pair.ndct, "extract_patches");
  std::vector<PatchPair> out;
  for (auto [r, c] : patch_origins(pair.ldct.height, pair.ldct.width, n, size, rng)) {
    out.push_back({pair.ldct.crop(r, c, size, size), pair.ndct.crop(r, c, size, size), r, c});
  }
  return out;
}

std::vector<Image> extract_patches(const Image& image, int n, int size, std::mt19937_64& rng) {
  std::vector<Image> out;
  for (auto [r, c] : patch_origins(image.height, image.width, n, size, rng)) out.push_back(image.crop(r, c, size, size));
  return out;
}

std::vector<uint8_t> flat_region_mask(const Image& ndct, int radius) {
  std::vector<uint8_t> mask(static_cast<size_t>(ndct.size()), 0);
  for (int64_t r = radius; r < ndct.height - radius; ++r) {
    for (int64_t c = radius; c < ndct.width - radius; ++c) {
      const float center = ndct(r, c);
      if (center <= 0.05f || center >= 0.95f) continue;
      bool flat = true;
      for (int dr = -radius; dr <= radius && flat; ++dr)
        for (int dc = -radius; dc <= radius && flat; ++dc) flat = std::abs(ndct(r + dr, c + dc) - center) < 1e-4f;
      mask[static_cast<size_t>(r * ndct.width + c)] = flat ? 1 : 0;
    }
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Slice files

namespace {

constexpr std::array<char, 4> kMagic = {'B', 'N', 'U', 'A'};

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 4);
  uint32_t bits;
  std::memcpy(&bits, &value, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  os.write(reinterpret_cast<const char*>(&bits), 4);
}

template <typename T>
T get_le(std::istream& is) {
  uint32_t bits = 0;
  is.read(reinterpret_cast<char*>(&bits), 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  T value;
  std::memcpy(&value, &bits, 4);
  return value;
}

std::string hex64(uint64_t v) {
  std::ostringstream ss;
  ss << std::hex;
  ss.width(16);
  ss.fill('0');
  ss << v;
  return ss.str();
}

}  // namespace

void write_slice(const fs::path& path, const Image& image) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open slice file for writing: " + path.string());
  os.write(kMagic.data(), 4);
  put_le(os, kSliceFileVersion);
  put_le(os, static_cast<uint32_t>(image.height));
  put_le(os, static_cast<uint32_t>(image.width));
  for (float v : image.pixels) put_le(os, v);
  if (!os) throw std::runtime_error("failed writing slice file: " + path.string());
}

Image read_slice(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open slice file: " + path.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), 4);
  if (!is || magic != kMagic) throw std::runtime_error("bad slice magic in " + path.string());
  const auto version = get_le<uint32_t>(is);
  if (version != kSliceFileVersion)
    throw std::runtime_error("unsupported slice version " + std::to_string(version) + " in " + path.string());
  const auto h = get_le<uint32_t>(is);
  const auto w = get_le<uint32_t>(is);
  Image img(h, w);
  for (auto& v : img.pixels) v = get_le<float>(is);
  if (!is) throw std::runtime_error("truncated slice file: " + path.string());
  return img;
}

uint64_t image_hash(const Image& image) {
  uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](uint32_t word) {
    for (int b = 0; b < 4; ++b) {
      h ^= (word >> (8 * b)) & 0xFFu;
      h *= 0x100000001B3ULL;
    }
  };
  mix(static_cast<uint32_t>(image.height));
  mix(static_cast<uint32_t>(image.width));
  for (float v : image.pixels) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    mix(bits);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Dataset config / manifest

int SplitCounts::get(const std::string& split) const {
  if (split == "train") return train;
  if (split == "val") return val;
  if (split == "test") return test;
  throw std::invalid_argument("unknown split '" + split + "'");
}

void DatasetConfig::validate() const {
  if (slice_size < 16) throw std::invalid_argument("data.slice_size must be >= 16");
  if (domains.empty()) throw std::invalid_argument("data.domains must be non-empty");
  for (const auto& d : domains) {
    d.spec.validate();
    if (d.counts.train < 1 || d.counts.val < 1 || d.counts.test < 1)
      throw std::invalid_argument(d.spec.name + ": every split needs at least one slice");
  }
  domain(source_domain);
  domain(target_domain);
  if (source_domain == target_domain) throw std::invalid_argument("source and target domain must differ");
}

const DomainDataConfig& DatasetConfig::domain(const std::string& name) const {
  for (const auto& d : domains)
    if (d.spec.name == name) return d;
  throw std::invalid_argument("unknown domain '" + name + "'");
}

void to_json(json& j, const DatasetConfig& cfg) {
  json domains = json::array();
  for (const auto& d : cfg.domains) {
    json dj = d.spec;
    dj["train"] = d.counts.train;
    dj["val"] = d.counts.val;
    dj["test"] = d.counts.test;
    domains.push_back(dj);
  }
  j = json{{"slice_size", cfg.slice_size},
           {"seed", cfg.seed},
           {"source_domain", cfg.source_domain},
           {"target_domain", cfg.target_domain},
           {"domains", domains}};
}

void from_json(const json& j, DatasetConfig& cfg) {
  cfg = DatasetConfig{};
  for (const auto& [k, v] : j.items()) {
    if (k == "slice_size") cfg.slice_size = v.get<int64_t>();
    else if (k == "seed") cfg.seed = v.get<uint64_t>();
    else if (k == "source_domain") cfg.source_domain = v.get<std::string>();
    else if (k == "target_domain") cfg.target_domain = v.get<std::string>();
    else if (k == "domains") {
      cfg.domains.clear();
      for (const auto& dj : v) {
        DomainDataConfig d;
        json spec_part = dj;
        for (const char* key : {"train", "val", "test"}) spec_part.erase(key);
        d.spec = spec_part.get<DomainSpec>();
        d.counts.train = dj.value("train", d.counts.train);
        d.counts.val = dj.value("val", d.counts.val);
        d.counts.test = dj.value("test", d.counts.test);
        cfg.domains.push_back(d);
      }
    } else {
      throw std::invalid_argument("unknown data key '" + k + "'");
    }
  }
}

size_t Manifest::count(const std::string& domain, const std::string& split) const {
  auto d = slices.find(domain);
  if (d == slices.end()) return 0;
  auto s = d->second.find(split);
  return s == d->second.end() ? 0 : s->second.size();
}

void save_manifest(const Manifest& m, const fs::path& root) {
  json j;
  j["version"] = m.version;
  j["config"] = m.config;
  json slices = json::object();
  for (const auto& [domain, splits] : m.slices) {
    for (const auto& [split, records] : splits) {
      json arr = json::array();
      for (const auto& r : records) {
        json rj{{"index", r.index},
                {"seed", r.seed},
                {"noise_scale", r.noise_scale},
                {"ldct", r.ldct_file},
                {"ldct_hash", r.ldct_hash}};
        if (r.ndct_file) {
          rj["ndct"] = *r.ndct_file;
          rj["ndct_hash"] = *r.ndct_hash;
        }
        arr.push_back(rj);
      }
      slices[domain][split] = arr;
    }
  }
  j["slices"] = slices;
  json counts = json::object();
  for (const auto& [domain, splits] : m.slices)
    for (const auto& [split, records] : splits) counts[domain][split] = records.size();
  j["counts"] = counts;
  j["training_view"] = {{"source", m.config.source_domain + ":train:ldct+ndct"},
                        {"target", m.config.target_domain + ":train:ldct"}};

  std::ofstream os(root / "manifest.json");
  if (!os) throw std::runtime_error("cannot write manifest in " + root.string());
  os << j.dump(2) << "\n";
}

Manifest load_manifest(const fs::path& root) {
  const fs::path path = root / "manifest.json";
  std::ifstream is(path);
  if (!is) throw std::runtime_error("dataset manifest not found: " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  m.version = j.at("version").get<int>();
  m.config = j.at("config").get<DatasetConfig>();
  for (const auto& [domain, splits] : j.at("slices").items()) {
    for (const auto& [split, arr] : splits.items()) {
      auto& out = m.slices[domain][split];
      for (const auto& rj : arr) {
        SliceRecord r;
        r.index = rj.at("index").get<int>();
        r.seed = rj.at("seed").get<uint64_t>();
        r.noise_scale = rj.at("noise_scale").get<double>();
        r.ldct_file = rj.at("ldct").get<std::string>();
        r.ldct_hash = rj.at("ldct_hash").get<std::string>();
        if (rj.contains("ndct")) {
          r.ndct_file = rj.at("ndct").get<std::string>();
          r.ndct_hash = rj.at("ndct_hash").get<std::string>();
        }
        out.push_back(std::move(r));
      }
    }
  }
  return m;
}

Manifest build_dataset(const DatasetConfig& cfg, const fs::path& root) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw std::runtime_error("cannot create dataset directory " + root.string() + ": " + ec.message());

  Manifest m;
  m.config = cfg;
  for (const auto& d : cfg.domains) {
    for (const auto& split : kSplits) {
      const fs::path dir = fs::path(d.spec.name) / split;
      fs::create_directories(root / dir, ec);
      if (ec) throw std::runtime_error("cannot create " + (root / dir).string() + ": " + ec.message());
      const bool ldct_only = d.spec.name == cfg.target_domain && split == "train";
      auto& records = m.slices[d.spec.name][split];
      const int n = d.counts.get(split);
      for (int i = 0; i < n; ++i) {
        SliceRecord r;
        r.index = i;
        r.seed = derive_seed(cfg.seed, {hash_tag(d.spec.name), hash_tag(split), static_cast<uint64_t>(i)});
        std::mt19937_64 rng(r.seed);
        const Image clean = generate_phantom(d.spec, cfg.slice_size, rng);
        const SlicePair pair = apply_low_dose_noise(clean, d.spec, rng);
        r.noise_scale = pair.slice_noise_scale;

        char stem[32];
        std::snprintf(stem, sizeof stem, "%04d", i);
        r.ldct_file = (dir / (std::string(stem) + "_ldct.bin")).string();
        write_slice(root / r.ldct_file, pair.ldct);
        r.ldct_hash = hex64(image_hash(pair.ldct));
        if (!ldct_only) {
          r.ndct_file = (dir / (std::string(stem) + "_ndct.bin")).string();
          write_slice(root / *r.ndct_file, pair.ndct);
          r.ndct_hash = hex64(image_hash(pair.ndct));
        }
        records.push_back(std::move(r));
      }
    }
  }
  save_manifest(m, root);
  return m;
}

DatasetView::DatasetView(fs::path root) : root_(std::move(root)), manifest_(load_manifest(root_)) {}

const std::vector<SliceRecord>& DatasetView::records(const std::string& domain, const std::string& split) const {
  auto d = manifest_.slices.find(domain);
  if (d == manifest_.slices.end()) throw std::invalid_argument("dataset has no domain '" + domain + "'");
  auto s = d->second.find(split);
  if (s == d->second.end()) throw std::invalid_argument("dataset has no split '" + split + "' for " + domain);
  return s->second;
}

std::vector<SlicePair> DatasetView::paired(const std::string& domain, const std::string& split) const {
  std::vector<SlicePair> out;
  for (const auto& r : records(domain, split)) {
    if (!r.ndct_file) throw std::logic_error(domain + "/" + split + " exposes LDCT only");
    out.push_back({read_slice(root_ / *r.ndct_file), read_slice(root_ / r.ldct_file), domain, r.noise_scale});
  }
  return out;
}

std::vector<Image> DatasetView::ldct_only(const std::string& domain, const std::string& split) const {
  std::vector<Image> out;
  for (const auto& r : records(domain, split)) out.push_back(read_slice(root_ / r.ldct_file));
  return out;
}

}  // namespace ctbayes
