#include "ctbayes/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

namespace ctbayes::metrics {

double psnr(const Image& ref, const Image& test, double peak) {
  require_same_shape(ref, test, "psnr");
  if (ref.size() == 0) throw ShapeError("psnr: empty image");
  double sse = 0.0;
  for (int64_t i = 0; i < ref.size(); ++i) {
    const double d = static_cast<double>(ref.pixels[i]) - static_cast<double>(test.pixels[i]);
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(ref.size());
  if (mse < 1e-12) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(peak * peak / mse));
}

namespace {

using Plane = std::vector<double>;

Plane to_plane(const Image& img) { return Plane(img.pixels.begin(), img.pixels.end()); }

// Separable correlation keeping only fully-covered output positions.
Plane filter_valid(const Plane& in, int64_t h, int64_t w, const std::vector<double>& k) {
  const auto n = static_cast<int64_t>(k.size());
  const int64_t ow = w - n + 1, oh = h - n + 1;
  Plane tmp(static_cast<size_t>(h * ow), 0.0), out(static_cast<size_t>(oh * ow), 0.0);
  for (int64_t r = 0; r < h; ++r)
    for (int64_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int64_t t = 0; t < n; ++t) acc += k[t] * in[r * w + c + t];
      tmp[r * ow + c] = acc;
    }
  for (int64_t r = 0; r < oh; ++r)
    for (int64_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int64_t t = 0; t < n; ++t) acc += k[t] * tmp[(r + t) * ow + c];
      out[r * ow + c] = acc;
    }
  return out;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<size_t>(size));
  const double mid = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    k[i] = std::exp(-((i - mid) * (i - mid)) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

}  // namespace

double ssim(const Image& ref, const Image& test, double peak) {
  require_same_shape(ref, test, "ssim");
  constexpr int kWin = 11;
  if (ref.height < kWin || ref.width < kWin) throw ShapeError("ssim: images must be at least 11x11");
  static const std::vector<double> kernel = gaussian_kernel(kWin, 1.5);
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);

  const Plane a = to_plane(ref), b = to_plane(test);
  Plane aa(a.size()), bb(a.size()), ab(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const int64_t h = ref.height, w = ref.width;
  const Plane mu_a = filter_valid(a, h, w, kernel), mu_b = filter_valid(b, h, w, kernel);
  const Plane e_aa = filter_valid(aa, h, w, kernel), e_bb = filter_valid(bb, h, w, kernel);
  const Plane e_ab = filter_valid(ab, h, w, kernel);

  double total = 0.0;
  for (size_t i = 0; i < mu_a.size(); ++i) {
    const double va = e_aa[i] - mu_a[i] * mu_a[i];
    const double vb = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
    const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
    total += num / den;
  }
  return total / static_cast<double>(mu_a.size());
}

namespace {

Plane prewitt_magnitude(const Image& img) {
  const int64_t h = img.height, w = img.width;
  auto at = [&](int64_t r, int64_t c) -> double {
    return (r < 0 || c < 0 || r >= h || c >= w) ? 0.0 : static_cast<double>(img(r, c));
  };
  Plane mag(static_cast<size_t>(h * w));
  for (int64_t r = 0; r < h; ++r)
    for (int64_t c = 0; c < w; ++c) {
      double gx = 0.0, gy = 0.0;
      for (int d = -1; d <= 1; ++d) {
        gx += at(r + d, c - 1) - at(r + d, c + 1);
        gy += at(r - 1, c + d) - at(r + 1, c + d);
      }
      gx /= 3.0;
      gy /= 3.0;
      mag[r * w + c] = std::sqrt(gx * gx + gy * gy);
    }
  return mag;
}

}  // namespace

double gmsd(const Image& ref, const Image& test) {
  require_same_shape(ref, test, "gmsd");
  if (ref.size() < 2) throw ShapeError("gmsd: need at least two pixels");
  const Plane mr = prewitt_magnitude(ref), mt = prewitt_magnitude(test);
  Plane gms(mr.size());
  double mean = 0.0;
  for (size_t i = 0; i < mr.size(); ++i) {
    gms[i] = (2.0 * mr[i] * mt[i] + kGmsdConstant) / (mr[i] * mr[i] + mt[i] * mt[i] + kGmsdConstant);
    mean += gms[i];
  }
  mean /= static_cast<double>(gms.size());
  double ss = 0.0;
  for (double v : gms) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(gms.size() - 1));
}

namespace {

constexpr int kBlock = 8;

using DctMatrix = std::array<std::array<double, kBlock>, kBlock>;

const DctMatrix& dct_matrix() {
  static const DctMatrix m = [] {
    DctMatrix out{};
    for (int k = 0; k < kBlock; ++k) {
      const double alpha = k == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
      for (int n = 0; n < kBlock; ++n)
        out[k][n] = alpha * std::cos(std::numbers::pi * (2.0 * n + 1.0) * k / (2.0 * kBlock));
    }
    return out;
  }();
  return m;
}

// Coefficients of every block, laid out as [sub-band][block].
std::vector<std::vector<double>> subbands(const Image& img) {
  const DctMatrix& m = dct_matrix();
  const int64_t br = img.height / kBlock, bc = img.width / kBlock;
  std::vector<std::vector<double>> bands(kBlock * kBlock, std::vector<double>(static_cast<size_t>(br * bc)));
  std::array<std::array<double, kBlock>, kBlock> tmp{};
  for (int64_t by = 0; by < br; ++by)
    for (int64_t bx = 0; bx < bc; ++bx) {
      // tmp = M * X
      for (int u = 0; u < kBlock; ++u)
        for (int j = 0; j < kBlock; ++j) {
          double acc = 0.0;
          for (int i = 0; i < kBlock; ++i) acc += m[u][i] * img(by * kBlock + i, bx * kBlock + j);
          tmp[u][j] = acc;
        }
      // coeff = tmp * M^T
      for (int u = 0; u < kBlock; ++u)
        for (int v = 0; v < kBlock; ++v) {
          double acc = 0.0;
          for (int j = 0; j < kBlock; ++j) acc += tmp[u][j] * m[v][j];
          bands[u * kBlock + v][by * bc + bx] = acc;
        }
    }
  return bands;
}

struct Moments {
  double mean_a, mean_b, var_a, var_b, cov;
};

Moments moments(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  Moments m{0, 0, 0, 0, 0};
  for (size_t i = 0; i < a.size(); ++i) {
    m.mean_a += a[i];
    m.mean_b += b[i];
  }
  m.mean_a /= n;
  m.mean_b /= n;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - m.mean_a, db = b[i] - m.mean_b;
    m.var_a += da * da;
    m.var_b += db * db;
    m.cov += da * db;
  }
  m.var_a /= n;
  m.var_b /= n;
  m.cov /= n;
  return m;
}

}  // namespace

DssResult dss_detail(const Image& ref, const Image& test, double peak) {
  require_same_shape(ref, test, "dss");
  if ((ref.height / kBlock) * (ref.width / kBlock) < 2) throw ShapeError("dss: need at least two 8x8 blocks");
  const auto ba = subbands(ref), bb = subbands(test);

  const double c1_dc = std::pow(0.01 * kBlock * peak, 2), c2_dc = std::pow(0.03 * kBlock * peak, 2);
  const double c_ac = std::pow(0.03 * peak, 2);

  const Moments dc = moments(ba[0], bb[0]);
  const double s_dc = std::max(0.0, ((2.0 * dc.mean_a * dc.mean_b + c1_dc) * (2.0 * dc.cov + c2_dc)) /
                                        ((dc.mean_a * dc.mean_a + dc.mean_b * dc.mean_b + c1_dc) *
                                         (dc.var_a + dc.var_b + c2_dc)));
  double low = 0.0, high = 0.0;
  int n_low = 0, n_high = 0;
  for (int u = 0; u < kBlock; ++u)
    for (int v = 0; v < kBlock; ++v) {
      if (u == 0 && v == 0) continue;
      const Moments m = moments(ba[u * kBlock + v], bb[u * kBlock + v]);
      const double s = std::max(0.0, (2.0 * m.cov + c_ac) / (m.var_a + m.var_b + c_ac));
      if (u + v <= 3) {
        low += s;
        ++n_low;
      } else {
        high += s;
        ++n_high;
      }
    }
  DssResult out;
  out.similarity = 0.5 * s_dc + 0.3 * (low / n_low) + 0.2 * (high / n_high);
  out.dissimilarity = 1.0 - out.similarity;
  return out;
}

MetricValues evaluate(const Image& ref, const Image& test) {
  MetricValues v;
  v.psnr = psnr(ref, test);
  v.ssim = ssim(ref, test);
  v.gmsd = gmsd(ref, test);
  const DssResult d = dss_detail(ref, test);
  v.dss = d.dissimilarity;
  v.dss_similarity = d.similarity;
  return v;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

MeanStd MetricReport::aggregate(double MetricValues::*field) const {
  std::vector<double> values;
  values.reserve(per_image.size());
  for (const auto& v : per_image) values.push_back(v.*field);
  return mean_std(values);
}

nlohmann::json MetricReport::summary() const {
  nlohmann::json j;
  j["count"] = per_image.size();
  auto put = [&](const char* name, double MetricValues::*field) {
    const MeanStd ms = aggregate(field);
    j[name] = {{"mean", ms.mean}, {"std", ms.std}};
  };
  put("psnr", &MetricValues::psnr);
  put("ssim", &MetricValues::ssim);
  put("gmsd", &MetricValues::gmsd);
  put("dss", &MetricValues::dss);
  put("dss_similarity", &MetricValues::dss_similarity);
  return j;
}

void MetricReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.precision(10);
  os << "image,psnr,ssim,gmsd,dss,dss_similarity\n";
  for (size_t i = 0; i < per_image.size(); ++i) {
    const auto& v = per_image[i];
    os << names[i] << ',' << v.psnr << ',' << v.ssim << ',' << v.gmsd << ',' << v.dss << ',' << v.dss_similarity
       << '\n';
  }
}

void MetricReport::write_summary(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << summary().dump(2) << "\n";
}

}  // namespace ctbayes::metrics
