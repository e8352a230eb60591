#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctbayes {

/// Thrown whenever two arrays that must agree in shape do not.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Single-channel row-major float image.
struct Image {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(int64_t h, int64_t w, float fill = 0.0f)
      : height(h), width(w), pixels(static_cast<size_t>(h * w), fill) {}

  float& operator()(int64_t r, int64_t c) { return pixels[static_cast<size_t>(r * width + c)]; }
  float operator()(int64_t r, int64_t c) const { return pixels[static_cast<size_t>(r * width + c)]; }

  int64_t size() const { return height * width; }
  std::span<const float> view() const { return pixels; }

  bool same_shape(const Image& other) const {
    return height == other.height && width == other.width;
  }

  Image crop(int64_t row, int64_t col, int64_t h, int64_t w) const;
};

inline void require_same_shape(const Image& a, const Image& b, const std::string& what) {
  if (!a.same_shape(b)) {
    throw ShapeError(what + ": shape mismatch " + std::to_string(a.height) + "x" +
                     std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                     std::to_string(b.width));
  }
}

}  // namespace ctbayes
