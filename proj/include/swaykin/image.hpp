#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace swaykin {

// Row-major grayscale image, intensities in [0, 1]. Pixel (x, y) has its
// center at integer coordinates (x, y).
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return samples_.empty(); }

  double operator()(int x, int y) const { return samples_[index(x, y)]; }
  double& operator()(int x, int y) { return samples_[index(x, y)]; }

  std::span<const double> row(int y) const {
    return {samples_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<const double> samples() const noexcept { return samples_; }
  std::span<double> samples() noexcept { return samples_; }

  bool contains(double x, double y) const noexcept {
    return x >= 0.0 && y >= 0.0 && x <= width_ - 1.0 && y <= height_ - 1.0;
  }

  // Bilinear interpolation; returns `outside` when (x, y) leaves the pixel grid.
  double bilinear(double x, double y, double outside = 0.0) const;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> samples_;
};

// 8-bit binary PGM (P5).
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

}  // namespace swaykin
