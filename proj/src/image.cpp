#include "swaykin/image.hpp"
#include <cctype>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "swaykin/error.hpp"

namespace swaykin {

GrayImage::GrayImage(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw Error(ErrorCode::InvalidInput, "negative image size");
  samples_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (width < 0 || height < 0 ||
      samples_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidInput, "sample count does not match image size");
  }
}

double GrayImage::bilinear(double x, double y, double outside) const {
  if (!contains(x, y)) return outside;
  const int x0 = std::min(static_cast<int>(x), width_ - 2 < 0 ? 0 : width_ - 2);
  const int y0 = std::min(static_cast<int>(y), height_ - 2 < 0 ? 0 : height_ - 2);
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * (*this)(x0, y0) + fx * (*this)(x1, y0);
  const double bottom = (1.0 - fx) * (*this)(x0, y1) + fx * (*this)(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

namespace {

std::string next_token(std::istream& in) {
  std::string token;
  while (in) {
    const int c = in.peek();
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  in >> token;
  return token;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  if (next_token(in) != "P5") throw Error(ErrorCode::Io, path.string() + " is not a binary PGM (P5)");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token(in));
    height = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, "malformed PGM header in " + path.string());
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(ErrorCode::Io, "unsupported PGM geometry or depth in " + path.string());
  }
  in.get();  // single whitespace after maxval
  std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw Error(ErrorCode::Io, "truncated PGM data in " + path.string());
  }
  std::vector<double> samples(raw.size());
  std::transform(raw.begin(), raw.end(), samples.begin(),
                 [maxval](unsigned char v) { return static_cast<double>(v) / maxval; });
  return GrayImage(width, height, std::move(samples));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<unsigned char> raw(img.samples().size());
  std::transform(img.samples().begin(), img.samples().end(), raw.begin(), [](double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

}  // namespace swaykin
