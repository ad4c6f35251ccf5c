#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace typostrike {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// 8-bit RGB raster, row-major, three bytes per pixel.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {});
  Image(int width, int height, std::vector<std::uint8_t> rgb);

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const std::uint8_t> pixels() const { return rgb_; }

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> rgb_;
};

struct FrameSet {
  std::vector<Image> frames;
  std::vector<double> timestamps;  // seconds, strictly increasing

  // Throws DataError unless all frames share dimensions and timestamps are
  // strictly increasing and as many as the frames.
  void validate() const;

  bool operator==(const FrameSet&) const = default;
};

Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);
std::vector<std::uint8_t> encode_png(const Image& image);

}  // namespace typostrike
