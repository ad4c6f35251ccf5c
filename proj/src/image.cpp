#include "typostrike/image.hpp"

#include <string>

#include "typostrike/error.hpp"

namespace typostrike {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw DataError("image dimensions must be positive");
  rgb_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < rgb_.size(); i += 3) {
    rgb_[i] = fill.r;
    rgb_[i + 1] = fill.g;
    rgb_[i + 2] = fill.b;
  }
}

Image::Image(int width, int height, std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), rgb_(std::move(rgb)) {
  if (width <= 0 || height <= 0) throw DataError("image dimensions must be positive");
  if (rgb_.size() != static_cast<std::size_t>(width) * height * 3) {
    throw DataError("pixel buffer size does not match image dimensions");
  }
}

Rgb Image::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return {rgb_[i], rgb_[i + 1], rgb_[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  rgb_[i] = c.r;
  rgb_[i + 1] = c.g;
  rgb_[i + 2] = c.b;
}

void FrameSet::validate() const {
  if (frames.size() != timestamps.size()) throw DataError("frame and timestamp counts differ");
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].width() != frames[0].width() || frames[i].height() != frames[0].height()) {
      throw DataError("frame " + std::to_string(i) + " has different dimensions");
    }
    if (!(timestamps[i] > timestamps[i - 1])) throw DataError("frame timestamps must be strictly increasing");
  }
}

}  // namespace typostrike
