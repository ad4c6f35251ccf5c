#include "typostrike/digest.hpp"

#include <openssl/evp.h>

#include <bit>
#include <memory>
#include <vector>

#include "typostrike/audio.hpp"
#include "typostrike/error.hpp"
#include "typostrike/image.hpp"

namespace typostrike {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error("sha256 initialisation failed");
    }
  }

  void update(const void* data, std::size_t size) { EVP_DigestUpdate(ctx_.get(), data, size); }

  void update_u64(std::uint64_t v) {
    std::uint8_t le[8];
    for (int i = 0; i < 8; ++i) le[i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF);
    update(le, sizeof le);
  }

  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_hex(std::string_view text) {
  Sha256 h;
  h.update(text.data(), text.size());
  return h.hex();
}

std::string waveform_digest(const Waveform& w) {
  Sha256 h;
  h.update_u64(static_cast<std::uint64_t>(w.sample_rate()));
  h.update_u64(w.size());
  for (double s : w.samples()) h.update_u64(std::bit_cast<std::uint64_t>(s));
  return h.hex();
}

std::string frames_digest(const FrameSet& frames) {
  Sha256 h;
  h.update_u64(frames.frames.size());
  for (std::size_t i = 0; i < frames.frames.size(); ++i) {
    const auto& img = frames.frames[i];
    h.update_u64(static_cast<std::uint64_t>(img.width()));
    h.update_u64(static_cast<std::uint64_t>(img.height()));
    h.update(img.pixels().data(), img.pixels().size());
    h.update_u64(std::bit_cast<std::uint64_t>(frames.timestamps[i]));
  }
  return h.hex();
}

}  // namespace typostrike
