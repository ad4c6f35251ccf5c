#include "typostrike/wav_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "typostrike/error.hpp"

namespace typostrike {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

Waveform decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError("not a RIFF/WAVE stream");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::uint32_t chunk_size = le32(hdr + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;
    const std::size_t size = std::min<std::size_t>(chunk_size, available);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16) throw DataError("wav fmt chunk too short");
      const std::uint8_t* f = bytes.data() + body;
      format = le16(f);
      channels = le16(f + 2);
      rate = le32(f + 4);
      bits = le16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 26) throw DataError("wav extensible fmt chunk too short");
        format = le16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.subspan(body, size);
      have_data = true;
    }
    pos = body + chunk_size + (chunk_size & 1);
  }
  if (!have_fmt) throw DataError("wav stream has no fmt chunk");
  if (!have_data) throw DataError("wav stream has no data chunk");
  if (channels == 0 || rate == 0) throw DataError("wav stream declares zero channels or rate");

  std::vector<double> interleaved;
  if (format == kFormatPcm && bits == 16) {
    interleaved.resize(data.size() / 2);
    for (std::size_t i = 0; i < interleaved.size(); ++i) {
      const auto v = static_cast<std::int16_t>(le16(data.data() + 2 * i));
      interleaved[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    interleaved.resize(data.size() / 4);
    for (std::size_t i = 0; i < interleaved.size(); ++i) {
      const float v = std::bit_cast<float>(le32(data.data() + 4 * i));
      if (!std::isfinite(v)) throw DataError("wav stream contains a non-finite float sample");
      interleaved[i] = static_cast<double>(v);
    }
  } else {
    throw DataError("unsupported wav encoding (format " + std::to_string(format) + ", " +
                    std::to_string(bits) + " bits); expected 16-bit PCM or 32-bit float");
  }
  interleaved.resize(interleaved.size() - interleaved.size() % channels);
  return downmix(interleaved, channels, static_cast<int>(rate));
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open audio file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const Waveform& w) {
  const Waveform canonical =
      w.sample_rate() == kCanonicalSampleRate ? w : resample(w, kCanonicalSampleRate);
  const auto samples = canonical.samples();
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, kCanonicalSampleRate);
  put32(out, kCanonicalSampleRate * 2);
  put16(out, 2);
  put16(out, 16);
  put_tag(out, "data");
  put32(out, data_bytes);
  for (double s : samples) {
    const double scaled = std::clamp(s, -1.0, 1.0) * 32768.0;
    const auto v = static_cast<std::int16_t>(std::clamp<long>(std::lround(scaled), -32768, 32767));
    put16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  const auto bytes = encode_wav(w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write audio file: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Waveform load_canonical_audio(const std::filesystem::path& path) {
  return resample(read_wav(path), kCanonicalSampleRate);
}

}  // namespace typostrike
