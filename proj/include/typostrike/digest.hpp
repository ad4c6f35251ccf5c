#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace typostrike {

class Waveform;
struct FrameSet;

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

// Hash of the sample rate plus every sample's IEEE-754 bit pattern, little
// endian. Two waveforms share a digest iff they are bit-identical.
std::string waveform_digest(const Waveform& w);
std::string frames_digest(const FrameSet& frames);

}  // namespace typostrike
