#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "typostrike/audio.hpp"

namespace typostrike {

// Decodes RIFF/WAVE holding 16-bit PCM or 32-bit IEEE float, any channel
// count and rate. Multi-channel audio is averaged down to mono; integer
// samples are divided by 32768.
Waveform decode_wav(std::span<const std::uint8_t> bytes);
Waveform read_wav(const std::filesystem::path& path);

// Encodes 16-bit PCM mono at the canonical rate, resampling first when
// needed and hard-clipping to [-1, 1].
std::vector<std::uint8_t> encode_wav(const Waveform& w);
void write_wav(const std::filesystem::path& path, const Waveform& w);

// Reads a file and resamples it to the canonical rate.
Waveform load_canonical_audio(const std::filesystem::path& path);

}  // namespace typostrike
