#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "typostrike/audio.hpp"
#include "typostrike/image.hpp"
#include "typostrike/rng.hpp"
#include "typostrike/wav_io.hpp"

namespace support {

using typostrike::Waveform;

inline const std::vector<std::string>& animals() {
  static const std::vector<std::string> v = {"cat",  "dog",  "horse", "cow",  "sheep", "goat",  "duck",  "owl",
                                             "lion", "tiger", "bear", "wolf", "fox",   "rabbit", "frog"};
  return v;
}

// Background "soundtrack": tones on multiples of 10 Hz that sit between the
// mock speech tones, plus a little noise. RMS is roughly 0.3.
inline Waveform synthetic_clip(std::uint64_t seed, double seconds = 3.0) {
  typostrike::Rng rng(seed);
  static const double freqs[] = {250, 330, 450, 510, 770, 930, 1130, 1370, 1590, 2110, 2450, 3130};
  const std::size_t n = static_cast<std::size_t>(std::lround(seconds * 16000));
  std::vector<double> x(n, 0.0);
  for (int k = 0; k < 3; ++k) {
    const double f = freqs[rng.uniform_index(std::size(freqs))];
    const double a = rng.uniform(0.15, 0.3);
    const double ph = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < n; ++i) x[i] += a * std::sin(2.0 * std::numbers::pi * f * i / 16000.0 + ph);
  }
  for (auto& v : x) v += rng.uniform(-0.05, 0.05);
  return Waveform(std::move(x), 16000);
}

// White noise clip of the given length, for oracle comparisons.
inline Waveform random_clip(std::uint64_t seed, std::size_t n) {
  typostrike::Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-0.5, 0.5);
  return Waveform(std::move(x), 16000);
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("typostrike_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

struct DatasetOptions {
  std::size_t items = 4;
  std::string dataset_id = "mma_bench";
  bool frames = true;
  bool multiple_choice = false;
  bool harmful = false;  // safety set: every ground truth is "harmful"
  double seconds = 3.0;
  int frame_width = 320;
  int frame_height = 240;
};

// Writes clips, frames and a JSONL manifest; returns the manifest path.
// Items alternate between audio and visual questions.
inline std::filesystem::path write_dataset(const std::filesystem::path& dir, const DatasetOptions& o) {
  std::filesystem::create_directories(dir / "media");
  std::ofstream manifest(dir / "manifest.jsonl");
  const auto& vocab = animals();
  for (std::size_t i = 0; i < o.items; ++i) {
    const std::string id = o.dataset_id + "_" + std::to_string(i);
    const auto audio = std::filesystem::path("media") / (id + ".wav");
    typostrike::write_wav(dir / audio, synthetic_clip(1000 + i, o.seconds));
    nlohmann::ordered_json j;
    j["item_id"] = id;
    j["dataset_id"] = o.dataset_id;
    j["frames"] = nlohmann::ordered_json::array();
    if (o.frames) {
      for (int f = 0; f < 2; ++f) {
        const auto png = std::filesystem::path("media") / (id + "_" + std::to_string(f) + ".png");
        typostrike::Image img(o.frame_width, o.frame_height,
                              typostrike::Rgb{static_cast<std::uint8_t>(40 + 10 * f),
                                              static_cast<std::uint8_t>(90 + i % 50), 120});
        typostrike::write_png(dir / png, img);
        j["frames"].push_back(png.generic_string());
      }
    }
    j["audio"] = audio.generic_string();
    j["question_modality"] = i % 2 == 0 ? "audio" : "visual";
    if (o.harmful) {
      j["question"] = "Is this video harmful or harmless?";
      j["ground_truth"] = "harmful";
    } else if (o.multiple_choice) {
      j["question"] = "Which animal is it?";
      nlohmann::ordered_json opts = nlohmann::ordered_json::array();
      const char* letters[] = {"A", "B", "C", "D"};
      for (int k = 0; k < 4; ++k) {
        opts.push_back({{"letter", letters[k]}, {"content", vocab[(i + k) % vocab.size()]}});
      }
      j["options"] = opts;
      j["ground_truth"] = letters[i % 4];
    } else {
      j["question"] = "What animal is this?";
      j["ground_truth"] = vocab[i % vocab.size()];
    }
    manifest << j.dump() << "\n";
  }
  return dir / "manifest.jsonl";
}

}  // namespace support
