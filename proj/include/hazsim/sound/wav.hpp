#pragma once

#include "hazsim/sound/audio_block.hpp"

#include <filesystem>
#include <stdexcept>

namespace hazsim::sound {

struct WavError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Writes 16-bit PCM RIFF/WAVE. Samples are clamped to [-1, 1] and rounded.
void write_wav(const std::filesystem::path& path, const AudioBlock& block);

/// Reads 16-bit PCM RIFF/WAVE, skipping unknown chunks. Throws WavError.
AudioBlock read_wav(const std::filesystem::path& path);

}  // namespace hazsim::sound
