#include "hazsim/sound/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace hazsim::sound {

namespace {

void put_u32(std::ofstream& f, std::uint32_t v) {
  const std::array<char, 4> b{char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
  f.write(b.data(), 4);
}
void put_u16(std::ofstream& f, std::uint16_t v) {
  const std::array<char, 2> b{char(v & 0xff), char((v >> 8) & 0xff)};
  f.write(b.data(), 2);
}
std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
std::uint16_t get_u16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }

}  // namespace

void write_wav(const std::filesystem::path& path, const AudioBlock& block) {
  if (block.channels() < 1) throw WavError("cannot write a block with no channels");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw WavError("cannot open " + path.string() + " for writing");
  const std::uint16_t channels = static_cast<std::uint16_t>(block.channels());
  const std::uint32_t frames = static_cast<std::uint32_t>(block.frames());
  const std::uint32_t data_bytes = frames * channels * 2;
  f.write("RIFF", 4);
  put_u32(f, 36 + data_bytes);
  f.write("WAVEfmt ", 8);
  put_u32(f, 16);
  put_u16(f, 1);
  put_u16(f, channels);
  put_u32(f, static_cast<std::uint32_t>(block.sample_rate));
  put_u32(f, static_cast<std::uint32_t>(block.sample_rate) * channels * 2);
  put_u16(f, static_cast<std::uint16_t>(channels * 2));
  put_u16(f, 16);
  f.write("data", 4);
  put_u32(f, data_bytes);
  std::vector<char> buf(data_bytes);
  std::size_t k = 0;
  for (std::uint32_t i = 0; i < frames; ++i)
    for (int c = 0; c < channels; ++c) {
      const float s = std::clamp(block.samples(i, c), -1.0f, 1.0f);
      const auto v = static_cast<std::int16_t>(std::lround(s * 32767.0f));
      const auto u = static_cast<std::uint16_t>(v);
      buf[k++] = char(u & 0xff);
      buf[k++] = char(u >> 8);
    }
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw WavError("write failed for " + path.string());
}

AudioBlock read_wav(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw WavError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw WavError(path.string() + " is not a RIFF/WAVE file");
  std::size_t pos = 12;
  int channels = 0, rate = 0, bits = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* id = bytes.data() + pos;
    const std::size_t len = get_u32(id + 4);
    const unsigned char* body = id + 8;
    if (pos + 8 + len > bytes.size()) throw WavError("truncated chunk in " + path.string());
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16 || get_u16(body) != 1) throw WavError("only PCM WAVE is supported");
      channels = get_u16(body + 2);
      rate = static_cast<int>(get_u32(body + 4));
      bits = get_u16(body + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = body;
      data_len = len;
    }
    pos += 8 + len + (len & 1);
  }
  if (channels < 1 || rate <= 0) throw WavError("missing fmt chunk in " + path.string());
  if (bits != 16) throw WavError("only 16-bit PCM is supported");
  if (!data) throw WavError("missing data chunk in " + path.string());
  const Eigen::Index frames = static_cast<Eigen::Index>(data_len / (2 * channels));
  AudioBlock out(rate, frames, channels);
  for (Eigen::Index i = 0; i < frames; ++i)
    for (int c = 0; c < channels; ++c) {
      const auto v = static_cast<std::int16_t>(get_u16(data + 2 * (i * channels + c)));
      out.samples(i, c) = static_cast<float>(v) / 32767.0f;
    }
  return out;
}

}  // namespace hazsim::sound
