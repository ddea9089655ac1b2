// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/wav.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace forknet {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr long kRequiredRate = 16000;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw std::runtime_error("wav: " + path + ": " + msg);
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) | (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t get_u16(const unsigned char* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

AudioBuffer wav_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12) fail(path, "truncated RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0) fail(path, "chunk id: expected RIFF");
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) fail(path, "format: expected WAVE");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  uint32_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    uint32_t len = get_u32(hdr + 4);
    size_t body = pos + 8;
    if (body + len > bytes.size()) fail(path, "truncated chunk");
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (len < 16) fail(path, "fmt chunk too short");
      format = get_u16(bytes.data() + body);
      channels = get_u16(bytes.data() + body + 2);
      rate = get_u32(bytes.data() + body + 4);
      bits = get_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word-aligned
  }
  if (!have_fmt) fail(path, "missing fmt chunk");
  if (!data) fail(path, "missing data chunk");

  if (format != kFormatPcm && format != kFormatFloat)
    fail(path, "codec: expected PCM (1) or IEEE float (3), got " + std::to_string(format));
  if (channels != 1) fail(path, "channels: expected 1, got " + std::to_string(channels));
  if (rate != kRequiredRate)
    fail(path, "sample rate: expected " + std::to_string(kRequiredRate) + ", got " + std::to_string(rate));
  uint16_t want_bits = (format == kFormatPcm) ? 16 : 32;
  if (bits != want_bits)
    fail(path, "bits per sample: expected " + std::to_string(want_bits) + ", got " + std::to_string(bits));

  AudioBuffer out;
  out.sample_rate = static_cast<long>(rate);
  if (format == kFormatPcm) {
    size_t n = data_len / 2;
    out.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      auto u = get_u16(data + 2 * i);
      out.samples[i] = static_cast<double>(static_cast<int16_t>(u)) / 32768.0;
    }
  } else {
    size_t n = data_len / 4;
    out.samples.resize(n);
    for (size_t i = 0; i < n; ++i) out.samples[i] = std::bit_cast<float>(get_u32(data + 4 * i));
  }
  return out;
}

void wav_write(const std::string& path, const AudioBuffer& audio) {
  for (double v : audio.samples)
    if (!std::isfinite(v)) fail(path, "non-finite sample on write");
  if (audio.sample_rate <= 0) fail(path, "sample rate must be positive");

  uint32_t n = static_cast<uint32_t>(audio.samples.size());
  uint32_t data_len = 2 * n;
  uint32_t rate = static_cast<uint32_t>(audio.sample_rate);

  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  put_u32(out, 36 + data_len);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, rate);
  put_u32(out, rate * 2);  // byte rate
  put_u16(out, 2);         // block align
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_len);
  for (double v : audio.samples) {
    long q = std::lround(v * 32768.0);
    q = std::min(q, 32767L);
    q = std::max(q, -32768L);
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(path, "cannot open file for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(path, "short write");
}

}  // namespace forknet
