#include "prosodyrl/wav_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "prosodyrl/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "wav_io assumes a little-endian host");

namespace prosody {

namespace {

constexpr uint16_t kFormatPcm = 1;

template <typename T>
T read_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  require(static_cast<bool>(in), Error::Kind::MalformedWav, "truncated WAV file");
  return value;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Error::Kind::IoError, "cannot open " + path);

  char riff[4];
  in.read(riff, 4);
  require(static_cast<bool>(in) && std::memcmp(riff, "RIFF", 4) == 0,
          Error::Kind::MalformedWav, path + ": missing RIFF header");
  (void)read_le<uint32_t>(in);  // total size, unreliable in the wild
  char wave[4];
  in.read(wave, 4);
  require(static_cast<bool>(in) && std::memcmp(wave, "WAVE", 4) == 0,
          Error::Kind::MalformedWav, path + ": not a WAVE file");

  bool have_fmt = false;
  uint16_t channels = 0, bits = 0, format = 0;
  uint32_t rate = 0;
  std::vector<int16_t> pcm;
  bool have_data = false;

  while (true) {
    char id[4];
    in.read(id, 4);
    if (!in) break;
    const uint32_t chunk_size = read_le<uint32_t>(in);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      require(chunk_size >= 16, Error::Kind::MalformedWav, path + ": short fmt chunk");
      format = read_le<uint16_t>(in);
      channels = read_le<uint16_t>(in);
      rate = read_le<uint32_t>(in);
      (void)read_le<uint32_t>(in);  // byte rate
      (void)read_le<uint16_t>(in);  // block align
      bits = read_le<uint16_t>(in);
      in.seekg(chunk_size - 16 + (chunk_size & 1), std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      require(have_fmt, Error::Kind::MalformedWav, path + ": data chunk before fmt");
      require(chunk_size % 2 == 0, Error::Kind::MalformedWav, path + ": odd data size");
      pcm.resize(chunk_size / 2);
      in.read(reinterpret_cast<char*>(pcm.data()), chunk_size);
      require(static_cast<bool>(in), Error::Kind::MalformedWav, path + ": truncated data chunk");
      have_data = true;
      break;
    } else {
      in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
      require(static_cast<bool>(in), Error::Kind::MalformedWav, path + ": truncated chunk");
    }
  }
  require(have_fmt && have_data, Error::Kind::MalformedWav, path + ": missing fmt or data chunk");
  require(format == kFormatPcm, Error::Kind::UnsupportedFormat, path + ": not PCM");
  require(bits == 16, Error::Kind::UnsupportedFormat, path + ": not 16-bit");
  require(channels == 1, Error::Kind::UnsupportedFormat, path + ": not mono");
  require(rate == kPipelineRate, Error::Kind::UnsupportedFormat,
          path + ": sample rate must be 16000");

  AudioBuffer buf;
  buf.sample_rate = static_cast<int>(rate);
  buf.samples.resize(pcm.size());
  for (std::size_t i = 0; i < pcm.size(); ++i)
    buf.samples[i] = static_cast<float>(pcm[i]) / 32768.0f;
  return buf;
}

void write_wav(const std::string& path, const AudioBuffer& buf) {
  validate_signal(buf);
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Error::Kind::IoError, "cannot write " + path);

  const uint32_t data_bytes = static_cast<uint32_t>(buf.samples.size() * 2);
  out.write("RIFF", 4);
  write_le<uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<uint32_t>(out, 16);
  write_le<uint16_t>(out, kFormatPcm);
  write_le<uint16_t>(out, 1);
  write_le<uint32_t>(out, static_cast<uint32_t>(buf.sample_rate));
  write_le<uint32_t>(out, static_cast<uint32_t>(buf.sample_rate) * 2);
  write_le<uint16_t>(out, 2);
  write_le<uint16_t>(out, 16);
  out.write("data", 4);
  write_le<uint32_t>(out, data_bytes);

  for (float s : buf.samples) {
    long code = std::lround(static_cast<double>(s) * 32768.0);
    if (code > 32767) code = 32767;
    if (code < -32767) code = -32767;
    write_le<int16_t>(out, static_cast<int16_t>(code));
  }
  require(out.good(), Error::Kind::IoError, "short write to " + path);
}

}  // namespace prosody
