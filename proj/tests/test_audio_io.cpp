#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "prosodyrl/audio.hpp"
#include "prosodyrl/emotion.hpp"
#include "prosodyrl/errors.hpp"
#include "prosodyrl/rng.hpp"
#include "prosodyrl/synth.hpp"
#include "prosodyrl/wav_io.hpp"

using namespace prosody;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
  const fs::path p = fs::temp_directory_path() / "prosodyrl_test_audio";
  fs::create_directories(p);
  return p;
}

Error::Kind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return Error::Kind::IoError;
}

}  // namespace

TEST_CASE("wav round trip is exact on every 16-bit code value") {
  AudioBuffer buf;
  buf.samples.reserve(65535);
  for (int code = -32767; code <= 32767; ++code)
    buf.samples.push_back(static_cast<float>(code) / 32768.0f);

  const std::string path = (test_dir() / "codes.wav").string();
  write_wav(path, buf);
  const AudioBuffer got = read_wav(path);

  REQUIRE(got.size() == buf.size());
  CHECK(got.sample_rate == kPipelineRate);
  for (int64_t i = 0; i < got.size(); ++i)
    REQUIRE(got.samples[static_cast<std::size_t>(i)] == buf.samples[static_cast<std::size_t>(i)]);
}

TEST_CASE("wav quantizer clamps the boundary values symmetrically") {
  AudioBuffer buf({1.0f, -1.0f, 0.0f, 2.0f, -2.0f}, kPipelineRate);
  const std::string path = (test_dir() / "clamp.wav").string();
  write_wav(path, buf);
  const AudioBuffer got = read_wav(path);
  CHECK(got.samples[0] == doctest::Approx(32767.0f / 32768.0f));
  CHECK(got.samples[1] == doctest::Approx(-32767.0f / 32768.0f));
  CHECK(got.samples[2] == 0.0f);
  CHECK(got.samples[3] == got.samples[0]);
  CHECK(got.samples[4] == got.samples[1]);
}

TEST_CASE("wav reader rejects bad files with specific error kinds") {
  const fs::path dir = test_dir();

  CHECK(kind_of([&] { read_wav((dir / "missing.wav").string()); }) == Error::Kind::IoError);

  AudioBuffer buf(std::vector<float>(64, 0.25f), kPipelineRate);
  const std::string path = (dir / "mutate.wav").string();
  write_wav(path, buf);

  auto patch = [&](std::streamoff off, std::vector<uint8_t> bytes) {
    write_wav(path, buf);
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(off);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  };

  // Sample rate field set to 44100.
  patch(24, {0x44, 0xAC, 0x00, 0x00});
  CHECK(kind_of([&] { read_wav(path); }) == Error::Kind::UnsupportedFormat);

  // Stereo channel count.
  patch(22, {0x02, 0x00});
  CHECK(kind_of([&] { read_wav(path); }) == Error::Kind::UnsupportedFormat);

  // IEEE-float format tag.
  patch(20, {0x03, 0x00});
  CHECK(kind_of([&] { read_wav(path); }) == Error::Kind::UnsupportedFormat);

  // Truncated mid-header.
  write_wav(path, buf);
  fs::resize_file(path, 20);
  CHECK(kind_of([&] { read_wav(path); }) == Error::Kind::MalformedWav);

  // Not a RIFF file at all.
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << "certainly not audio";
  }
  CHECK(kind_of([&] { read_wav(path); }) == Error::Kind::MalformedWav);
}

TEST_CASE("clip_saturate clamps and counts") {
  AudioBuffer buf({0.5f, 1.5f, -3.0f, -0.25f, 1.0f}, kPipelineRate);
  CHECK(clip_saturate(buf) == 2);
  CHECK(buf.samples[1] == 1.0f);
  CHECK(buf.samples[2] == -1.0f);
  CHECK(buf.samples[0] == 0.5f);
  CHECK(clip_saturate(buf) == 0);
}

TEST_CASE("validate_signal rejects empty and non-finite buffers") {
  AudioBuffer empty;
  CHECK(kind_of([&] { validate_signal(empty); }) == Error::Kind::EmptySignal);
  AudioBuffer nan_buf({0.0f, std::nanf("")}, kPipelineRate);
  CHECK(kind_of([&] { validate_signal(nan_buf); }) == Error::Kind::NonFinite);
  AudioBuffer ok({0.0f, 0.5f}, kPipelineRate);
  CHECK_NOTHROW(validate_signal(ok));
}

TEST_CASE("frame_energy matches closed-form RMS values") {
  SUBCASE("all zeros") {
    AudioBuffer buf(std::vector<float>(640, 0.0f), kPipelineRate);
    for (float e : frame_energy(buf, 320, 320)) CHECK(e == 0.0f);
  }
  SUBCASE("constant 0.5") {
    AudioBuffer buf(std::vector<float>(640, 0.5f), kPipelineRate);
    const auto e = frame_energy(buf, 320, 320);
    REQUIRE(e.size() == 2);
    CHECK(e[0] == doctest::Approx(0.5f).epsilon(1e-6));
    CHECK(e[1] == doctest::Approx(0.5f).epsilon(1e-6));
  }
  SUBCASE("full-scale sine over whole periods has RMS 1/sqrt(2)") {
    // 200 Hz at 16 kHz puts exactly 4 periods in a 320-sample frame.
    std::vector<float> s(320);
    for (int n = 0; n < 320; ++n)
      s[static_cast<std::size_t>(n)] =
          std::sin(2.0 * M_PI * 200.0 * n / 16000.0);
    AudioBuffer buf(std::move(s), kPipelineRate);
    const auto e = frame_energy(buf, 320, 320);
    REQUIRE(e.size() == 1);
    CHECK(e[0] == doctest::Approx(0.7071067811865476).epsilon(1e-3));
  }
  SUBCASE("frame count is ceil(len/hop) and the tail frame is zero-padded") {
    AudioBuffer buf({1.0f, 1.0f, 1.0f, 1.0f, 1.0f}, kPipelineRate);
    const auto e = frame_energy(buf, 4, 2);
    REQUIRE(e.size() == 3);
    CHECK(e[0] == doctest::Approx(1.0f));
    CHECK(e[1] == doctest::Approx(std::sqrt(3.0 / 4.0)));
    CHECK(e[2] == doctest::Approx(std::sqrt(1.0 / 4.0)));
  }
  SUBCASE("bad arguments") {
    AudioBuffer buf({1.0f}, kPipelineRate);
    CHECK(kind_of([&] { frame_energy(buf, 0, 2); }) == Error::Kind::BadArgument);
    CHECK(kind_of([&] { frame_energy(buf, 4, 0); }) == Error::Kind::BadArgument);
    AudioBuffer empty;
    CHECK(kind_of([&] { frame_energy(empty, 4, 2); }) == Error::Kind::EmptySignal);
  }
}

TEST_CASE("rng streams are deterministic and substreams decorrelate") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 64; ++i) REQUIRE(a.next_u64() == b.next_u64());

  Rng base(1234);
  Rng s1 = base.substream("gumbel");
  Rng s2 = base.substream("action");
  Rng s1_again = base.substream("gumbel");
  CHECK(s1.next_u64() == s1_again.next_u64());
  CHECK(base.substream("gumbel", 0).seed() != base.substream("gumbel", 1).seed());
  CHECK(s1.seed() != s2.seed());

  Rng u(99);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    const int k = u.uniform_int(7);
    REQUIRE(k >= 0);
    REQUIRE(k < 7);
  }
  const double lo = u.uniform(-2.0, 3.0);
  CHECK(lo >= -2.0);
  CHECK(lo < 3.0);
}

TEST_CASE("rng normal and gumbel draws match their distribution moments") {
  Rng r(777);
  const int n = 40000;
  double nsum = 0.0, nsq = 0.0, gsum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    nsum += z;
    nsq += z * z;
    gsum += r.gumbel();
  }
  CHECK(nsum / n == doctest::Approx(0.0).epsilon(0.02).scale(1.0));
  CHECK(nsq / n == doctest::Approx(1.0).epsilon(0.03));
  // Standard Gumbel mean is the Euler-Mascheroni constant.
  CHECK(gsum / n == doctest::Approx(0.5772156649).epsilon(0.05));
}

TEST_CASE("emotion names and distributions") {
  CHECK(emotion_from_name("neutral") == 0);
  CHECK(emotion_from_name("fearful") == 4);
  CHECK(emotion_from_name("bored") == -1);

  auto d = EmotionDistribution::one_hot(2);
  CHECK_NOTHROW(d.validate());
  CHECK(d.argmax() == 2);
  CHECK(d.in_top2(2));

  d.p = {0.1f, 0.4f, 0.3f, 0.15f, 0.05f};
  CHECK(d.argmax() == 1);
  CHECK(d.in_top2(1));
  CHECK(d.in_top2(2));
  CHECK_FALSE(d.in_top2(0));

  d.p = {0.5f, 0.5f, 0.5f, 0.0f, 0.0f};
  CHECK(kind_of([&] { d.validate(); }) == Error::Kind::InvalidSpec);
}

TEST_CASE("synthetic utterances are deterministic and obey the recipe") {
  SyntheticSpec spec;
  spec.validate();

  const auto u1 = gen_synthetic_utterance(spec, 1, 42);
  const auto u2 = gen_synthetic_utterance(spec, 1, 42);
  const auto u3 = gen_synthetic_utterance(spec, 1, 43);

  REQUIRE(u1.audio.size() == 32000);
  CHECK(u1.audio.samples == u2.audio.samples);
  CHECK(u1.audio.samples != u3.audio.samples);
  CHECK(u1.cue.begin == u2.cue.begin);

  // Cue length tracks cue_fraction of the utterance and sits in the voiced span.
  CHECK(u1.cue.length() == std::llround(0.4 * 32000.0));
  const int64_t lead = std::llround(0.12 * 16000.0);
  CHECK(u1.cue.begin >= lead);
  CHECK(u1.cue.end <= 32000 - lead);

  CHECK_NOTHROW(u1.saliency.validate());
  CHECK(u1.saliency.argmax() == 1);
  CHECK(u1.saliency[1] > 0.8f);

  validate_signal(u1.audio);
}

TEST_CASE("silence frames fall below a -40 dB energy gate, voiced frames above") {
  SyntheticSpec spec;
  const auto u = gen_synthetic_utterance(spec, 3, 7);
  const auto energy = frame_energy(u.audio, 320, 320);

  float peak = 0.0f;
  for (float e : energy) peak = std::max(peak, e);
  REQUIRE(peak > 0.0f);
  const float gate = peak * std::pow(10.0f, -40.0f / 20.0f);

  const int64_t lead = std::llround(0.12 * 16000.0);
  int voiced_above = 0, voiced_total = 0;
  for (std::size_t t = 0; t < energy.size(); ++t) {
    const int64_t start = static_cast<int64_t>(t) * 320;
    if (start + 320 <= lead || start >= 32000 - lead) {
      CHECK(energy[t] < gate);
    } else if (start >= lead && start + 320 <= 32000 - lead) {
      ++voiced_total;
      if (energy[t] >= gate) ++voiced_above;
    }
  }
  CHECK(voiced_total > 0);
  CHECK(voiced_above == voiced_total);
}

TEST_CASE("corpus generation writes a loadable manifest") {
  const fs::path dir = test_dir() / "corpus";
  fs::remove_all(dir);

  SyntheticSpec spec;
  spec.utterance_seconds = 0.8f;
  spec.cue_fraction = 0.3f;
  const std::string manifest = gen_corpus(spec, 2, dir.string(), 2024);
  CHECK(fs::exists(manifest));

  const auto entries = load_manifest(manifest);
  REQUIRE(entries.size() == 10);
  CHECK(entries[0].id == "neutral_0000");
  CHECK(entries[9].id == "fearful_0001");

  int per_class[kNumEmotions] = {0, 0, 0, 0, 0};
  for (const auto& e : entries) {
    e.saliency.validate();
    ++per_class[e.saliency.argmax()];
    const AudioBuffer wav = read_wav(e.path);
    CHECK(wav.size() == std::llround(0.8 * 16000.0));
    CHECK(e.cue_end - e.cue_start == std::llround(0.3 * 0.8 * 16000.0));
    CHECK(e.cue_start >= 0);
    CHECK(e.cue_end <= wav.size());
  }
  for (int c : per_class) CHECK(c == 2);

  // Same seed reproduces identical audio bytes.
  const fs::path dir2 = test_dir() / "corpus2";
  fs::remove_all(dir2);
  gen_corpus(spec, 2, dir2.string(), 2024);
  const auto a = read_wav((dir / "wav" / "sad_0001.wav").string());
  const auto b = read_wav((dir2 / "wav" / "sad_0001.wav").string());
  CHECK(a.samples == b.samples);

  CHECK(kind_of([&] { load_manifest((dir / "nope.csv").string()); }) == Error::Kind::IoError);
}

TEST_CASE("archetype separability check rejects near-duplicate classes") {
  SyntheticSpec spec;
  spec.archetypes[1] = spec.archetypes[0];
  CHECK(kind_of([&] { spec.validate(); }) == Error::Kind::InvalidSpec);
}
