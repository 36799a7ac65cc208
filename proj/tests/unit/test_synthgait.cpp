#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gaitdict/error.hpp"
#include "gaitdict/recording_io.hpp"
#include "gaitdict/render.hpp"
#include "gaitdict/synthgait.hpp"
#include "oracles.hpp"

using namespace gaitdict;

namespace {

// Frequency (Hz) of the largest non-DC DFT bin.
double peak_hz(std::span<const double> x, double rate) {
  const auto a = oracle::dft_amplitudes({x.begin(), x.end()});
  const auto k = std::max_element(a.begin(), a.end()) - a.begin() + 1;
  return static_cast<double>(k) * rate / static_cast<double>(x.size());
}

SubjectProfile clean_profile(std::uint64_t seed) {
  auto p = make_subject_profile(seed, "S");
  for (auto& n : p.noise) n = 0;
  p.cadence_jitter = 0;
  p.amplitude_jitter = 0;
  p.session_drift = 0;
  for (auto& ch : p.amplitude)
    for (std::size_t h = 1; h < kHarmonics; ++h) ch[h] = 0;
  return p;
}

SynthConfig tiny() {
  SynthConfig c;
  c.subjects = 3;
  c.imitator_settings = {3, 2};
  c.planted_clones = {{0, 1}};
  c.session_duration_s = 20;
  c.entry_duration_s = 12;
  return c;
}

}  // namespace

TEST_CASE("profiles are a pure function of the seed") {
  CHECK(make_subject_profile(5, "A") == make_subject_profile(5, "A"));
  CHECK_FALSE(make_subject_profile(5, "A") == make_subject_profile(6, "A"));
}

TEST_CASE("sensitivity signs are balanced across subjects") {
  std::size_t positive = 0, total = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto p = make_subject_profile(1000 + s);
    for (const auto& row : p.sensitivity)
      for (double v : row) {
        CHECK(std::fabs(v) <= 1.0);
        positive += v > 0;
        ++total;
      }
  }
  const double share = static_cast<double>(positive) / static_cast<double>(total);
  CHECK(share >= 0.4);
  CHECK(share <= 0.6);
}

TEST_CASE("clone keeps everything but amplitudes") {
  const auto t = make_subject_profile(3, "S01");
  const auto c = make_clone_profile(t, 4, "I1");
  CHECK(c.subject_id == "I1");
  CHECK(c.phase == t.phase);
  CHECK(c.offset == t.offset);
  CHECK(c.sensitivity == t.sensitivity);
  CHECK(c.cadence_gain == t.cadence_gain);
  CHECK(c.natural == t.natural);
  CHECK_FALSE(c.amplitude == t.amplitude);
  for (std::size_t i = 0; i < kSynthChannels; ++i)
    for (std::size_t h = 0; h < kHarmonics; ++h)
      CHECK(std::fabs(c.amplitude[i][h] / t.amplitude[i][h] - 1.0) < 0.3);
}

TEST_CASE("a clean single-harmonic signal peaks at the cadence") {
  const auto p = clean_profile(21);
  const double rate = 46;
  for (double speed : {1.4, 2.2, 3.0}) {
    const FactorSetting f{speed, 2, 2, 2};
    const auto rec = generate_recording(p, f, 60, rate, 1);
    const auto x = rec.channel({Sensor::la, Axis::x}).samples();
    CHECK(std::fabs(peak_hz(x, rate) - cadence_hz(p, f)) <= rate / static_cast<double>(x.size()) + 1e-9);
  }
  // Cadence is proportional to speed at fixed step length.
  CHECK(cadence_hz(p, {2.8, 2, 2, 2}) == doctest::Approx(2 * cadence_hz(p, {1.4, 2, 2, 2})));
  CHECK(cadence_hz(p, {2.2, 3, 2, 2}) < cadence_hz(p, {2.2, 2, 2, 2}));
}

TEST_CASE("recording shape and determinism") {
  const auto p = make_subject_profile(8);
  const auto a = generate_recording(p, p.natural, 10, 46, 99);
  const auto b = generate_recording(p, p.natural, 10, 46, 99);
  CHECK(a.length() == 460);
  CHECK(a.channels().size() == 12);
  for (const auto& [id, ch] : a.channels()) CHECK(ch == b.channel(id));
  const auto c = generate_recording(p, p.natural, 10, 46, 100);
  CHECK_FALSE(c.channel({Sensor::gy, Axis::y}) == a.channel({Sensor::gy, Axis::y}));
  CHECK(coded_level(Factor::speed, {3.0, 2, 2, 2}) == doctest::Approx(1.0));
  CHECK(coded_level(Factor::step_width, {2.2, 2, 4, 2}) == doctest::Approx(1.0));
}

TEST_CASE("in-memory corpus layout") {
  auto cfg = SynthConfig::desk_scale();
  cfg.session_duration_s = 10;
  cfg.entry_duration_s = 10;
  const auto corpus = generate_synthetic(cfg, 4);
  CHECK(corpus.subjects.size() == 10);
  CHECK(corpus.genuine.size() == 20);
  CHECK(corpus.genuine[3].subject_id() == corpus.subjects[1].subject_id);
  CHECK(corpus.genuine[3].session() == "2");
  CHECK(corpus.imitators.size() == 5);
  CHECK(corpus.dictionary.size() == 80);
  CHECK(corpus.dictionary.imitators().size() == 5);
  REQUIRE(corpus.clone_of.size() == 5);
  CHECK(corpus.clone_of[1] == 3u);
  CHECK_FALSE(corpus.clone_of[4]);
  CHECK(corpus.imitators[1].phase == corpus.subjects[3].phase);
}

TEST_CASE("zero imitators and configuration errors") {
  auto cfg = tiny();
  cfg.imitator_settings.clear();
  cfg.planted_clones.clear();
  const auto corpus = generate_synthetic(cfg);
  CHECK(corpus.dictionary.empty());
  CHECK(corpus.genuine.size() == 6);

  auto bad = tiny();
  bad.subjects = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tiny();
  bad.planted_clones = {{5, 0}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tiny();
  bad.imitator_settings = {28};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tiny();
  bad.sampling_rate = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("full-scale preset") {
  const auto cfg = SynthConfig::full_scale();
  CHECK(cfg.subjects == 55);
  CHECK(cfg.planted_clones.empty());
  CHECK_NOTHROW(cfg.validate());
  CHECK(subject_name(cfg, 0) == "S01");
  CHECK(subject_name(cfg, 54) == "S55");
  CHECK(imitator_name(0) == "I1");
}

TEST_CASE("on-disk corpus is byte-identical across runs and job counts") {
  oracle::TempDir a("synth_a"), b("synth_b");
  const auto cfg = tiny();
  const auto pa = generate_corpus(cfg, a.path, 1);
  generate_corpus(cfg, b.path, 3);
  CHECK(pa == a.path / "corpus.json");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a.path)) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), a.path);
    REQUIRE(std::filesystem::exists(b.path / rel));
    CHECK(read_text(e.path()) == read_text(b.path / rel));
    ++files;
  }
  // 3 subjects x 2 sessions x 4 sensors + 5 entries x 4 sensors + manifest + corpus.json
  CHECK(files == 24 + 20 + 2);
  const auto dict = build_dictionary(a.path / "dictionary" / "manifest.json");
  CHECK(dict.size() == 5);
  const auto rec = load_recording(a.path / "genuine" / "S01" / "session2", "S01", "2");
  CHECK(rec.channels().size() == 12);
  CHECK(rec.sampling_rate() == doctest::Approx(46.0));
}
