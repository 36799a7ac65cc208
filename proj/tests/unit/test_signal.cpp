#include <doctest.h>

#include <cmath>
#include <random>

#include "gaitdict/error.hpp"
#include "gaitdict/signal.hpp"

using namespace gaitdict;

namespace {

std::vector<double> values(const SignalChannel& c) { return {c.samples().begin(), c.samples().end()}; }

IMURecording recording_of(std::size_t n, double rate) {
  std::map<ChannelId, SignalChannel> ch;
  for (Axis a : {Axis::x, Axis::y, Axis::z}) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(0.1 * static_cast<double>(i) + static_cast<int>(a));
    ch.emplace(ChannelId{Sensor::la, a}, SignalChannel(v, rate));
  }
  return IMURecording("S01", "1", std::move(ch));
}

}  // namespace

TEST_CASE("smoothing width is ceil(0.05 rate)") {
  CHECK(smoothing_width(46) == 3);
  CHECK(smoothing_width(20) == 1);
  CHECK(smoothing_width(100) == 5);
  CHECK(smoothing_width(1) == 1);
  CHECK(smoothing_width(41) == 3);
  CHECK_THROWS_AS(smoothing_width(0), InvalidInput);
  CHECK_THROWS_AS(smoothing_width(-5), InvalidInput);
}

TEST_CASE("channel invariants") {
  CHECK_THROWS_AS(SignalChannel({}, 10.0), InvalidInput);
  CHECK_THROWS_AS(SignalChannel({1.0}, 0.0), InvalidInput);
  CHECK_THROWS_AS(SignalChannel({1.0, NAN}, 10.0), InvalidInput);
  CHECK_THROWS_AS(SignalChannel({1.0, INFINITY}, 10.0), InvalidInput);
}

TEST_CASE("moving average") {
  CHECK(values(smooth(SignalChannel({5, 5, 5, 5}, 10), 2)) == std::vector<double>{5, 5, 5});
  CHECK(values(smooth(SignalChannel({1, 2, 3, 4}, 10), 2)) == std::vector<double>{1.5, 2.5, 3.5});
  const SignalChannel c({0.3, -1.0, 7.5, 2.25}, 10);
  CHECK(smooth(c, 1) == c);
  CHECK(smooth(c, 4).size() == 1);
  CHECK_THROWS_AS(smooth(c, 5), InvalidInput);
  CHECK_THROWS_AS(smooth(c, 0), InvalidInput);
}

TEST_CASE("smoothing stays within the input range and keeps ramps linear") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(200);
    for (auto& v : x) v = g(rng);
    const auto s = 1 + static_cast<std::size_t>(trial % 9);
    const auto y = values(smooth(SignalChannel(x, 46), s));
    REQUIRE(y.size() == x.size() - s + 1);
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    for (double v : y) {
      CHECK(v >= lo - 1e-12);
      CHECK(v <= hi + 1e-12);
    }
  }
  std::vector<double> ramp(100);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.5 + 2.0 * static_cast<double>(i);
  const auto y = values(smooth(SignalChannel(ramp, 10), 4));
  // mean of x_i .. x_{i+3} on a ramp = x_i + 1.5 * slope
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::fabs(y[i] - (ramp[i] + 3.0)) < 1e-12);
}

TEST_CASE("magnitude") {
  const auto m = magnitude(SignalChannel({3, 0}, 1), SignalChannel({4, 0}, 1), SignalChannel({0, 0}, 1));
  CHECK(values(m) == std::vector<double>{5, 0});
  CHECK_THROWS_AS(magnitude(SignalChannel({1, 2}, 1), SignalChannel({1}, 1), SignalChannel({1, 2}, 1)), InvalidInput);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  std::vector<double> x(500), y(500), z(500), nx(500), ny(500), nz(500);
  for (std::size_t i = 0; i < 500; ++i) {
    x[i] = u(rng), y[i] = u(rng), z[i] = u(rng);
    nx[i] = -x[i], ny[i] = -y[i], nz[i] = -z[i];
  }
  const auto a = values(magnitude(SignalChannel(x, 1), SignalChannel(y, 1), SignalChannel(z, 1)));
  const auto b = values(magnitude(SignalChannel(nx, 1), SignalChannel(ny, 1), SignalChannel(nz, 1)));
  CHECK(a == b);
  for (std::size_t i = 0; i < 500; ++i) {
    CHECK(a[i] >= 0.0);
    CHECK(std::fabs(a[i] - std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i])) <= 1e-12 * a[i]);
  }
}

TEST_CASE("recording requires a shared rate and length") {
  std::map<ChannelId, SignalChannel> ch;
  ch.emplace(ChannelId{Sensor::la, Axis::x}, SignalChannel({1, 2, 3}, 10));
  ch.emplace(ChannelId{Sensor::la, Axis::y}, SignalChannel({1, 2, 3}, 20));
  CHECK_THROWS_AS(IMURecording("S", "1", ch), InvalidInput);
  std::map<ChannelId, SignalChannel> ch2;
  ch2.emplace(ChannelId{Sensor::la, Axis::x}, SignalChannel({1, 2, 3}, 10));
  ch2.emplace(ChannelId{Sensor::la, Axis::y}, SignalChannel({1, 2}, 10));
  CHECK_THROWS_AS(IMURecording("S", "1", ch2), InvalidInput);
}

TEST_CASE("preprocess derives magnitudes from raw axes, then smooths") {
  const auto rec = recording_of(50, 46);
  const auto pre = preprocess(rec);
  REQUIRE(pre.has_channel({Sensor::la, Axis::m}));
  CHECK(pre.length() == 48);
  const auto raw_m = magnitude(rec.channel({Sensor::la, Axis::x}), rec.channel({Sensor::la, Axis::y}),
                               rec.channel({Sensor::la, Axis::z}));
  const auto expect = smooth(raw_m, 3);
  CHECK(pre.channel({Sensor::la, Axis::m}) == expect);
}

TEST_CASE("segmentation frame counts") {
  CHECK(segment(recording_of(60 * 10, 10), 8, 4).size() == 14);
  CHECK(segment(recording_of(80, 10), 8, 4).size() == 1);
  CHECK(segment(recording_of(79, 10), 8, 4).empty());
  CHECK_THROWS_AS(segment(recording_of(80, 10), 0, 4), InvalidInput);
  CHECK_THROWS_AS(segment(recording_of(80, 10), 8, -1), InvalidInput);

  const auto frames = segment(recording_of(200, 10), 8, 4);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(frames[i].index == i);
    CHECK(frames[i].start == doctest::Approx(4.0 * static_cast<double>(i)));
    for (const auto& [id, slice] : frames[i].slices) CHECK(slice.size() == 80);
  }
}

TEST_CASE("frame count matches the closed form on random triples") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dur(0.5, 120), win(0.5, 20), sl(0.2, 10);
  std::uniform_real_distribution<double> rate(5, 120);
  for (int i = 0; i < 1000; ++i) {
    const double r = rate(rng), d = dur(rng), w = win(rng), s = sl(rng);
    const auto n = static_cast<std::size_t>(std::llround(d * r));
    const auto ws = seconds_to_samples(w, r), ss = seconds_to_samples(s, r);
    if (n == 0 || ws == 0 || ss == 0) continue;
    const std::size_t expected = n < ws ? 0 : (n - ws) / ss + 1;
    CHECK(frame_count(n, ws, ss) == expected);
  }
  // Whole-recording check at a handful of sizes.
  for (std::size_t n : {79u, 80u, 81u, 159u, 160u, 1234u}) {
    const auto rec = recording_of(n, 10);
    CHECK(segment(rec, 8, 4).size() == (n < 80 ? 0 : (n - 80) / 40 + 1));
  }
}
