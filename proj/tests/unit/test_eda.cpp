#include <doctest.h>

#include <cmath>
#include <random>

#include "gaitdict/eda.hpp"
#include "gaitdict/error.hpp"
#include "gaitdict/synthgait.hpp"
#include "oracles.hpp"

using namespace gaitdict;

namespace {

IMURecording tone(double freq, double amp, double seconds, std::uint64_t seed) {
  const double rate = 46;
  const auto n = static_cast<std::size_t>(seconds * rate);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 0.05);
  std::map<ChannelId, SignalChannel> ch;
  for (Axis a : {Axis::x, Axis::y, Axis::z}) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = amp * std::sin(2 * std::numbers::pi * freq * static_cast<double>(i) / rate) + g(rng);
    ch.emplace(ChannelId{Sensor::la, a}, SignalChannel(v, rate));
  }
  return IMURecording("X", "1", ch);
}

EntryFeatures entry(const std::string& imitator, FactorSetting f, double value) {
  FeatureMatrix m({"la_x_std", "la_x_mean"});
  for (int w = 0; w < 3; ++w) {
    const std::array<double, 2> r{value + 0.01 * w, 1.0};
    m.append(r, Label::unlabeled, {imitator, "e", w});
  }
  return {EntryKey{imitator, f}, m};
}

}  // namespace

TEST_CASE("pearson") {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9}, z{4, 3, 2, 1}, c{1, 1, 1, 1};
  CHECK(*pearson(x, y) == doctest::Approx(1.0));
  CHECK(*pearson(x, z) == doctest::Approx(-1.0));
  CHECK_FALSE(pearson(x, c));
  CHECK_FALSE(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}));
  std::mt19937_64 rng(71);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(30), b(30);
    for (std::size_t i = 0; i < 30; ++i) {
      a[i] = g(rng);
      b[i] = 0.3 * a[i] + g(rng);
    }
    CHECK(std::fabs(*pearson(a, b) - oracle::pearson(a, b)) <= 1e-12);
  }
}

TEST_CASE("p-values") {
  CHECK(pearson_p_value(0.0, 10) == doctest::Approx(1.0));
  CHECK(pearson_p_value(1.0, 10) == 0.0);
  // r = 0.6319 at n = 10 is the two-sided 5% critical value.
  CHECK(pearson_p_value(0.6319, 10) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(pearson_p_value(-0.6319, 10) == doctest::Approx(pearson_p_value(0.6319, 10)));
}

TEST_CASE("factor sweeps") {
  std::vector<EntryKey> keys;
  for (double s : speed_grid()) keys.push_back({"I1", {s, 2, 2, 2}});
  keys.push_back({"I1", {2.2, 1, 2, 2}});
  keys.push_back({"I1", {2.2, 3, 2, 2}});
  keys.push_back({"I1", {2.2, 1, 3, 2}});
  keys.push_back({"I2", {2.0, 2, 2, 2}});
  std::sort(keys.begin(), keys.end());
  const auto speed = factor_sweep(keys, "I1", Factor::speed);
  CHECK(speed.size() == 9);
  for (std::size_t i = 1; i < speed.size(); ++i)
    CHECK(keys[speed[i]].factors.speed_mph > keys[speed[i - 1]].factors.speed_mph);
  const auto sl = factor_sweep(keys, "I1", Factor::step_length);
  REQUIRE(sl.size() == 3);
  CHECK(keys[sl[0]].factors.step_length == 1);
  CHECK(keys[sl[2]].factors.step_length == 3);
  CHECK(factor_sweep(keys, "I1", Factor::step_width).size() == 1);
  CHECK(factor_sweep(keys, "I3", Factor::speed).empty());
  CHECK(level_label(Factor::speed, 2.2) == "2.2");
  CHECK(level_label(Factor::step_width, 4) == "wider");
}

TEST_CASE("feature linear in the level gives r = 1") {
  std::vector<EntryFeatures> entries;
  for (double s : speed_grid()) entries.push_back(entry("I1", {s, 2, 2, 2}, 2.0 * s + 1));
  entries.push_back(entry("I1", {2.2, 1, 2, 2}, 7.4));
  entries.push_back(entry("I1", {2.2, 3, 2, 2}, 3.4));
  const auto cells = factor_feature_correlations(entries, "I1", {"la_x_std", "la_x_mean"});
  REQUIRE(cells.size() == 8);
  CHECK(cells[0].factor == Factor::speed);
  CHECK(cells[0].feature == "la_x_std");
  CHECK(cells[0].defined);
  CHECK(cells[0].n == 9);
  CHECK(cells[0].r == doctest::Approx(1.0));
  CHECK(cells[0].significant);
  CHECK_FALSE(cells[1].defined);
  CHECK(std::isnan(cells[1].r));
  CHECK(cells[2].factor == Factor::step_length);
  CHECK(cells[2].n == 3);
  CHECK(cells[2].r == doctest::Approx(-1.0));
  const auto csv = correlations_csv(cells);
  CHECK(csv.starts_with("imitator,factor,feature,n,r,p_value,significant,note\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  CHECK_THROWS(factor_feature_correlations(entries, "I1", {"nope"}));
}

TEST_CASE("overlap heatmap") {
  const auto a1 = tone(1.5, 1.0, 40, 1), a2 = tone(1.5, 1.0, 40, 2);
  const auto b = tone(1.5, 3.0, 40, 3);
  const auto single = tone(1.5, 1.0, 9, 4);
  const std::vector<LevelGroup> groups{{"low", {&a1, &a2}}, {"high", {&b}}, {"short", {&single}}};
  const auto grid = overlap_heatmap(groups);
  REQUIRE(grid.values.rows() == 3);
  CHECK(grid.windows == std::vector<std::size_t>{8, 4, 1});
  CHECK(grid.values.at(0, 0) > 0.6);
  CHECK(grid.values.at(1, 1) > 0.6);
  CHECK(grid.values.at(0, 1) < grid.values.at(0, 0));
  CHECK(grid.values.at(1, 0) < grid.values.at(1, 1));
  CHECK(std::isnan(grid.values.at(2, 2)));
  CHECK(std::isnan(grid.values.at(2, 0)));
  CHECK(grid.pairs[0] == 28);
  CHECK(grid.pairs[1] == 32);
  CHECK(grid.diagonal_mean() > grid.off_diagonal_mean());
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(grid.values.at(r, c) >= 0.0);
      CHECK(grid.values.at(r, c) <= 1.0);
    }

  const std::vector<LevelGroup> same{{"x", {&a1}}, {"y", {&a1}}};
  const auto s = overlap_heatmap(same);
  // Cross cells include each window against itself (intersection 1); the
  // diagonal only pairs distinct windows.
  const double L = static_cast<double>(s.windows[0]);
  CHECK(s.values.at(0, 1) == doctest::Approx(((L - 1) * s.values.at(0, 0) + 1) / L));
  CHECK(s.values.at(1, 0) == doctest::Approx(s.values.at(0, 1)));
}

TEST_CASE("dictionary overlap uses the factor sweep") {
  SynthConfig cfg;
  cfg.subjects = 2;
  cfg.imitator_settings = {9};
  cfg.planted_clones.clear();
  cfg.entry_duration_s = 24;
  const auto corpus = generate_synthetic(cfg);
  const auto grid = dictionary_overlap(corpus.dictionary, "I1", Factor::speed);
  CHECK(grid.values.rows() == 9);
  CHECK(grid.values.row_labels.front() == "1.4");
  CHECK(grid.values.row_labels.back() == "3.0");
  CHECK(grid.windows.front() == 2);
  CHECK(dictionary_overlap(corpus.dictionary, "I9", Factor::speed).values.rows() == 0);
}
