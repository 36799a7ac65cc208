#include <benchmark/benchmark.h>

#include <random>

#include "gaitdict/authbench.hpp"
#include "gaitdict/features.hpp"
#include "gaitdict/synthgait.hpp"

using namespace gaitdict;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

SessionStore store(std::size_t subjects, std::size_t rows) {
  const auto names = feature_names(kAllSensors);
  SessionStore s;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < subjects; ++i) {
    FeatureMatrix m(names);
    std::vector<double> row(names.size());
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = g(rng) + ((j + i) % 9 == 0 ? 2.0 : 0.0);
      m.append(row, Label::unlabeled, {"S" + std::to_string(i), "1", static_cast<std::int64_t>(r)});
    }
    s.emplace("S" + std::to_string(i), std::move(m));
  }
  return s;
}

}  // namespace

// One 8 s window at 46 Hz.
static void BM_ChannelFeatures(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(extract_channel_features(x));
}
BENCHMARK(BM_ChannelFeatures)->Arg(368)->Arg(1024);

static void BM_FeaturizeRecording(benchmark::State& state) {
  const auto p = make_subject_profile(5);
  const auto rec = preprocess(generate_recording(p, p.natural, 93, 46, 1));
  for (auto _ : state) benchmark::DoNotOptimize(featurize_recording(rec, kAllSensors));
}
BENCHMARK(BM_FeaturizeRecording)->Unit(benchmark::kMillisecond);

static void BM_SelectPerSensor(benchmark::State& state) {
  const auto s = store(10, 22);
  const auto rows = draw_training_rows("S0", s, 5, 1);
  for (auto _ : state) benchmark::DoNotOptimize(select_per_sensor(rows, kAllSensors, 30));
}
BENCHMARK(BM_SelectPerSensor)->Unit(benchmark::kMillisecond);

static void BM_TrainUserModel(benchmark::State& state) {
  const auto s = store(10, 22);
  const auto kind = static_cast<ClassifierKind>(state.range(0));
  state.SetLabel(std::string(to_string(kind)));
  const auto combo = SensorCombo::parse("a+g+m+r");
  for (auto _ : state)
    benchmark::DoNotOptimize(train_user_model("S0", combo, ClassifierSpec::defaults(kind, 1), s));
}
BENCHMARK(BM_TrainUserModel)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
