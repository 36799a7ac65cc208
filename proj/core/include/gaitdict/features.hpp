#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaitdict/signal.hpp"

namespace gaitdict {

inline constexpr std::size_t kTimeFeatureCount = 30;
inline constexpr std::size_t kFreqFeatureCount = 4;
inline constexpr std::size_t kFeaturesPerChannel = kTimeFeatureCount + kFreqFeatureCount;  // 34
inline constexpr std::size_t kFeaturesPerSensor = kFeaturesPerChannel * kAllAxes.size();  // 136
inline constexpr std::size_t kShapeBins = 16;
inline constexpr std::size_t kDefaultTopK = 30;

// Time-domain features, in this order:
//   mean, std, mean abs change, mean abs deviation, skewness, excess kurtosis,
//   mean energy, mean crossings, peak count, q1, q2, q3,
//   longest strike below mean, longest strike above mean, 16 bin counts.
// Population moments; skewness and kurtosis are 0 for a constant window.
// Mean crossings count sign changes of (x - mean) with exact zeros taken as
// positive. Peaks are strict interior local maxima. Quantiles interpolate
// linearly between order statistics. Bins split [min, max] into 16 equal
// parts (all samples land in bin 0 when min == max).
std::array<double, kTimeFeatureCount> extract_time_features(std::span<const double> window);

// q1, q2, q3 and std of the one-sided DFT amplitude spectrum |X_k| / n for
// k = 1 .. n/2 (DC excluded, no taper).
std::array<double, kFreqFeatureCount> extract_freq_features(std::span<const double> window);

std::array<double, kFeaturesPerChannel> extract_channel_features(std::span<const double> window);

// Short names of the 34 per-channel features, aligned with
// extract_channel_features().
const std::array<std::string, kFeaturesPerChannel>& channel_feature_names();

// `<sensor>_<axis>_<feature>` for each sensor in the given order, axes x, y, z, m.
std::vector<std::string> feature_names(std::span<const Sensor> sensors);

enum class Label : std::uint8_t { unlabeled, genuine, impostor };
std::string_view to_string(Label label);
Label parse_label(std::string_view text);

struct Provenance {
  std::string subject;
  std::string session;  // "1", "2" or a dictionary entry key
  std::int64_t window = -1;  // -1 for synthetic (SMOTE) rows
  bool operator==(const Provenance&) const = default;
};

struct FeatureVector {
  std::vector<double> values;
  std::vector<std::string> names;
  Label label = Label::unlabeled;
  Provenance provenance;
};

// Rectangular, row-major feature table with a shared column schema.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::vector<std::string> names);

  void append(std::span<const double> values, Label label, Provenance provenance);
  void append(const FeatureVector& vec);
  void append_rows(const FeatureMatrix& other);

  std::size_t rows() const { return labels_.size(); }
  std::size_t cols() const { return names_.size(); }
  bool empty() const { return rows() == 0; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols(), cols()}; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols() + j]; }
  std::vector<double> column(std::size_t j) const;

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<Provenance>& provenance() const { return provenance_; }
  std::span<const double> data() const { return data_; }

  void set_label(std::size_t i, Label label) { labels_.at(i) = label; }
  void set_all_labels(Label label);
  std::size_t count(Label label) const;

  FeatureMatrix select_columns(std::span<const std::size_t> columns) const;
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> data_;
  std::vector<Label> labels_;
  std::vector<Provenance> provenance_;
};

// 136 values per requested sensor, sensor-major in the order given.
FeatureVector featurize(const Frame& frame, std::span<const Sensor> sensors);

// Preprocesses nothing: `recording` is expected to be preprocess()ed already.
// Rows are frames in start-time order, tagged with subject/session/frame index.
FeatureMatrix featurize_recording(const IMURecording& recording, std::span<const Sensor> sensors,
                                  double window = kDefaultWindowSeconds, double slide = kDefaultSlideSeconds);

inline constexpr std::size_t kMiBins = 10;

// Plug-in mutual information (nats) between a feature, discretized into 10
// equal-frequency bins, and the gen/imp label. Tied values share a bin.
double mutual_information(std::span<const double> column, std::span<const Label> labels);

// The k columns (from `candidates`) with highest MI, sorted by descending MI
// with ascending-index tie-break.
std::vector<std::size_t> select_top_k(const FeatureMatrix& matrix, std::span<const std::size_t> candidates,
                                      std::size_t k);
std::vector<std::size_t> select_top_k(const FeatureMatrix& matrix, std::size_t k);

// Top-k within each sensor's block of columns, concatenated in the order of
// `sensors`. Matrix columns must follow feature_names() naming.
std::vector<std::size_t> select_per_sensor(const FeatureMatrix& matrix, std::span<const Sensor> sensors,
                                           std::size_t k);

struct Histogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t total() const;
};

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

// Equal-width bins over the sample range.
Histogram histogram(std::span<const double> samples, std::size_t bins);

// Bins fixed by `edges`; samples outside [edges.front(), edges.back()] are dropped.
Histogram histogram(std::span<const double> samples, std::span<const double> edges);

// sum(min(P_i, Q_i)) / sum(P_i).
double intersection(const Histogram& p, const Histogram& q);

// CSV persistence: feature names, then label, subject, session, window.
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& matrix);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

}  // namespace gaitdict
