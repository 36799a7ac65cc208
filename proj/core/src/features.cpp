#include "gaitdict/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <unsupported/Eigen/FFT>

#include "gaitdict/error.hpp"

namespace gaitdict {

namespace {

double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double population_std(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

std::array<double, kTimeFeatureCount> extract_time_features(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw InvalidInput("time features need a window of at least 2 samples");
  const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *min_it, hi = *max_it;
  const double nd = static_cast<double>(n);

  double mean = lo;
  if (hi > lo) {
    mean = 0.0;
    for (double v : x) mean += v;
    mean /= nd;
  }

  double m2 = 0.0, m3 = 0.0, m4 = 0.0, abs_dev = 0.0, energy = 0.0;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
    abs_dev += std::abs(d);
    energy += v * v;
  }
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  const bool flat = !(hi > lo) || m2 == 0.0;

  double abs_change = 0.0;
  for (std::size_t i = 1; i < n; ++i) abs_change += std::abs(x[i] - x[i - 1]);

  std::size_t crossings = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if ((x[i - 1] - mean >= 0.0) != (x[i] - mean >= 0.0)) ++crossings;
  }

  std::size_t peaks = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (x[i] > x[i - 1] && x[i] > x[i + 1]) ++peaks;
  }

  std::size_t below = 0, above = 0, run_below = 0, run_above = 0;
  for (double v : x) {
    run_below = v < mean ? run_below + 1 : 0;
    run_above = v > mean ? run_above + 1 : 0;
    below = std::max(below, run_below);
    above = std::max(above, run_above);
  }

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());

  std::array<double, kShapeBins> bins{};
  if (hi > lo) {
    const double width = hi - lo;
    for (double v : x) {
      auto b = static_cast<std::size_t>(std::floor((v - lo) / width * static_cast<double>(kShapeBins)));
      bins[std::min(b, kShapeBins - 1)] += 1.0;
    }
  } else {
    bins[0] = nd;
  }

  std::array<double, kTimeFeatureCount> f{};
  f[0] = mean;
  f[1] = std::sqrt(m2);
  f[2] = abs_change / static_cast<double>(n - 1);
  f[3] = abs_dev / nd;
  f[4] = flat ? 0.0 : m3 / std::pow(m2, 1.5);
  f[5] = flat ? 0.0 : m4 / (m2 * m2) - 3.0;
  f[6] = energy / nd;
  f[7] = static_cast<double>(crossings);
  f[8] = static_cast<double>(peaks);
  f[9] = quantile_sorted(sorted, 0.25);
  f[10] = quantile_sorted(sorted, 0.50);
  f[11] = quantile_sorted(sorted, 0.75);
  f[12] = static_cast<double>(below);
  f[13] = static_cast<double>(above);
  std::copy(bins.begin(), bins.end(), f.begin() + 14);
  return f;
}

std::array<double, kFreqFeatureCount> extract_freq_features(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) throw InvalidInput("frequency features need a window of at least 4 samples");
  // A flat window has no non-DC content; skip the FFT's rounding residue.
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) return {0.0, 0.0, 0.0, 0.0};
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> spectrum;
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, in);

  std::vector<double> amp(n / 2);
  for (std::size_t k = 1; k <= n / 2; ++k) amp[k - 1] = std::abs(spectrum[k]) / static_cast<double>(n);
  const double sd = population_std(amp);
  std::sort(amp.begin(), amp.end());
  return {quantile_sorted(amp, 0.25), quantile_sorted(amp, 0.50), quantile_sorted(amp, 0.75), sd};
}

std::array<double, kFeaturesPerChannel> extract_channel_features(std::span<const double> window) {
  std::array<double, kFeaturesPerChannel> out{};
  const auto t = extract_time_features(window);
  const auto f = extract_freq_features(window);
  std::copy(t.begin(), t.end(), out.begin());
  std::copy(f.begin(), f.end(), out.begin() + kTimeFeatureCount);
  return out;
}

const std::array<std::string, kFeaturesPerChannel>& channel_feature_names() {
  static const auto names = [] {
    std::array<std::string, kFeaturesPerChannel> n{
        "mean", "std", "mac", "mad", "skew", "kurt", "energy", "mcross", "npeaks", "q1", "q2", "q3", "strike_below",
        "strike_above"};
    for (std::size_t b = 0; b < kShapeBins; ++b) {
      n[14 + b] = (b < 10 ? "bin0" : "bin") + std::to_string(b);
    }
    n[30] = "fft_q1";
    n[31] = "fft_q2";
    n[32] = "fft_q3";
    n[33] = "fft_std";
    return n;
  }();
  return names;
}

std::vector<std::string> feature_names(std::span<const Sensor> sensors) {
  std::vector<std::string> names;
  names.reserve(sensors.size() * kFeaturesPerSensor);
  for (Sensor s : sensors) {
    for (Axis a : kAllAxes) {
      const std::string prefix = to_string(ChannelId{s, a}) + "_";
      for (const auto& f : channel_feature_names()) names.push_back(prefix + f);
    }
  }
  return names;
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::genuine: return "gen";
    case Label::impostor: return "imp";
    case Label::unlabeled: return "";
  }
  return "";
}

Label parse_label(std::string_view text) {
  if (text == "gen") return Label::genuine;
  if (text == "imp") return Label::impostor;
  if (text.empty()) return Label::unlabeled;
  throw DataError("unknown label '" + std::string(text) + "'");
}

FeatureMatrix::FeatureMatrix(std::vector<std::string> names) : names_(std::move(names)) {}

void FeatureMatrix::append(std::span<const double> values, Label label, Provenance provenance) {
  if (values.size() != cols()) {
    throw InvalidInput("feature row has " + std::to_string(values.size()) + " values, matrix has " +
                       std::to_string(cols()) + " columns");
  }
  if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidInput("feature row contains non-finite values");
  }
  data_.insert(data_.end(), values.begin(), values.end());
  labels_.push_back(label);
  provenance_.push_back(std::move(provenance));
}

void FeatureMatrix::append(const FeatureVector& vec) {
  if (vec.names != names_) throw InvalidInput("feature vector schema does not match matrix");
  append(vec.values, vec.label, vec.provenance);
}

void FeatureMatrix::append_rows(const FeatureMatrix& other) {
  if (other.names_ != names_) throw InvalidInput("cannot concatenate matrices with different schemas");
  data_.insert(data_.end(), other.data_.begin(), other.data_.end());
  labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
  provenance_.insert(provenance_.end(), other.provenance_.begin(), other.provenance_.end());
}

std::vector<double> FeatureMatrix::column(std::size_t j) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = at(i, j);
  return out;
}

void FeatureMatrix::set_all_labels(Label label) { std::fill(labels_.begin(), labels_.end(), label); }

std::size_t FeatureMatrix::count(Label label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> columns) const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (std::size_t c : columns) {
    if (c >= cols()) throw InvalidInput("column index " + std::to_string(c) + " out of range");
    names.push_back(names_[c]);
  }
  FeatureMatrix out(std::move(names));
  out.data_.reserve(rows() * columns.size());
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t c : columns) out.data_.push_back(at(i, c));
  }
  out.labels_ = labels_;
  out.provenance_ = provenance_;
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows_to_keep) const {
  FeatureMatrix out(names_);
  for (std::size_t r : rows_to_keep) {
    if (r >= rows()) throw InvalidInput("row index " + std::to_string(r) + " out of range");
    out.data_.insert(out.data_.end(), row(r).begin(), row(r).end());
    out.labels_.push_back(labels_[r]);
    out.provenance_.push_back(provenance_[r]);
  }
  return out;
}

FeatureVector featurize(const Frame& frame, std::span<const Sensor> sensors) {
  if (sensors.empty()) throw InvalidInput("featurize: empty sensor set");
  FeatureVector vec;
  vec.names = feature_names(sensors);
  vec.values.reserve(vec.names.size());
  for (Sensor s : sensors) {
    for (Axis a : kAllAxes) {
      auto it = frame.slices.find(ChannelId{s, a});
      if (it == frame.slices.end()) {
        throw InvalidInput("featurize: frame lacks channel " + to_string(ChannelId{s, a}));
      }
      const auto f = extract_channel_features(it->second);
      vec.values.insert(vec.values.end(), f.begin(), f.end());
    }
  }
  vec.provenance.window = static_cast<std::int64_t>(frame.index);
  return vec;
}

FeatureMatrix featurize_recording(const IMURecording& recording, std::span<const Sensor> sensors, double window,
                                  double slide) {
  FeatureMatrix out(feature_names(sensors));
  for (const Frame& frame : segment(recording, window, slide)) {
    auto vec = featurize(frame, sensors);
    vec.provenance.subject = recording.subject_id();
    vec.provenance.session = recording.session();
    out.append(vec.values, Label::unlabeled, std::move(vec.provenance));
  }
  return out;
}

double mutual_information(std::span<const double> column, std::span<const Label> labels) {
  const std::size_t n = column.size();
  if (n != labels.size()) throw InvalidInput("mutual_information: column and labels differ in length");
  std::size_t gen = 0, imp = 0;
  for (Label l : labels) {
    if (l == Label::genuine) ++gen;
    else if (l == Label::impostor) ++imp;
    else throw InvalidInput("mutual_information: unlabeled row");
  }
  if (gen == 0 || imp == 0) throw InvalidInput("mutual_information: both classes must be present");

  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  std::array<double, kMiBins - 1> cuts{};
  for (std::size_t j = 1; j < kMiBins; ++j) {
    const std::size_t rank = (j * n + kMiBins - 1) / kMiBins;  // ceil(j n / bins)
    cuts[j - 1] = sorted[std::max<std::size_t>(rank, 1) - 1];
  }

  std::array<std::array<double, 2>, kMiBins> joint{};
  for (std::size_t i = 0; i < n; ++i) {
    const auto bin = static_cast<std::size_t>(
        std::count_if(cuts.begin(), cuts.end(), [v = column[i]](double c) { return v > c; }));
    joint[bin][labels[i] == Label::genuine ? 0 : 1] += 1.0;
  }

  const double nd = static_cast<double>(n);
  const double py[2] = {static_cast<double>(gen) / nd, static_cast<double>(imp) / nd};
  double mi = 0.0;
  for (const auto& row : joint) {
    const double px = (row[0] + row[1]) / nd;
    for (int c = 0; c < 2; ++c) {
      if (row[c] == 0.0) continue;
      const double pxy = row[c] / nd;
      mi += pxy * std::log(pxy / (px * py[c]));
    }
  }
  return std::max(0.0, mi);
}

std::vector<std::size_t> select_top_k(const FeatureMatrix& matrix, std::span<const std::size_t> candidates,
                                      std::size_t k) {
  if (k > candidates.size()) {
    throw InvalidInput("select_top_k: k=" + std::to_string(k) + " exceeds " + std::to_string(candidates.size()) +
                       " candidate features");
  }
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(candidates.size());
  for (std::size_t c : candidates) scored.emplace_back(mutual_information(matrix.column(c), matrix.labels()), c);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = scored[i].second;
  return out;
}

std::vector<std::size_t> select_top_k(const FeatureMatrix& matrix, std::size_t k) {
  std::vector<std::size_t> all(matrix.cols());
  std::iota(all.begin(), all.end(), 0);
  return select_top_k(matrix, all, k);
}

std::vector<std::size_t> select_per_sensor(const FeatureMatrix& matrix, std::span<const Sensor> sensors,
                                           std::size_t k) {
  if (sensors.empty()) throw InvalidInput("select_per_sensor: empty sensor set");
  std::vector<std::size_t> out;
  for (Sensor s : sensors) {
    const std::string prefix = std::string(to_string(s)) + "_";
    std::vector<std::size_t> candidates;
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      if (matrix.names()[j].starts_with(prefix)) candidates.push_back(j);
    }
    if (candidates.empty()) throw InvalidInput("select_per_sensor: no columns for sensor " + prefix);
    const auto picked = select_top_k(matrix, candidates, k);
    out.insert(out.end(), picked.begin(), picked.end());
  }
  return out;
}

std::uint64_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  if (bins == 0) throw InvalidInput("histogram needs at least one bin");
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  edges.back() = hi;
  return edges;
}

Histogram histogram(std::span<const double> samples, std::size_t bins) {
  if (samples.empty()) throw InvalidInput("histogram of an empty sample");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  const auto edges = uniform_edges(*lo, *hi, bins);
  return histogram(samples, edges);
}

Histogram histogram(std::span<const double> samples, std::span<const double> edges) {
  if (edges.size() < 2) throw InvalidInput("histogram needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw InvalidInput("histogram edges must be strictly increasing");
  }
  Histogram h{{edges.begin(), edges.end()}, std::vector<std::uint64_t>(edges.size() - 1, 0)};
  for (double v : samples) {
    if (v < edges.front() || v > edges.back()) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t bin = static_cast<std::size_t>(it - edges.begin());
    bin = bin == 0 ? 0 : bin - 1;
    h.counts[std::min(bin, h.counts.size() - 1)] += 1;
  }
  return h;
}

double intersection(const Histogram& p, const Histogram& q) {
  if (p.edges != q.edges || p.counts.size() != q.counts.size()) {
    throw InvalidInput("intersection: histograms use different bin schemas");
  }
  const std::uint64_t mass = p.total();
  if (mass == 0) throw InvalidInput("intersection: reference histogram is empty");
  std::uint64_t overlap = 0;
  for (std::size_t i = 0; i < p.counts.size(); ++i) overlap += std::min(p.counts[i], q.counts[i]);
  return static_cast<double>(overlap) / static_cast<double>(mass);
}

}  // namespace gaitdict
