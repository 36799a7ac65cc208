#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaitdict/dictattack.hpp"
#include "gaitdict/render.hpp"

namespace gaitdict {

// Pearson r of two equal-length samples; nullopt when either side is
// constant or fewer than 3 points are given.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
// Two-sided p-value of r under H0: rho = 0, via t = r sqrt((n-2)/(1-r^2)) on n-2 dof.
double pearson_p_value(double r, std::size_t n);

// Label of a factor level: "2.2" for speed, level name otherwise.
std::string level_label(Factor f, double level);

// Entries of one imitator that vary only `f`: for speed, all entries with
// normal ordinal levels; for an ordinal factor, entries with the other two
// ordinals normal at the speed that covers the most levels of `f` (lowest
// speed on ties). Indices into `keys`, sorted by level of `f`.
std::vector<std::size_t> factor_sweep(std::span<const EntryKey> keys, const std::string& imitator, Factor f);

struct CorrelationCell {
  std::string imitator;
  Factor factor = Factor::speed;
  std::string feature;
  std::size_t n = 0;        // entries (points) used
  bool defined = false;     // false: fewer than 3 levels or a constant side
  double r = 0.0;           // NaN when undefined
  double p_value = 1.0;     // NaN when undefined
  bool significant = false;
  std::string note;
};

inline constexpr double kDefaultAlpha = 0.05;

// One cell per (factor, feature), factors in canonical order. Levels are speed
// in mph or ordinal rank 1..4; y is the feature's mean over the entry's windows.
std::vector<CorrelationCell> factor_feature_correlations(std::span<const EntryFeatures> entries,
                                                         const std::string& imitator,
                                                         const std::vector<std::string>& features,
                                                         double alpha = kDefaultAlpha);

// imitator,factor,feature,n,r,p_value,significant,note
std::string correlations_csv(std::span<const CorrelationCell> cells);

struct LevelGroup {
  std::string label;
  std::vector<const IMURecording*> recordings;
};

struct OverlapGrid {
  LabeledMatrix values;             // rows = reference level, cols = compared level
  std::vector<std::size_t> pairs;   // window pairs averaged per cell, row-major
  std::vector<std::size_t> windows; // disjoint windows per level
  double window_s = 8.0;
  std::size_t bins = 80;

  double diagonal_mean() const;      // NaN when no diagonal cell is present
  double off_diagonal_mean() const;
};

inline constexpr std::size_t kDefaultOverlapBins = 80;
inline constexpr ChannelId kDefaultOverlapChannel{Sensor::la, Axis::x};

// Recordings are preprocessed (magnitudes, smoothing) and cut into
// non-overlapping windows. Cell (i, j) is the mean intersection of a level-i
// window histogram (P) against a level-j window histogram (Q), both binned on
// edges spanning level i's pooled range. Diagonal cells average over unordered
// pairs of distinct windows. Levels with fewer than 2 windows give NaN cells.
OverlapGrid overlap_heatmap(std::span<const LevelGroup> groups, ChannelId channel = kDefaultOverlapChannel,
                            double window_s = kDefaultWindowSeconds, std::size_t bins = kDefaultOverlapBins);

// overlap_heatmap over the factor_sweep() entries of one imitator, one level per entry.
OverlapGrid dictionary_overlap(const Dictionary& dictionary, const std::string& imitator, Factor f,
                               ChannelId channel = kDefaultOverlapChannel, double window_s = kDefaultWindowSeconds,
                               std::size_t bins = kDefaultOverlapBins);

}  // namespace gaitdict
