#include "gaitdict/eda.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "gaitdict/error.hpp"

namespace gaitdict {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("pearson: samples differ in length");
  const std::size_t n = x.size();
  if (n < 3) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  // Relative floors so rounding residue of a constant input is not read as variation.
  auto negligible = [n](double ss, double mean) {
    return ss <= 1e-24 * static_cast<double>(n) * std::max(1.0, mean * mean);
  };
  if (negligible(sxx, mx) || negligible(syy, my)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson_p_value(double r, std::size_t n) {
  if (n < 3) throw InvalidInput("pearson p-value needs at least 3 points");
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = std::abs(r) * std::sqrt(df / (1.0 - r * r));
  boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
}

std::string level_label(Factor f, double level) {
  if (f == Factor::speed) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", level);
    return buf;
  }
  return std::string(level_name(f, static_cast<int>(level)));
}

std::vector<std::size_t> factor_sweep(std::span<const EntryKey> keys, const std::string& imitator, Factor f) {
  auto others_normal = [f](const FactorSetting& s) {
    for (Factor g : {Factor::step_length, Factor::step_width, Factor::thigh_lift}) {
      if (g != f && s.level(g) != kNormalLevel) return false;
    }
    return true;
  };
  // Candidate entries grouped by speed (a single group for the speed factor).
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i].imitator_id != imitator || !others_normal(keys[i].factors)) continue;
    groups[f == Factor::speed ? 0.0 : keys[i].factors.speed_mph].push_back(i);
  }
  std::vector<std::size_t> best;
  std::size_t best_levels = 0;
  for (const auto& [speed, members] : groups) {
    std::set<double> levels;
    for (auto i : members) levels.insert(keys[i].factors.level(f));
    if (levels.size() > best_levels) {
      best_levels = levels.size();
      best = members;
    }
  }
  std::stable_sort(best.begin(), best.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a].factors.level(f) < keys[b].factors.level(f); });
  return best;
}

std::vector<CorrelationCell> factor_feature_correlations(std::span<const EntryFeatures> entries,
                                                         const std::string& imitator,
                                                         const std::vector<std::string>& features, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must be in (0, 1)");
  std::vector<EntryKey> keys;
  for (const auto& e : entries) keys.push_back(e.key);

  std::vector<CorrelationCell> out;
  for (Factor f : kAllFactors) {
    const auto sweep = factor_sweep(keys, imitator, f);
    std::set<double> distinct;
    std::vector<double> x;
    for (auto i : sweep) {
      x.push_back(keys[i].factors.level(f));
      distinct.insert(x.back());
    }
    for (const auto& name : features) {
      CorrelationCell cell;
      cell.imitator = imitator;
      cell.factor = f;
      cell.feature = name;
      cell.n = sweep.size();
      cell.r = kNaN;
      cell.p_value = kNaN;
      if (distinct.size() < 3) {
        cell.note = "fewer than 3 levels";
        out.push_back(std::move(cell));
        continue;
      }
      std::vector<double> y;
      for (auto i : sweep) {
        const auto& m = entries[i].features;
        const auto& names = m.names();
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw InvalidInput("unknown feature " + name);
        if (m.rows() == 0) throw InvalidInput("entry " + keys[i].str() + " has no windows");
        const auto col = m.column(static_cast<std::size_t>(it - names.begin()));
        double s = 0.0;
        for (double v : col) s += v;
        y.push_back(s / static_cast<double>(col.size()));
      }
      if (const auto r = pearson(x, y)) {
        cell.defined = true;
        cell.r = *r;
        cell.p_value = pearson_p_value(*r, x.size());
        cell.significant = cell.p_value < alpha;
      } else {
        cell.note = "constant feature";
      }
      out.push_back(std::move(cell));
    }
  }
  return out;
}

std::string correlations_csv(std::span<const CorrelationCell> cells) {
  std::ostringstream os;
  os << "imitator,factor,feature,n,r,p_value,significant,note\n";
  for (const auto& c : cells) {
    os << c.imitator << ',' << to_string(c.factor) << ',' << c.feature << ',' << c.n << ','
       << (c.defined ? format_fixed(c.r, 6) : "NA") << ',' << (c.defined ? format_fixed(c.p_value, 6) : "NA") << ','
       << (c.significant ? 1 : 0) << ',' << c.note << '\n';
  }
  return os.str();
}

double OverlapGrid::diagonal_mean() const {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < values.rows(); ++i) {
    if (std::isnan(values.at(i, i))) continue;
    s += values.at(i, i);
    ++n;
  }
  return n ? s / static_cast<double>(n) : kNaN;
}

double OverlapGrid::off_diagonal_mean() const {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < values.rows(); ++i) {
    for (std::size_t j = 0; j < values.cols(); ++j) {
      if (i == j || std::isnan(values.at(i, j))) continue;
      s += values.at(i, j);
      ++n;
    }
  }
  return n ? s / static_cast<double>(n) : kNaN;
}

OverlapGrid overlap_heatmap(std::span<const LevelGroup> groups, ChannelId channel, double window_s,
                            std::size_t bins) {
  if (!(window_s > 0.0)) throw InvalidInput("overlap window must be positive");
  if (bins == 0) throw InvalidInput("overlap needs at least one bin");
  const std::size_t L = groups.size();

  // Disjoint windows of the smoothed channel, per level.
  std::vector<std::vector<std::vector<double>>> windows(L);
  for (std::size_t i = 0; i < L; ++i) {
    for (const IMURecording* rec : groups[i].recordings) {
      const auto pre = preprocess(*rec);
      if (!pre.has_channel(channel)) throw InvalidInput("recording lacks channel " + to_string(channel));
      const auto& ch = pre.channel(channel);
      const auto w = seconds_to_samples(window_s, ch.sampling_rate());
      if (w == 0) throw InvalidInput("overlap window shorter than one sample");
      const auto x = ch.samples();
      for (std::size_t start = 0; start + w <= x.size(); start += w)
        windows[i].emplace_back(x.begin() + static_cast<std::ptrdiff_t>(start),
                                x.begin() + static_cast<std::ptrdiff_t>(start + w));
    }
  }

  std::vector<std::string> labels;
  for (const auto& g : groups) labels.push_back(g.label);
  OverlapGrid grid;
  grid.values = LabeledMatrix("reference", labels, labels);
  grid.pairs.assign(L * L, 0);
  grid.window_s = window_s;
  grid.bins = bins;
  for (const auto& w : windows) grid.windows.push_back(w.size());

  for (std::size_t i = 0; i < L; ++i) {
    const bool row_ok = windows[i].size() >= 2;
    std::vector<double> edges;
    if (row_ok) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& w : windows[i]) {
        const auto [mn, mx] = std::minmax_element(w.begin(), w.end());
        lo = std::min(lo, *mn);
        hi = std::max(hi, *mx);
      }
      edges = uniform_edges(lo, hi, bins);
    }
    for (std::size_t j = 0; j < L; ++j) {
      if (!row_ok || windows[j].size() < 2) {
        grid.values.at(i, j) = kNaN;
        continue;
      }
      std::vector<Histogram> q;
      for (const auto& w : windows[j]) q.push_back(histogram(w, edges));
      double sum = 0.0;
      std::size_t count = 0;
      if (i == j) {
        for (std::size_t a = 0; a < q.size(); ++a) {
          for (std::size_t b = a + 1; b < q.size(); ++b) {
            sum += intersection(q[a], q[b]);
            ++count;
          }
        }
      } else {
        for (const auto& w : windows[i]) {
          const auto p = histogram(w, edges);
          for (const auto& h : q) {
            sum += intersection(p, h);
            ++count;
          }
        }
      }
      grid.values.at(i, j) = sum / static_cast<double>(count);
      grid.pairs[i * L + j] = count;
    }
  }
  return grid;
}

OverlapGrid dictionary_overlap(const Dictionary& dictionary, const std::string& imitator, Factor f,
                               ChannelId channel, double window_s, std::size_t bins) {
  std::vector<EntryKey> keys;
  for (const auto& e : dictionary.entries()) keys.push_back(e.key);
  std::vector<LevelGroup> groups;
  for (auto i : factor_sweep(keys, imitator, f)) {
    groups.push_back(LevelGroup{level_label(f, keys[i].factors.level(f)), {&dictionary.entries()[i].recording}});
  }
  return overlap_heatmap(groups, channel, window_s, bins);
}

}  // namespace gaitdict
