#pragma once

// Independent brute-force implementations used as test oracles. They follow
// the documented feature conventions but share no code with the library.

#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gaitdict/features.hpp"

namespace oracle {

// Linear-interpolation quantile (the "type 7" rule) on an unsorted copy.
inline double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double mean_of(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

inline double pop_std(const std::vector<double>& v) {
  const double m = mean_of(v);
  long double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(static_cast<double>(s / static_cast<long double>(v.size())));
}

inline std::array<double, 30> time_features(const std::vector<double>& x) {
  std::array<double, 30> f{};
  const std::size_t n = x.size();
  const double lo = *std::min_element(x.begin(), x.end());
  const double hi = *std::max_element(x.begin(), x.end());
  const bool flat = lo == hi;
  const double m = flat ? lo : mean_of(x);

  auto central = [&](int power) {
    long double s = 0;
    for (double v : x) s += std::pow(static_cast<long double>(v - m), power);
    return static_cast<double>(s / static_cast<long double>(n));
  };
  const double m2 = central(2), m3 = central(3), m4 = central(4);

  f[0] = m;
  f[1] = std::sqrt(m2);
  double mac = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) mac += std::fabs(x[i + 1] - x[i]);
  f[2] = mac / static_cast<double>(n - 1);
  double mad = 0;
  for (double v : x) mad += std::fabs(v - m);
  f[3] = mad / static_cast<double>(n);
  f[4] = flat ? 0.0 : m3 / (m2 * std::sqrt(m2));
  f[5] = flat ? 0.0 : m4 / (m2 * m2) - 3.0;
  double e = 0;
  for (double v : x) e += v * v;
  f[6] = e / static_cast<double>(n);

  auto positive = [&](double v) { return v - m >= 0.0; };
  int cross = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) cross += positive(x[i]) != positive(x[i + 1]);
  f[7] = cross;
  int peaks = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) peaks += x[i] > x[i - 1] && x[i] > x[i + 1];
  f[8] = peaks;
  f[9] = quantile(x, 0.25);
  f[10] = quantile(x, 0.5);
  f[11] = quantile(x, 0.75);

  auto longest = [&](auto pred) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < n;) {
      if (!pred(x[i])) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < n && pred(x[j])) ++j;
      best = std::max(best, j - i);
      i = j;
    }
    return static_cast<double>(best);
  };
  f[12] = longest([&](double v) { return v < m; });
  f[13] = longest([&](double v) { return v > m; });

  for (double v : x) {
    std::size_t b = 0;
    if (!flat) {
      const double w = (hi - lo) / 16.0;
      while (b < 15 && v >= lo + static_cast<double>(b + 1) * w) ++b;
    }
    f[14 + b] += 1.0;
  }
  return f;
}

// |X_k| / n for k = 1 .. n/2 by direct summation.
inline std::vector<double> dft_amplitudes(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> out;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    std::complex<long double> acc = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const long double angle = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k * t % n) /
                                static_cast<long double>(n);
      acc += std::complex<long double>(x[t] * std::cos(angle), x[t] * std::sin(angle));
    }
    out.push_back(static_cast<double>(std::abs(acc)) / static_cast<double>(n));
  }
  return out;
}

inline std::array<double, 4> freq_features(const std::vector<double>& x) {
  const auto a = dft_amplitudes(x);
  return {quantile(a, 0.25), quantile(a, 0.5), quantile(a, 0.75), pop_std(a)};
}

// Plug-in MI in nats with 10 equal-frequency bins: bin = number of cut points
// c_j = sorted[ceil(j n / 10) - 1] (j = 1..9) strictly below the value.
inline double mutual_information(const std::vector<double>& col, const std::vector<gaitdict::Label>& y) {
  const std::size_t n = col.size();
  auto sorted = col;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (std::size_t j = 1; j < 10; ++j) {
    const auto idx = static_cast<std::size_t>(std::ceil(static_cast<double>(j * n) / 10.0)) - 1;
    cuts.push_back(sorted[idx]);
  }
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> px, py;
  for (std::size_t i = 0; i < n; ++i) {
    int b = 0;
    for (double c : cuts) b += col[i] > c;
    const int l = y[i] == gaitdict::Label::genuine;
    joint[{b, l}] += 1.0 / static_cast<double>(n);
    px[b] += 1.0 / static_cast<double>(n);
    py[l] += 1.0 / static_cast<double>(n);
  }
  double mi = 0;
  for (const auto& [k, p] : joint) mi += p * std::log(p / (px[k.first] * py[k.second]));
  return std::max(0.0, mi);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double cov = sxy - sx * sy / n;
  return cov / std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
}

// |a - b| relative to max(|b|, 1).
inline double rel_err(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1.0); }

inline std::vector<double> random_window(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> x(n);
  const double offset = u(rng), scale = std::exp(u(rng) / 2.0);
  for (auto& v : x) v = offset + scale * g(rng);
  return x;
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("gaitdict_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace oracle
