#include "gaitdict/recording_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "gaitdict/error.hpp"

namespace gaitdict {

namespace {

double parse_number(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": bad number '" + std::string(field) + "'");
  }
  return v;
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

std::vector<double> diffs(const std::vector<double>& t) {
  std::vector<double> d(t.size() - 1);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) d[i] = t[i + 1] - t[i];
  return d;
}

bool is_regular(const std::vector<double>& t, double dt) {
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (std::abs((t[i + 1] - t[i]) - dt) > 1e-6 * dt) return false;
  }
  return true;
}

// Rate estimated from the span; snapped to an integer when it is one up to
// text round-off.
double span_rate(const std::vector<double>& t) {
  const double rate = static_cast<double>(t.size() - 1) / (t.back() - t.front());
  const double nearest = std::round(rate);
  return std::abs(rate - nearest) < 1e-6 ? nearest : rate;
}

std::vector<double> interpolate(const std::vector<double>& t, const std::vector<double>& v, double t0, double rate,
                                std::size_t n) {
  std::vector<double> out(n);
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double tk = t0 + static_cast<double>(k) / rate;
    while (j + 2 < t.size() && t[j + 1] < tk) ++j;
    const double span = t[j + 1] - t[j];
    const double a = std::clamp((tk - t[j]) / span, 0.0, 1.0);
    out[k] = v[j] + a * (v[j + 1] - v[j]);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

SensorSeries read_sensor_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  if (line != "t,x,y,z") throw DataError(path.string() + ": expected header 't,x,y,z', got '" + line + "'");

  SensorSeries s;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    const std::string_view sv(line);
    for (std::size_t pos = 0;;) {
      const auto comma = sv.find(',', pos);
      fields.push_back(sv.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != 4) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 4 fields");
    }
    const double t = parse_number(fields[0], path, lineno);
    if (!s.t.empty() && !(t > s.t.back())) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": timestamps must be strictly increasing");
    }
    s.t.push_back(t);
    s.x.push_back(parse_number(fields[1], path, lineno));
    s.y.push_back(parse_number(fields[2], path, lineno));
    s.z.push_back(parse_number(fields[3], path, lineno));
  }
  if (s.t.size() < 2) throw DataError(path.string() + ": need at least two samples");
  return s;
}

void write_sensor_csv(const std::filesystem::path& path, const SensorSeries& series) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  std::string buf = "t,x,y,z\n";
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    buf += format_double(series.t[i]);
    buf += ',';
    buf += format_double(series.x[i]);
    buf += ',';
    buf += format_double(series.y[i]);
    buf += ',';
    buf += format_double(series.z[i]);
    buf += '\n';
  }
  out << buf;
  if (!out) throw DataError("write failed for " + path.string());
}

IMURecording load_recording(const std::filesystem::path& dir, const std::string& subject_id,
                            const std::string& session) {
  std::map<Sensor, std::filesystem::path> files;
  for (Sensor s : kAllSensors) {
    auto path = dir / (std::string(to_string(s)) + ".csv");
    if (std::filesystem::exists(path)) files.emplace(s, std::move(path));
  }
  if (files.empty()) throw DataError("no sensor files in " + dir.string());
  return load_recording(files, subject_id, session);
}

IMURecording load_recording(const std::map<Sensor, std::filesystem::path>& files, const std::string& subject_id,
                            const std::string& session) {
  if (files.empty()) throw DataError("no sensor files for " + subject_id + "/" + session);
  const std::string where = subject_id + "/" + session;
  std::vector<std::pair<Sensor, SensorSeries>> present;
  for (const auto& [sensor, path] : files) present.emplace_back(sensor, read_sensor_csv(path));

  std::vector<double> all_dt;
  bool uniform = true;
  for (const auto& [sensor, series] : present) {
    auto d = diffs(series.t);
    const double dt = median(d);
    uniform = uniform && is_regular(series.t, dt);
    all_dt.insert(all_dt.end(), d.begin(), d.end());
  }
  const double t0 = present.front().second.t.front();
  const double first_rate = span_rate(present.front().second.t);
  for (const auto& [sensor, series] : present) {
    uniform = uniform && series.t.front() == t0 && span_rate(series.t) == first_rate;
  }

  std::map<ChannelId, SignalChannel> channels;
  if (uniform) {
    std::size_t n = present.front().second.t.size();
    for (const auto& [sensor, series] : present) n = std::min(n, series.t.size());
    for (const auto& [sensor, series] : present) {
      auto cut = [n](const std::vector<double>& v) { return std::vector<double>(v.begin(), v.begin() + n); };
      channels.emplace(ChannelId{sensor, Axis::x}, SignalChannel(cut(series.x), first_rate));
      channels.emplace(ChannelId{sensor, Axis::y}, SignalChannel(cut(series.y), first_rate));
      channels.emplace(ChannelId{sensor, Axis::z}, SignalChannel(cut(series.z), first_rate));
    }
  } else {
    const double rate = 1.0 / median(all_dt);
    double start = -std::numeric_limits<double>::infinity();
    double end = std::numeric_limits<double>::infinity();
    for (const auto& [sensor, series] : present) {
      start = std::max(start, series.t.front());
      end = std::min(end, series.t.back());
    }
    if (!(end > start)) throw DataError("sensor streams of " + where + " do not overlap in time");
    const auto n = static_cast<std::size_t>(std::floor((end - start) * rate + 1e-9)) + 1;
    for (const auto& [sensor, series] : present) {
      channels.emplace(ChannelId{sensor, Axis::x}, SignalChannel(interpolate(series.t, series.x, start, rate, n), rate));
      channels.emplace(ChannelId{sensor, Axis::y}, SignalChannel(interpolate(series.t, series.y, start, rate, n), rate));
      channels.emplace(ChannelId{sensor, Axis::z}, SignalChannel(interpolate(series.t, series.z, start, rate, n), rate));
    }
  }
  return IMURecording(subject_id, session, std::move(channels));
}

void write_recording(const std::filesystem::path& dir, const IMURecording& recording) {
  std::filesystem::create_directories(dir);
  const double rate = recording.sampling_rate();
  for (Sensor s : kAllSensors) {
    const ChannelId cx{s, Axis::x}, cy{s, Axis::y}, cz{s, Axis::z};
    if (!recording.has_channel(cx) || !recording.has_channel(cy) || !recording.has_channel(cz)) continue;
    SensorSeries series;
    const auto x = recording.channel(cx).samples();
    series.t.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) series.t[k] = static_cast<double>(k) / rate;
    series.x.assign(x.begin(), x.end());
    const auto y = recording.channel(cy).samples();
    series.y.assign(y.begin(), y.end());
    const auto z = recording.channel(cz).samples();
    series.z.assign(z.begin(), z.end());
    write_sensor_csv(dir / (std::string(to_string(s)) + ".csv"), series);
  }
}

}  // namespace gaitdict
