#include "gaitdict/signal.hpp"

#include <algorithm>
#include <cmath>

#include "gaitdict/error.hpp"

namespace gaitdict {

std::string_view to_string(Sensor s) {
  switch (s) {
    case Sensor::la: return "la";
    case Sensor::gy: return "gy";
    case Sensor::ma: return "ma";
    case Sensor::rv: return "rv";
  }
  return "?";
}

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
    case Axis::m: return "m";
  }
  return "?";
}

char sensor_letter(Sensor s) {
  switch (s) {
    case Sensor::la: return 'a';
    case Sensor::gy: return 'g';
    case Sensor::ma: return 'm';
    case Sensor::rv: return 'r';
  }
  return '?';
}

std::optional<Sensor> parse_sensor(std::string_view name) {
  for (Sensor s : kAllSensors) {
    if (name == to_string(s) || (name.size() == 1 && name[0] == sensor_letter(s))) return s;
  }
  return std::nullopt;
}

std::string to_string(ChannelId id) {
  return std::string(to_string(id.sensor)) + "_" + std::string(to_string(id.axis));
}

SignalChannel::SignalChannel(std::vector<double> samples, double sampling_rate)
    : samples_(std::move(samples)), rate_(sampling_rate) {
  if (samples_.empty()) throw InvalidInput("signal channel must have at least one sample");
  if (!(rate_ > 0.0) || !std::isfinite(rate_)) throw InvalidInput("sampling rate must be positive");
  if (!std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidInput("signal channel contains non-finite samples");
  }
}

IMURecording::IMURecording(std::string subject_id, std::string session,
                           std::map<ChannelId, SignalChannel> channels)
    : subject_id_(std::move(subject_id)), session_(std::move(session)), channels_(std::move(channels)) {
  if (channels_.empty()) throw InvalidInput("recording " + subject_id_ + "/" + session_ + " has no channels");
  const auto& first = channels_.begin()->second;
  for (const auto& [id, ch] : channels_) {
    if (ch.sampling_rate() != first.sampling_rate()) {
      throw InvalidInput("recording " + subject_id_ + "/" + session_ + ": channel " + to_string(id) +
                         " has a different sampling rate");
    }
    if (ch.size() != first.size()) {
      throw InvalidInput("recording " + subject_id_ + "/" + session_ + ": channel " + to_string(id) +
                         " has a different length");
    }
  }
}

const SignalChannel& IMURecording::channel(ChannelId id) const {
  auto it = channels_.find(id);
  if (it == channels_.end()) {
    throw InvalidInput("recording " + subject_id_ + "/" + session_ + " lacks channel " + to_string(id));
  }
  return it->second;
}

bool IMURecording::has_sensor(Sensor s) const {
  return std::any_of(channels_.begin(), channels_.end(), [s](const auto& kv) { return kv.first.sensor == s; });
}

std::size_t smoothing_width(double sampling_rate) {
  if (!(sampling_rate > 0.0) || !std::isfinite(sampling_rate)) {
    throw InvalidInput("smoothing_width: sampling rate must be positive");
  }
  // 0.05 has no exact binary form; drop representation error so that integral
  // products (rate 20 -> 1.0) are not pushed up by one.
  const double raw = 0.05 * sampling_rate;
  const double s = std::ceil(raw - 1e-9 * std::max(1.0, raw));
  return std::max<std::size_t>(1, static_cast<std::size_t>(s));
}

SignalChannel smooth(const SignalChannel& channel, std::size_t s) {
  const auto x = channel.samples();
  const std::size_t n = x.size();
  if (s == 0) throw InvalidInput("smooth: window must be at least 1");
  if (s > n) throw InvalidInput("smooth: window " + std::to_string(s) + " exceeds channel length " + std::to_string(n));
  if (s == 1) return channel;
  std::vector<double> out(n - s + 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < s; ++j) acc += x[i + j];
    out[i] = acc / static_cast<double>(s);
  }
  return SignalChannel(std::move(out), channel.sampling_rate());
}

SignalChannel magnitude(const SignalChannel& x, const SignalChannel& y, const SignalChannel& z) {
  if (x.size() != y.size() || x.size() != z.size()) throw InvalidInput("magnitude: axis lengths differ");
  std::vector<double> out(x.size());
  const auto xs = x.samples(), ys = y.samples(), zs = z.samples();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(xs[i] * xs[i] + ys[i] * ys[i] + zs[i] * zs[i]);
  return SignalChannel(std::move(out), x.sampling_rate());
}

IMURecording with_magnitudes(const IMURecording& recording) {
  auto channels = recording.channels();
  for (Sensor s : kAllSensors) {
    const ChannelId cx{s, Axis::x}, cy{s, Axis::y}, cz{s, Axis::z};
    if (recording.has_channel(cx) && recording.has_channel(cy) && recording.has_channel(cz)) {
      channels.insert_or_assign(ChannelId{s, Axis::m},
                                magnitude(recording.channel(cx), recording.channel(cy), recording.channel(cz)));
    }
  }
  return IMURecording(recording.subject_id(), recording.session(), std::move(channels));
}

IMURecording smoothed(const IMURecording& recording) {
  const std::size_t s = std::min(smoothing_width(recording.sampling_rate()), recording.length());
  std::map<ChannelId, SignalChannel> channels;
  for (const auto& [id, ch] : recording.channels()) channels.emplace(id, smooth(ch, s));
  return IMURecording(recording.subject_id(), recording.session(), std::move(channels));
}

IMURecording preprocess(const IMURecording& recording) { return smoothed(with_magnitudes(recording)); }

std::size_t seconds_to_samples(double seconds, double sampling_rate) {
  if (!(seconds > 0.0)) throw InvalidInput("window and slide must be positive");
  const double v = std::round(seconds * sampling_rate);
  return std::max<std::size_t>(1, static_cast<std::size_t>(v));
}

std::size_t frame_count(std::size_t n, std::size_t window_samples, std::size_t slide_samples) {
  if (window_samples == 0 || slide_samples == 0) throw InvalidInput("window and slide must be positive");
  if (n < window_samples) return 0;
  return (n - window_samples) / slide_samples + 1;
}

std::vector<Frame> segment(const IMURecording& recording, double window, double slide) {
  if (!(window > 0.0) || !(slide > 0.0)) throw InvalidInput("segment: window and slide must be positive");
  const double rate = recording.sampling_rate();
  const std::size_t w = seconds_to_samples(window, rate);
  const std::size_t step = seconds_to_samples(slide, rate);
  const std::size_t count = frame_count(recording.length(), w, step);
  std::vector<Frame> frames;
  frames.reserve(count);
  for (std::size_t f = 0; f < count; ++f) {
    Frame frame;
    frame.index = f;
    frame.start = static_cast<double>(f * step) / rate;
    frame.length = static_cast<double>(w) / rate;
    for (const auto& [id, ch] : recording.channels()) frame.slices.emplace(id, ch.samples().subspan(f * step, w));
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace gaitdict
