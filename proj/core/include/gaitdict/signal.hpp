#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gaitdict {

// Android virtual sensors, in canonical a, g, m, r order.
enum class Sensor { la, gy, ma, rv };
enum class Axis { x, y, z, m };

inline constexpr std::array<Sensor, 4> kAllSensors{Sensor::la, Sensor::gy, Sensor::ma, Sensor::rv};
inline constexpr std::array<Axis, 4> kAllAxes{Axis::x, Axis::y, Axis::z, Axis::m};

std::string_view to_string(Sensor s);
std::string_view to_string(Axis a);
// Single-letter tag used in combo names ("a+g+m+r").
char sensor_letter(Sensor s);
std::optional<Sensor> parse_sensor(std::string_view name);

struct ChannelId {
  Sensor sensor;
  Axis axis;
  auto operator<=>(const ChannelId&) const = default;
};

std::string to_string(ChannelId id);

// Uniformly sampled, finite, non-empty time series.
class SignalChannel {
 public:
  SignalChannel(std::vector<double> samples, double sampling_rate);

  std::span<const double> samples() const { return samples_; }
  double sampling_rate() const { return rate_; }
  std::size_t size() const { return samples_.size(); }
  double duration() const { return static_cast<double>(samples_.size()) / rate_; }

  bool operator==(const SignalChannel&) const = default;

 private:
  std::vector<double> samples_;
  double rate_;
};

// One subject-session (or one dictionary entry) of IMU data. All channels share
// the same rate and length.
class IMURecording {
 public:
  IMURecording(std::string subject_id, std::string session, std::map<ChannelId, SignalChannel> channels);

  const std::string& subject_id() const { return subject_id_; }
  const std::string& session() const { return session_; }
  const std::map<ChannelId, SignalChannel>& channels() const { return channels_; }
  const SignalChannel& channel(ChannelId id) const;
  bool has_channel(ChannelId id) const { return channels_.contains(id); }
  bool has_sensor(Sensor s) const;

  double sampling_rate() const { return channels_.begin()->second.sampling_rate(); }
  std::size_t length() const { return channels_.begin()->second.size(); }
  double duration() const { return channels_.begin()->second.duration(); }

 private:
  std::string subject_id_;
  std::string session_;
  std::map<ChannelId, SignalChannel> channels_;
};

// A fixed-length window over an IMURecording. Slices view the recording's
// storage, so a Frame must not outlive the recording it was cut from.
struct Frame {
  double start = 0.0;   // seconds
  double length = 0.0;  // seconds
  std::size_t index = 0;
  std::map<ChannelId, std::span<const double>> slices;
};

// ceil(0.05 * rate), at least 1.
std::size_t smoothing_width(double sampling_rate);

// Moving average over s consecutive samples; output has n - s + 1 samples.
SignalChannel smooth(const SignalChannel& channel, std::size_t s);

// Samplewise Euclidean norm of three aligned channels.
SignalChannel magnitude(const SignalChannel& x, const SignalChannel& y, const SignalChannel& z);

// Adds the m axis (norm of raw x, y, z) for every sensor that has all three.
IMURecording with_magnitudes(const IMURecording& recording);

// Smooths every channel with smoothing_width(rate).
IMURecording smoothed(const IMURecording& recording);

// Magnitudes first, then smoothing: the preprocessing applied before framing.
IMURecording preprocess(const IMURecording& recording);

inline constexpr double kDefaultWindowSeconds = 8.0;
inline constexpr double kDefaultSlideSeconds = 4.0;

// Window/slide converted to sample counts by rounding to nearest.
std::size_t seconds_to_samples(double seconds, double sampling_rate);

// Number of frames segment() would produce for n samples.
std::size_t frame_count(std::size_t n, std::size_t window_samples, std::size_t slide_samples);

// Sliding-window frames ordered by start time. A recording shorter than one
// window yields an empty list.
std::vector<Frame> segment(const IMURecording& recording, double window = kDefaultWindowSeconds,
                           double slide = kDefaultSlideSeconds);

}  // namespace gaitdict
