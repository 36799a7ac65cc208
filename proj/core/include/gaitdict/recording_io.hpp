#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gaitdict/signal.hpp"

namespace gaitdict {

// Columns of one `t,x,y,z` sensor file.
struct SensorSeries {
  std::vector<double> t, x, y, z;
};

SensorSeries read_sensor_csv(const std::filesystem::path& path);
void write_sensor_csv(const std::filesystem::path& path, const SensorSeries& series);

// Loads whichever of la.csv, gy.csv, ma.csv, rv.csv exist in `dir`. Sensors
// are aligned to a common start, and if any stream is irregular (or the
// streams disagree on rate) all are linearly resampled to the median rate.
IMURecording load_recording(const std::filesystem::path& dir, const std::string& subject_id,
                            const std::string& session);
IMURecording load_recording(const std::map<Sensor, std::filesystem::path>& files, const std::string& subject_id,
                            const std::string& session);

// Writes the raw x/y/z axes of every sensor present as `<sensor>.csv` with
// t = k / rate. Magnitude channels are derived data and are not written.
void write_recording(const std::filesystem::path& dir, const IMURecording& recording);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace gaitdict
