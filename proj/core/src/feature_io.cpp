#include <charconv>
#include <cmath>
#include <fstream>

#include "gaitdict/error.hpp"
#include "gaitdict/features.hpp"
#include "gaitdict/recording_io.hpp"

namespace gaitdict {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  for (std::size_t pos = 0;;) {
    const auto next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

constexpr std::array<std::string_view, 4> kTrailer{"label", "subject", "session", "window"};

}  // namespace

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& matrix) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  std::string buf;
  for (const auto& name : matrix.names()) {
    buf += name;
    buf += ',';
  }
  buf += "label,subject,session,window\n";
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (double v : matrix.row(i)) {
      buf += format_double(v);
      buf += ',';
    }
    const auto& p = matrix.provenance()[i];
    buf += to_string(matrix.labels()[i]);
    buf += ',' + p.subject + ',' + p.session + ',' + std::to_string(p.window) + '\n';
  }
  out << buf;
  if (!out) throw DataError("write failed for " + path.string());
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty feature file");
  const auto header = split(line, ',');
  if (header.size() < kTrailer.size()) throw DataError(path.string() + ": malformed header");
  const std::size_t cols = header.size() - kTrailer.size();
  for (std::size_t i = 0; i < kTrailer.size(); ++i) {
    if (header[cols + i] != kTrailer[i]) throw DataError(path.string() + ": missing provenance column " + std::string(kTrailer[i]));
  }
  FeatureMatrix matrix(std::vector<std::string>(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(cols)));
  std::vector<double> values(cols);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": wrong field count");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const auto f = fields[j];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), values[j]);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad value '" + std::string(f) + "'");
      }
    }
    Provenance p{std::string(fields[cols + 1]), std::string(fields[cols + 2]), 0};
    const auto w = fields[cols + 3];
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), p.window);
    if (ec != std::errc() || ptr != w.data() + w.size()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad window index");
    }
    matrix.append(values, parse_label(fields[cols]), std::move(p));
  }
  return matrix;
}

}  // namespace gaitdict
