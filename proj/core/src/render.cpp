#include "gaitdict/render.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gaitdict/error.hpp"

namespace gaitdict {

LabeledMatrix::LabeledMatrix(std::string corner_label, std::vector<std::string> rows, std::vector<std::string> cols)
    : corner(std::move(corner_label)), row_labels(std::move(rows)), col_labels(std::move(cols)) {
  values.assign(row_labels.size() * col_labels.size(), std::nan(""));
}

double LabeledMatrix::row_mean(std::size_t r) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < cols(); ++c) {
    const double v = at(r, c);
    if (std::isnan(v)) continue;
    sum += v;
    ++n;
  }
  return n ? sum / static_cast<double>(n) : std::nan("");
}

LabeledMatrix sort_rows_by_mean(const LabeledMatrix& m) {
  std::vector<std::size_t> order(m.rows());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> means(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    means[r] = m.row_mean(r);
    if (std::isnan(means[r])) means[r] = HUGE_VAL;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return means[a] < means[b]; });
  LabeledMatrix out(m.corner, {}, m.col_labels);
  out.values.clear();
  for (std::size_t r : order) {
    out.row_labels.push_back(m.row_labels[r]);
    for (std::size_t c = 0; c < m.cols(); ++c) out.values.push_back(m.at(r, c));
  }
  return out;
}

std::string format_fixed(double v, int decimals) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

namespace {

std::string render_csv(const LabeledMatrix& m, auto&& fmt) {
  std::string out = m.corner;
  for (const auto& c : m.col_labels) out += "," + c;
  out += '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += m.row_labels[r];
    for (std::size_t c = 0; c < m.cols(); ++c) out += "," + fmt(m.at(r, c));
    out += '\n';
  }
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string to_csv(const LabeledMatrix& m, int decimals) {
  return render_csv(m, [decimals](double v) { return format_fixed(v, decimals); });
}

LabeledMatrix from_csv(std::string_view text) {
  auto split = [](std::string_view line) {
    std::vector<std::string> out;
    for (std::size_t comma; (comma = line.find(',')) != std::string_view::npos; line.remove_prefix(comma + 1))
      out.emplace_back(line.substr(0, comma));
    out.emplace_back(line);
    return out;
  };
  std::vector<std::string_view> lines;
  for (std::size_t nl; (nl = text.find('\n')) != std::string_view::npos; text.remove_prefix(nl + 1)) {
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
  }
  if (!text.empty()) lines.push_back(text);
  if (lines.empty()) throw DataError("empty matrix CSV");
  auto header = split(lines[0]);
  LabeledMatrix m;
  m.corner = header[0];
  m.col_labels.assign(header.begin() + 1, header.end());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split(lines[i]);
    if (fields.size() != header.size())
      throw DataError("matrix CSV line " + std::to_string(i + 1) + ": expected " + std::to_string(header.size()) +
                      " fields");
    m.row_labels.push_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (fields[c] == "NA") {
        m.values.push_back(std::nan(""));
        continue;
      }
      double v = 0.0;
      const auto* b = fields[c].data();
      const auto* e = b + fields[c].size();
      const auto [end, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || end != e)
        throw DataError("matrix CSV line " + std::to_string(i + 1) + ": bad number '" + fields[c] + "'");
      m.values.push_back(v);
    }
  }
  return m;
}

std::string to_percent_csv(const LabeledMatrix& m) {
  return render_csv(m, [](double v) {
    if (std::isnan(v)) return std::string("NA");
    return std::to_string(static_cast<long long>(std::round(v * 100.0)));
  });
}

std::string to_svg(const LabeledMatrix& m, const std::string& title, double lo, double hi, int decimals) {
  constexpr int cell_w = 70, cell_h = 24, label_w = 150, header_h = 60;
  const int width = label_w + cell_w * static_cast<int>(m.cols()) + 10;
  const int height = header_h + cell_h * static_cast<int>(m.rows()) + 10;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<text x=\"4\" y=\"16\" font-size=\"13\">" << xml_escape(title) << "</text>\n";
  for (std::size_t c = 0; c < m.cols(); ++c) {
    svg << "<text x=\"" << label_w + cell_w * static_cast<int>(c) + cell_w / 2 << "\" y=\"" << header_h - 8
        << "\" text-anchor=\"middle\">" << xml_escape(m.col_labels[c]) << "</text>\n";
  }
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const int y = header_h + cell_h * static_cast<int>(r);
    svg << "<text x=\"4\" y=\"" << y + cell_h / 2 + 4 << "\">" << xml_escape(m.row_labels[r]) << "</text>\n";
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const int x = label_w + cell_w * static_cast<int>(c);
      const double v = m.at(r, c);
      std::string fill = "#cccccc";
      if (!std::isnan(v)) {
        const double t = std::clamp((v - lo) / span, 0.0, 1.0);
        const int gb = static_cast<int>(std::lround(255.0 * (1.0 - t)));
        char buf[32];
        std::snprintf(buf, sizeof buf, "rgb(255,%d,%d)", gb, gb);
        fill = buf;
      }
      svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\"" << cell_h
          << "\" fill=\"" << fill << "\" stroke=\"#ffffff\"/>\n";
      svg << "<text x=\"" << x + cell_w / 2 << "\" y=\"" << y + cell_h / 2 + 4 << "\" text-anchor=\"middle\">"
          << format_fixed(v, decimals) << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw DataError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gaitdict
