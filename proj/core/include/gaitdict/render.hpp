#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gaitdict {

// Row/column-labelled grid of reals. NaN marks a missing cell.
struct LabeledMatrix {
  std::string corner;  // header of the row-label column
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<double> values;  // row-major

  LabeledMatrix() = default;
  LabeledMatrix(std::string corner, std::vector<std::string> rows, std::vector<std::string> cols);

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return col_labels.size(); }
  double& at(std::size_t r, std::size_t c) { return values.at(r * cols() + c); }
  double at(std::size_t r, std::size_t c) const { return values.at(r * cols() + c); }
  double row_mean(std::size_t r) const;  // over non-missing cells
};

// Rows reordered by ascending row mean; equal means keep their input order.
LabeledMatrix sort_rows_by_mean(const LabeledMatrix& m);

// Header line plus one line per row, values with `decimals` places, "NA" for
// missing cells.
std::string to_csv(const LabeledMatrix& m, int decimals = 4);

// Parses to_csv() output ("NA" reads back as missing).
LabeledMatrix from_csv(std::string_view text);
// Same grid as whole percentages (value * 100 rounded half away from zero).
std::string to_percent_csv(const LabeledMatrix& m);

// Heatmap. Color ramp: value v is clamped to [lo, hi], t = (v - lo)/(hi - lo),
// fill = rgb(255, round(255 (1 - t)), round(255 (1 - t))) i.e. white -> red.
// Missing cells are drawn #cccccc. Each cell is annotated with its value.
std::string to_svg(const LabeledMatrix& m, const std::string& title, double lo = 0.0, double hi = 1.0,
                   int decimals = 2);

// Writes bytes exactly; throws DataError when the path is not writable.
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Fixed-point formatting without "-0.0000".
std::string format_fixed(double v, int decimals);

}  // namespace gaitdict
