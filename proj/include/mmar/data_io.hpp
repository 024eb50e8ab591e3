#pragma once

// Long-format CSV panels, header `t,row,col,value`, one record per entry.
// Row and column labels map to indices in order of first appearance; t runs
// contiguously from 1 to T and every (t, row, col) occurs exactly once.

#include <filesystem>
#include <string>
#include <vector>

#include "mmar/model.hpp"

namespace mmar {

struct DataFile {
  MatrixSeries series;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
};

DataFile parse_data(const std::string& text, const std::string& source = "<input>");
std::string format_data(const DataFile& data);
DataFile read_data(const std::filesystem::path& path);
void write_data(const std::filesystem::path& path, const DataFile& data);

// Default labels r1.., c1.. for a bare series.
DataFile with_default_labels(const MatrixSeries& series);

// `t,label` with one-based component labels.
std::string format_labels(const std::vector<int>& labels);
std::vector<int> parse_labels(const std::string& text);

// Centering and pooled-variance scaling. Every scalar series (i, j) is
// centered at its own mean; row i is then divided by the square root of the
// variance pooled over its n columns, so each row indicator has unit pooled
// variance. y = scale_i * x + mean_ij inverts it.
struct Transform {
  Matrix mean;   // m x n, zero when centering is off
  Vector scale;  // m, one when scaling is off
};

Transform fit_transform(const MatrixSeries& series, bool center, bool scale);
MatrixSeries apply_transform(const Transform& tr, const MatrixSeries& series);
MatrixSeries invert_transform(const Transform& tr, const MatrixSeries& series);
Matrix invert_transform(const Transform& tr, const Matrix& y);
bool is_identity(const Transform& tr);

}  // namespace mmar
