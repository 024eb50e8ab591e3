#include "mmar/data_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "mmar/error.hpp"
#include "mmar/model_io.hpp"

namespace mmar {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

long parse_int(const std::string& s, const std::string& where) {
  long v = 0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw DataError(where + ": '" + s + "' is not an integer");
  return v;
}

double parse_real(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(v))
    throw DataError(where + ": '" + s + "' is not a finite number");
  return v;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Index label_index(std::vector<std::string>& labels, std::map<std::string, Index>& index, const std::string& l) {
  auto it = index.find(l);
  if (it != index.end()) return it->second;
  labels.push_back(l);
  return index[l] = static_cast<Index>(labels.size()) - 1;
}

}  // namespace

DataFile parse_data(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  bool header = false;
  struct Rec {
    long t;
    Index r, c;
    double v;
    long line;
  };
  std::vector<Rec> recs;
  DataFile out;
  std::map<std::string, Index> ri, ci;
  long t_max = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (!header) {
      if (f.size() != 4 || f[0] != "t" || f[1] != "row" || f[2] != "col" || f[3] != "value")
        throw DataError(where + ": expected header 't,row,col,value'");
      header = true;
      continue;
    }
    if (f.size() != 4) throw DataError(where + ": expected 4 fields, found " + std::to_string(f.size()));
    const long t = parse_int(f[0], where);
    if (t < 1) throw DataError(where + ": t must be >= 1");
    if (f[1].empty() || f[2].empty()) throw DataError(where + ": empty row or column label");
    recs.push_back({t, label_index(out.row_labels, ri, f[1]), label_index(out.col_labels, ci, f[2]),
                    parse_real(f[3], where), lineno});
    t_max = std::max(t_max, t);
  }
  if (!header) throw DataError(source + ": empty file (no header)");
  if (recs.empty()) throw DataError(source + ": no observations");
  const Index m = static_cast<Index>(out.row_labels.size());
  const Index n = static_cast<Index>(out.col_labels.size());
  Matrix stacked = Matrix::Constant(m * n, t_max, std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : recs) {
    double& cell = stacked(r.r + m * r.c, r.t - 1);
    if (!std::isnan(cell))
      throw DataError(source + ":" + std::to_string(r.line) + ": duplicate record for (t=" + std::to_string(r.t) +
                      ", " + out.row_labels[static_cast<std::size_t>(r.r)] + ", " +
                      out.col_labels[static_cast<std::size_t>(r.c)] + ")");
    cell = r.v;
  }
  if (static_cast<Index>(recs.size()) != m * n * t_max) {
    for (Index t = 0; t < t_max; ++t)
      for (Index c = 0; c < n; ++c)
        for (Index r = 0; r < m; ++r)
          if (std::isnan(stacked(r + m * c, t)))
            throw DataError(source + ": incomplete grid, missing (t=" + std::to_string(t + 1) + ", " +
                            out.row_labels[static_cast<std::size_t>(r)] + ", " +
                            out.col_labels[static_cast<std::size_t>(c)] + ")");
  }
  out.series = MatrixSeries(m, n, std::move(stacked));
  return out;
}

std::string format_data(const DataFile& d) {
  const Index m = d.series.rows();
  const Index n = d.series.cols();
  if (static_cast<Index>(d.row_labels.size()) != m || static_cast<Index>(d.col_labels.size()) != n)
    throw DimensionError("format_data: label counts do not match the series");
  std::string out = "t,row,col,value\n";
  for (Index t = 0; t < d.series.length(); ++t) {
    const auto y = d.series.at(t);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) {
        out += std::to_string(t + 1);
        out += ',';
        out += d.row_labels[static_cast<std::size_t>(i)];
        out += ',';
        out += d.col_labels[static_cast<std::size_t>(j)];
        out += ',';
        out += fmt17(y(i, j));
        out += '\n';
      }
  }
  return out;
}

DataFile read_data(const std::filesystem::path& path) { return parse_data(read_file(path), path.string()); }

void write_data(const std::filesystem::path& path, const DataFile& data) { write_file_atomic(path, format_data(data)); }

DataFile with_default_labels(const MatrixSeries& series) {
  DataFile d;
  d.series = series;
  for (Index i = 0; i < series.rows(); ++i) d.row_labels.push_back("r" + std::to_string(i + 1));
  for (Index j = 0; j < series.cols(); ++j) d.col_labels.push_back("c" + std::to_string(j + 1));
  return d;
}

std::string format_labels(const std::vector<int>& labels) {
  std::string out = "t,label\n";
  for (std::size_t t = 0; t < labels.size(); ++t) out += std::to_string(t + 1) + "," + std::to_string(labels[t]) + "\n";
  return out;
}

std::vector<int> parse_labels(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (trim(line) != "t,label") throw DataError("labels: expected header 't,label'");
  std::vector<int> out;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    const std::string where = "labels:" + std::to_string(lineno);
    if (f.size() != 2) throw DataError(where + ": expected 2 fields");
    if (parse_int(f[0], where) != static_cast<long>(out.size()) + 1) throw DataError(where + ": t out of sequence");
    out.push_back(static_cast<int>(parse_int(f[1], where)));
  }
  return out;
}

Transform fit_transform(const MatrixSeries& s, bool center, bool scale) {
  const Index m = s.rows();
  const Index n = s.cols();
  const Index T = s.length();
  Transform tr;
  tr.mean = Matrix::Zero(m, n);
  tr.scale = Vector::Ones(m);
  if (T < 2 && scale) throw DataError("scaling needs at least two observations");
  if (center) tr.mean = mat(s.stacked().rowwise().mean(), m, n);
  if (scale) {
    for (Index i = 0; i < m; ++i) {
      double ss = 0.0;
      for (Index t = 0; t < T; ++t) ss += (s.at(t).row(i) - tr.mean.row(i)).squaredNorm();
      const double var = ss / static_cast<double>(n * T);
      if (!(var > 0.0)) throw DataError("row " + std::to_string(i + 1) + " has zero pooled variance");
      tr.scale(i) = std::sqrt(var);
    }
  }
  return tr;
}

MatrixSeries apply_transform(const Transform& tr, const MatrixSeries& s) {
  std::vector<Matrix> obs;
  for (Index t = 0; t < s.length(); ++t) obs.push_back(tr.scale.cwiseInverse().asDiagonal() * (s.at(t) - tr.mean));
  return MatrixSeries(s.rows(), s.cols(), obs);
}

Matrix invert_transform(const Transform& tr, const Matrix& y) { return tr.scale.asDiagonal() * y + tr.mean; }

MatrixSeries invert_transform(const Transform& tr, const MatrixSeries& s) {
  std::vector<Matrix> obs;
  for (Index t = 0; t < s.length(); ++t) obs.push_back(invert_transform(tr, Matrix(s.at(t))));
  return MatrixSeries(s.rows(), s.cols(), obs);
}

bool is_identity(const Transform& tr) { return tr.mean.isZero(0.0) && (tr.scale.array() == 1.0).all(); }

}  // namespace mmar
