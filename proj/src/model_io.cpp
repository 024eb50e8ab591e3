#include "mmar/model_io.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include "mmar/error.hpp"

namespace mmar {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const json& j) {
  try {
    const auto r = j.at("rows").get<Index>();
    const auto c = j.at("cols").get<Index>();
    const auto& d = j.at("data");
    if (r < 1 || c < 1 || !d.is_array() || static_cast<Index>(d.size()) != r)
      throw DataError("model file: matrix data does not match its declared rows");
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
      const auto& row = d.at(static_cast<std::size_t>(i));
      if (!row.is_array() || static_cast<Index>(row.size()) != c)
        throw DataError("model file: matrix row " + std::to_string(i + 1) + " does not have " +
                        std::to_string(c) + " entries");
      for (Index k = 0; k < c; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: bad matrix: ") + e.what());
  }
}

json model_to_json(const MmarModel& model) {
  json comps = json::array();
  for (const auto& c : model.components) {
    json a = json::array();
    json b = json::array();
    for (const auto& x : c.A) a.push_back(matrix_to_json(x));
    for (const auto& x : c.B) b.push_back(matrix_to_json(x));
    comps.push_back(json{{"A", a}, {"B", b}, {"C", matrix_to_json(c.C)}, {"U", matrix_to_json(c.U)},
                         {"V", matrix_to_json(c.V)}});
  }
  return json{{"version", kModelFormat},
              {"spec", {{"m", model.spec.m}, {"n", model.spec.n}, {"orders", model.spec.orders}}},
              {"alphas", model.alphas},
              {"components", comps}};
}

MmarModel model_from_json(const json& j) {
  MmarModel model;
  try {
    if (j.value("version", std::string()) != kModelFormat)
      throw DataError(std::string("model file: version must be \"") + kModelFormat + "\"");
    const auto& s = j.at("spec");
    model.spec.m = s.at("m").get<Index>();
    model.spec.n = s.at("n").get<Index>();
    model.spec.orders = s.at("orders").get<std::vector<int>>();
    model.alphas = j.at("alphas").get<std::vector<double>>();
    for (const auto& c : j.at("components")) {
      MmarComponent comp;
      for (const auto& x : c.at("A")) comp.A.push_back(matrix_from_json(x));
      for (const auto& x : c.at("B")) comp.B.push_back(matrix_from_json(x));
      comp.C = matrix_from_json(c.at("C"));
      comp.U = matrix_from_json(c.at("U"));
      comp.V = matrix_from_json(c.at("V"));
      model.components.push_back(std::move(comp));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  try {
    model.validate();
  } catch (const Error& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  return model;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw DataError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot move output into place at '" + path.string() + "': " + ec.message());
  }
}

MmarModel load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("model file '" + path.string() + "': " + e.what());
  }
  return model_from_json(j);
}

void save_model(const MmarModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(model).dump(2) + "\n");
}

}  // namespace mmar
