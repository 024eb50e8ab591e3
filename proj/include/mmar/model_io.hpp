#pragma once

// "mmar-model/1" JSON documents:
//   {"version": "mmar-model/1",
//    "spec": {"m": 2, "n": 3, "orders": [1, 1]},
//    "alphas": [0.4, 0.6],
//    "components": [{"A": [M, ...], "B": [M, ...], "C": M, "U": M, "V": M}, ...]}
// where every matrix M is {"rows": r, "cols": c, "data": [[row 1], [row 2], ...]}.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mmar/model.hpp"

namespace mmar {

inline constexpr const char* kModelFormat = "mmar-model/1";

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const MmarModel& model);
// Throws DataError on malformed documents; the model is validated.
MmarModel model_from_json(const nlohmann::json& j);

MmarModel load_model(const std::filesystem::path& path);
void save_model(const MmarModel& model, const std::filesystem::path& path);

// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace mmar
