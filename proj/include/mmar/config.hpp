#pragma once

// Flat key=value run configuration. Blank lines and '#' comments are
// ignored; unknown keys are errors. Values are layered defaults < file <
// command-line overrides.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmar/estimate.hpp"
#include "mmar/selection.hpp"

namespace mmar {

struct RunConfig {
  std::vector<int> K{2};
  std::vector<int> p{1};
  std::string criterion = "bic";
  std::string search = "grid";  // grid | stepwise
  std::optional<std::uint64_t> seed;
  EmOptions em;
  bool center = false;
  bool scale = false;
  double level = 0.95;
};

using ConfigMap = std::map<std::string, std::string>;

const std::vector<std::string>& config_keys();

// Throws DataError on malformed lines, duplicate or unknown keys.
ConfigMap parse_config_text(const std::string& text, const std::string& source = "<config>");
ConfigMap read_config_file(const std::filesystem::path& path);

// Applies `layer` on top of `base`; later layers win.
void merge_config(ConfigMap& base, const ConfigMap& layer);

// Interprets the merged map. Throws DataError on unknown keys or values that
// do not parse, InvalidParameter on values outside their range.
RunConfig make_config(const ConfigMap& values);

// Integer lists: "2", "1,2,3" or "1:3".
std::vector<int> parse_int_list(const std::string& s, const std::string& key);

std::string format_config(const RunConfig& cfg);

}  // namespace mmar
