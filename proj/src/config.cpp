#include "mmar/config.hpp"

#include <algorithm>
#include <charconv>
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

template <class T>
T parse_number(const std::string& s, const std::string& key) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw DataError("config: " + key + " = '" + s + "' does not parse");
  return v;
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw DataError("config: " + key + " = '" + s + "' is not a boolean");
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "K",         "p",           "criterion",     "search",          "seed",         "max_em_iters",
      "em_rel_tol", "max_inner_iters", "inner_rel_tol", "ridge_jitter", "n_starts",     "univariate_starts",
      "max_condition", "center",  "scale",         "level"};
  return keys;
}

ConfigMap parse_config_text(const std::string& text, const std::string& source) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw DataError(where + ": unknown key '" + key + "'");
    if (out.count(key)) throw DataError(where + ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

ConfigMap read_config_file(const std::filesystem::path& path) {
  return parse_config_text(read_file(path), path.string());
}

void merge_config(ConfigMap& base, const ConfigMap& layer) {
  for (const auto& [k, v] : layer) base[k] = v;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& key) {
  std::vector<int> out;
  if (const auto colon = s.find(':'); colon != std::string::npos) {
    const int lo = parse_number<int>(trim(s.substr(0, colon)), key);
    const int hi = parse_number<int>(trim(s.substr(colon + 1)), key);
    if (hi < lo) throw DataError("config: " + key + " range '" + s + "' is empty");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(parse_number<int>(trim(item), key));
  if (out.empty()) throw DataError("config: " + key + " is empty");
  return out;
}

RunConfig make_config(const ConfigMap& values) {
  RunConfig c;
  const auto& keys = config_keys();
  for (const auto& [k, v] : values) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw DataError("config: unknown key '" + k + "'");
    if (k == "K") c.K = parse_int_list(v, k);
    else if (k == "p") c.p = parse_int_list(v, k);
    else if (k == "criterion") c.criterion = v;
    else if (k == "search") c.search = v;
    else if (k == "seed") c.seed = parse_number<std::uint64_t>(v, k);
    else if (k == "max_em_iters") c.em.max_em_iters = parse_number<int>(v, k);
    else if (k == "em_rel_tol") c.em.em_rel_tol = parse_number<double>(v, k);
    else if (k == "max_inner_iters") c.em.max_inner_iters = parse_number<int>(v, k);
    else if (k == "inner_rel_tol") c.em.inner_rel_tol = parse_number<double>(v, k);
    else if (k == "ridge_jitter") c.em.ridge_jitter = parse_number<double>(v, k);
    else if (k == "n_starts") c.em.n_starts = parse_number<int>(v, k);
    else if (k == "univariate_starts") c.em.univariate_starts = parse_number<int>(v, k);
    else if (k == "max_condition") c.em.max_condition = parse_number<double>(v, k);
    else if (k == "center") c.center = parse_bool(v, k);
    else if (k == "scale") c.scale = parse_bool(v, k);
    else if (k == "level") c.level = parse_number<double>(v, k);
  }
  parse_criterion(c.criterion);
  if (c.search != "grid" && c.search != "stepwise")
    throw InvalidParameter("config: search must be 'grid' or 'stepwise'");
  for (int k : c.K)
    if (k < 1) throw InvalidParameter("config: K values must be >= 1");
  for (int p : c.p)
    if (p < 1) throw InvalidParameter("config: p values must be >= 1");
  if (!(c.level > 0.0 && c.level < 1.0)) throw InvalidParameter("config: level must lie in (0,1)");
  if (c.seed) c.em.seed = *c.seed;
  c.em.validate();
  return c;
}

std::string format_config(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "K = " << join(c.K) << "\n"
      << "p = " << join(c.p) << "\n"
      << "criterion = " << c.criterion << "\n"
      << "search = " << c.search << "\n";
  if (c.seed) out << "seed = " << *c.seed << "\n";
  out << "max_em_iters = " << c.em.max_em_iters << "\n"
      << "em_rel_tol = " << c.em.em_rel_tol << "\n"
      << "max_inner_iters = " << c.em.max_inner_iters << "\n"
      << "inner_rel_tol = " << c.em.inner_rel_tol << "\n"
      << "ridge_jitter = " << c.em.ridge_jitter << "\n"
      << "n_starts = " << c.em.n_starts << "\n"
      << "univariate_starts = " << c.em.univariate_starts << "\n"
      << "max_condition = " << c.em.max_condition << "\n"
      << "center = " << (c.center ? "true" : "false") << "\n"
      << "scale = " << (c.scale ? "true" : "false") << "\n"
      << "level = " << c.level << "\n";
  return out.str();
}

}  // namespace mmar
