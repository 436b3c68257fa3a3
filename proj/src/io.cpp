#include "screening/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "screening/errors.hpp"

namespace screening {

namespace fs = std::filesystem;

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ConfigError("csv: no column named '" + name + "'");
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_csv(const fs::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw InvariantViolation("csv: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw ConfigError("csv: missing header in " + path.string());
  std::istringstream head(line);
  for (std::string cell; std::getline(head, cell, ',');) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw ConfigError("csv: non-numeric cell '" + cell + "' in " + path.string());
      row.push_back(v);
    }
    if (row.size() != table.header.size()) throw ConfigError("csv: ragged row in " + path.string());
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_json(const fs::path& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

namespace {

void require_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const Json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

Real number(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  if (!obj.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return obj.at(key).get<Real>();
}

std::string family_of(const Json& obj, const std::string& where) {
  if (!obj.is_object() || !obj.contains("family") || !obj.at("family").is_string())
    throw ConfigError(where + ": needs a string 'family'");
  return obj.at("family").get<std::string>();
}

TypeDistribution parse_distribution(const Json& obj, const fs::path& base) {
  const std::string where = "primitives.distribution";
  const std::string fam = family_of(obj, where);
  if (fam == "uniform") {
    require_keys(obj, where, {"family"});
    return TypeDistribution::uniform();
  }
  if (fam == "beta") {
    require_keys(obj, where, {"family", "a", "b"});
    return TypeDistribution::beta(number(obj, "a", where), number(obj, "b", where));
  }
  if (fam == "cosine_bump") {
    require_keys(obj, where, {"family", "amplitude", "frequency"});
    return TypeDistribution::cosine_bump(number(obj, "amplitude", where), number(obj, "frequency", where));
  }
  if (fam == "tabulated") {
    require_keys(obj, where, {"family", "path", "grid", "density"});
    if (obj.contains("path")) {
      if (obj.contains("grid") || obj.contains("density")) throw ConfigError(where + ": give either path or grid/density");
      fs::path p = get_or<std::string>(obj, "path", "", where);
      if (p.is_relative()) p = base / p;
      return TypeDistribution::tabulated_from_csv(p.string());
    }
    return TypeDistribution::tabulated(get_or<std::vector<Real>>(obj, "grid", {}, where),
                                       get_or<std::vector<Real>>(obj, "density", {}, where));
  }
  throw ConfigError(where + ": unknown family '" + fam + "'");
}

QualityUtility parse_utility(const Json& obj) {
  const std::string where = "primitives.utility";
  const std::string fam = family_of(obj, where);
  if (fam == "sqrt") {
    require_keys(obj, where, {"family", "scale"});
    return QualityUtility::sqrt_scaled(get_or<Real>(obj, "scale", 1.0, where));
  }
  if (fam == "power") {
    require_keys(obj, where, {"family", "scale", "exponent"});
    return QualityUtility::power_scaled(get_or<Real>(obj, "scale", 1.0, where), number(obj, "exponent", where));
  }
  if (fam == "linear") {
    require_keys(obj, where, {"family"});
    return QualityUtility::linear();
  }
  throw ConfigError(where + ": unknown family '" + fam + "'");
}

CostFunction parse_cost(const Json& obj) {
  const std::string where = "primitives.cost";
  const std::string fam = family_of(obj, where);
  if (fam == "power") {
    require_keys(obj, where, {"family", "scale", "exponent"});
    return CostFunction::power(number(obj, "scale", where), get_or<Real>(obj, "exponent", 2.0, where));
  }
  if (fam == "scaled_power") {
    require_keys(obj, where, {"family", "scale", "exponent"});
    return CostFunction::scaled_power(get_or<Real>(obj, "scale", 1.0, where), number(obj, "exponent", where));
  }
  throw ConfigError(where + ": unknown family '" + fam + "'");
}

template <typename T>
void positive(T v, const std::string& what) {
  if (!(v > 0)) throw ConfigError(what + " must be positive");
}

}  // namespace

RunConfig parse_config(const Json& doc, const fs::path& base_dir) {
  require_keys(doc, "config", {"primitives", "numeric", "command", "output"});
  if (!doc.contains("primitives")) throw ConfigError("config: missing 'primitives'");
  const Json& p = doc.at("primitives");
  require_keys(p, "primitives", {"distribution", "utility", "cost"});
  for (const char* k : {"distribution", "utility", "cost"})
    if (!p.contains(k)) throw ConfigError(std::string("primitives: missing '") + k + "'");

  std::optional<ModelPrimitives> prim;
  try {
    prim.emplace(parse_distribution(p.at("distribution"), base_dir), parse_utility(p.at("utility")),
                 parse_cost(p.at("cost")));
  } catch (const ConfigError&) {
    throw;
  } catch (const ScreeningError& e) {
    throw ConfigError(std::string("primitives: ") + e.what());
  }

  NumericSettings num;
  if (doc.contains("numeric")) {
    const Json& n = doc.at("numeric");
    const std::string w = "numeric";
    require_keys(n, w, {"root_tol", "seed", "oracle_types", "oracle_qualities", "oracle_q_hi", "ironing_cells",
                        "curve_points", "audit_pairs", "threads"});
    num.root_tol = get_or(n, "root_tol", num.root_tol, w);
    num.seed = get_or(n, "seed", num.seed, w);
    num.oracle_types = get_or(n, "oracle_types", num.oracle_types, w);
    num.oracle_qualities = get_or(n, "oracle_qualities", num.oracle_qualities, w);
    num.oracle_q_hi = get_or(n, "oracle_q_hi", num.oracle_q_hi, w);
    num.ironing_cells = get_or(n, "ironing_cells", num.ironing_cells, w);
    num.curve_points = get_or(n, "curve_points", num.curve_points, w);
    num.audit_pairs = get_or(n, "audit_pairs", num.audit_pairs, w);
    num.threads = get_or(n, "threads", num.threads, w);
  }
  positive(num.root_tol, "numeric.root_tol");
  positive(num.oracle_types, "numeric.oracle_types");
  if (num.oracle_qualities < 2) throw ConfigError("numeric.oracle_qualities must be at least 2");
  if (num.oracle_q_hi < 0) throw ConfigError("numeric.oracle_q_hi must be nonnegative");
  if (num.ironing_cells < 2) throw ConfigError("numeric.ironing_cells must be at least 2");
  if (num.curve_points < 2) throw ConfigError("numeric.curve_points must be at least 2");
  positive(num.audit_pairs, "numeric.audit_pairs");
  if (num.threads < 0) throw ConfigError("numeric.threads must be nonnegative");

  CommandSettings cmd;
  if (doc.contains("command")) {
    const Json& c = doc.at("command");
    const std::string w = "command";
    require_keys(c, w, {"firms", "samples", "export_samples", "limit_alphas", "limit_scale", "sweep_kappa_c",
                        "sweep_kappa_g", "flip_kappa_g", "cap_offset", "subgame_x", "subgame_y",
                        "fixed_quality_high", "fixed_quality_low", "figure_q_max"});
    cmd.firms = get_or(c, "firms", cmd.firms, w);
    cmd.samples = get_or(c, "samples", cmd.samples, w);
    cmd.export_samples = get_or(c, "export_samples", cmd.export_samples, w);
    cmd.limit_alphas = get_or(c, "limit_alphas", cmd.limit_alphas, w);
    cmd.limit_scale = get_or(c, "limit_scale", cmd.limit_scale, w);
    cmd.sweep_kappa_c = get_or(c, "sweep_kappa_c", cmd.sweep_kappa_c, w);
    cmd.sweep_kappa_g = get_or(c, "sweep_kappa_g", cmd.sweep_kappa_g, w);
    cmd.flip_kappa_g = get_or(c, "flip_kappa_g", cmd.flip_kappa_g, w);
    cmd.cap_offset = get_or(c, "cap_offset", cmd.cap_offset, w);
    cmd.subgame_x = get_or(c, "subgame_x", cmd.subgame_x, w);
    cmd.subgame_y = get_or(c, "subgame_y", cmd.subgame_y, w);
    cmd.fixed_quality_high = get_or(c, "fixed_quality_high", cmd.fixed_quality_high, w);
    cmd.fixed_quality_low = get_or(c, "fixed_quality_low", cmd.fixed_quality_low, w);
    cmd.figure_q_max = get_or(c, "figure_q_max", cmd.figure_q_max, w);
  }
  for (int n : cmd.firms)
    if (n < 2) throw ConfigError("command.firms entries must be at least 2");
  if (cmd.samples < 2) throw ConfigError("command.samples must be at least 2");
  if (cmd.export_samples < 0) throw ConfigError("command.export_samples must be nonnegative");
  for (Real a : cmd.limit_alphas)
    if (!(a > 1.0)) throw ConfigError("command.limit_alphas entries must exceed 1");
  for (std::size_t i = 1; i < cmd.limit_alphas.size(); ++i)
    if (!(cmd.limit_alphas[i] > cmd.limit_alphas[i - 1])) throw ConfigError("command.limit_alphas must ascend");
  positive(cmd.limit_scale, "command.limit_scale");
  for (const auto* grid : {&cmd.sweep_kappa_c, &cmd.sweep_kappa_g, &cmd.flip_kappa_g})
    for (Real k : *grid) positive(k, "sweep scales");
  if (!(cmd.subgame_y >= 0.0 && cmd.subgame_y <= cmd.subgame_x))
    throw ConfigError("command.subgame_y must lie in [0, subgame_x]");
  positive(cmd.fixed_quality_high, "command.fixed_quality_high");
  positive(cmd.fixed_quality_low, "command.fixed_quality_low");
  positive(cmd.figure_q_max, "command.figure_q_max");

  std::optional<std::string> out;
  if (doc.contains("output")) {
    require_keys(doc.at("output"), "output", {"directory"});
    if (doc.at("output").contains("directory")) out = get_or<std::string>(doc.at("output"), "directory", "", "output");
  }
  return RunConfig{*prim, num, cmd, out};
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc, path.parent_path());
}

}  // namespace screening
