#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "screening/primitives.hpp"

namespace screening {

using Json = nlohmann::ordered_json;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; ConfigError if absent.
  std::size_t column(const std::string& name) const;
};

/// Shortest decimal form with 17 significant digits, independent of locale.
std::string format_number(double v);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);

struct NumericSettings {
  Real root_tol = 1e-12;
  std::uint64_t seed = 42;
  int oracle_types = 200;
  int oracle_qualities = 400;
  Real oracle_q_hi = 0.0;  // 0 selects 1.5 q*
  int ironing_cells = 4096;
  int curve_points = 201;
  long long audit_pairs = 10000;
  int threads = 0;
};

struct CommandSettings {
  std::vector<int> firms{2, 3, 4};
  long long samples = 1'000'000;
  long long export_samples = 0;
  std::vector<Real> limit_alphas;
  Real limit_scale = 1.0;
  std::vector<Real> sweep_kappa_c{0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<Real> sweep_kappa_g{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<Real> flip_kappa_g{0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  Real cap_offset = 0.0;
  Real subgame_x = 1.0;
  Real subgame_y = 0.5;
  Real fixed_quality_high = 1.0;  // allocation panel above beta(0)
  Real fixed_quality_low = 0.2;   // allocation panel at or below beta(0)
  Real figure_q_max = 4.8;
};

struct RunConfig {
  ModelPrimitives primitives;
  NumericSettings numeric;
  CommandSettings command;
  std::optional<std::string> output_directory;
};

/// Strict parse: unknown keys, wrong types and invalid parameters raise ConfigError.
/// Relative paths inside the document resolve against `base_dir`.
RunConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

}  // namespace screening
