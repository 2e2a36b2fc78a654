#pragma once

// Raw little-endian float64 arrays with a JSON sidecar, plus small CSV
// helpers. An array `name` lives in `name.f64` next to `name.json`.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace qring {

struct Axis {
  std::string name;
  std::string units;
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 0;
};

struct ArrayMeta {
  std::vector<std::size_t> dims;  // slowest first
  std::vector<Axis> axes;
  std::string quantity;
  std::string units;
  /// 1-based ring index; 0 means the whole stack, -1 not ring-specific.
  int ring_index = -1;
  double window_dt = 0.0;  // ps, 0 if not applicable
  std::string scenario_hash;
  nlohmann::json extra = nlohmann::json::object();
};

[[nodiscard]] nlohmann::json to_json(const ArrayMeta& meta);
[[nodiscard]] ArrayMeta meta_from_json(const nlohmann::json& j);

/// Writes `<base>.f64` and `<base>.json` atomically. Throws ValidationError
/// if the element count disagrees with dims.
void write_array(const std::filesystem::path& base, std::span<const double> data, const ArrayMeta& meta);

struct LoadedArray {
  std::vector<double> data;
  ArrayMeta meta;
};
[[nodiscard]] LoadedArray read_array(const std::filesystem::path& base);

/// Writes `content` to `path` via a temporary file and rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& row(const std::vector<std::string>& cells);
  [[nodiscard]] std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Shortest round-trip decimal representation.
[[nodiscard]] std::string format_double(double v);

}  // namespace qring
