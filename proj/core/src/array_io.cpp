#include "qring/array_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <system_error>

#include "qring/error.hpp"

namespace qring {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "qring-raw-f64";

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  else return __builtin_bswap64(v);
}

fs::path with_suffix(const fs::path& base, const char* ext) {
  return fs::path(base.string() + ext);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return {buf, ptr};
}

json to_json(const ArrayMeta& meta) {
  json axes = json::array();
  for (const auto& a : meta.axes)
    axes.push_back({{"name", a.name}, {"units", a.units}, {"start", a.start}, {"stop", a.stop}, {"count", a.count}});
  json j = {
      {"format", kFormat},
      {"version", 1},
      {"dtype", "float64"},
      {"byte_order", "little"},
      {"layout", "row-major"},
      {"dims", meta.dims},
      {"axes", axes},
      {"quantity", meta.quantity},
      {"units", meta.units},
      {"ring_index", meta.ring_index},
      {"window_dt_ps", meta.window_dt},
      {"scenario_hash", meta.scenario_hash},
  };
  if (!meta.extra.empty()) j["extra"] = meta.extra;
  return j;
}

ArrayMeta meta_from_json(const json& j) {
  if (j.value("format", "") != kFormat) throw ValidationError("not a qring array sidecar");
  ArrayMeta m;
  m.dims = j.at("dims").get<std::vector<std::size_t>>();
  for (const auto& a : j.at("axes"))
    m.axes.push_back({a.at("name"), a.at("units"), a.at("start"), a.at("stop"), a.at("count")});
  m.quantity = j.at("quantity");
  m.units = j.value("units", "");
  m.ring_index = j.value("ring_index", -1);
  m.window_dt = j.value("window_dt_ps", 0.0);
  m.scenario_hash = j.value("scenario_hash", "");
  if (j.contains("extra")) m.extra = j.at("extra");
  return m;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ValidationError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_array(const fs::path& base, std::span<const double> data, const ArrayMeta& meta) {
  const std::size_t expected =
      std::accumulate(meta.dims.begin(), meta.dims.end(), std::size_t{1}, std::multiplies<>());
  if (meta.dims.empty() || expected != data.size())
    throw ValidationError("array '" + meta.quantity + "' has " + std::to_string(data.size()) +
                          " elements but dims imply " + std::to_string(expected));
  std::string bytes(data.size() * 8, '\0');
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::uint64_t v = to_little(std::bit_cast<std::uint64_t>(data[i]));
    std::memcpy(bytes.data() + 8 * i, &v, 8);
  }
  write_text_atomic(with_suffix(base, ".f64"), bytes);
  write_text_atomic(with_suffix(base, ".json"), to_json(meta).dump(2) + "\n");
}

LoadedArray read_array(const fs::path& base) {
  std::ifstream js(with_suffix(base, ".json"));
  if (!js) throw ValidationError("missing sidecar " + with_suffix(base, ".json").string());
  LoadedArray out;
  out.meta = meta_from_json(json::parse(js));
  const std::size_t n =
      std::accumulate(out.meta.dims.begin(), out.meta.dims.end(), std::size_t{1}, std::multiplies<>());
  std::ifstream raw(with_suffix(base, ".f64"), std::ios::binary);
  if (!raw) throw ValidationError("missing array data " + with_suffix(base, ".f64").string());
  std::string bytes((std::istreambuf_iterator<char>(raw)), std::istreambuf_iterator<char>());
  if (bytes.size() != 8 * n) throw ValidationError("array data size disagrees with sidecar dims");
  out.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t v;
    std::memcpy(&v, bytes.data() + 8 * i, 8);
    out.data[i] = std::bit_cast<double>(to_little(v));
  }
  return out;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

CsvWriter& CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw ValidationError("CSV row width mismatch");
  rows_.push_back(cells);
  return *this;
}

std::string CsvWriter::str() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return os.str();
}

void CsvWriter::save(const fs::path& path) const { write_text_atomic(path, str()); }

}  // namespace qring
