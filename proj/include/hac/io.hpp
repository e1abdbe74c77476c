#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "hac/dataset.hpp"
#include "hac/dendrogram.hpp"

namespace hac {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace io_detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open file for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("write failed: " + path);
}

inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

inline bool parse_double(std::string_view token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [p, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && p == end;
}

template <typename T>
bool parse_integer(std::string_view token, T& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [p, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && p == end;
}

// 17 significant decimal digits round-trip every finite 64-bit float.
inline void append_double(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

struct Cursor {
  const std::string& bytes;
  std::size_t offset = 0;

  void need(std::size_t count, const char* what) const {
    if (offset + count > bytes.size())
      throw io_error("truncated " + std::string(what) + " at offset " +
                     std::to_string(offset));
  }

  template <typename T>
  T take(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes.data() + offset, sizeof(T));
    offset += sizeof(T);
    return v;
  }
};

}  // namespace io_detail

// Column selector for the CSV loader: by 0-based index or by header name.
using LabelColumn = std::variant<std::size_t, std::string>;

// Parses a rectangular comma-separated file of 64-bit floats, optionally
// extracting one column as labels. String labels densify to 0,1,2,... in
// first-appearance order.
inline Dataset load_csv(const std::string& path, bool has_header = false,
                        std::optional<LabelColumn> label_column = {}) {
  using namespace io_detail;
  const std::string text = read_file(path);
  Dataset ds;
  ds.name = path;

  std::size_t label_idx = static_cast<std::size_t>(-1);
  bool label_by_name = false;
  std::string label_name;
  if (label_column) {
    if (const auto* idx = std::get_if<std::size_t>(&*label_column))
      label_idx = *idx;
    else {
      label_by_name = true;
      label_name = std::get<std::string>(*label_column);
      if (!has_header)
        throw io_error("label column by name requires a header row");
    }
  }

  std::vector<double> values;
  std::vector<std::uint64_t> labels;
  std::unordered_map<std::string, std::uint64_t> label_ids;
  std::size_t columns = 0;
  std::size_t row_number = 0;  // 1-based, includes the header
  std::size_t data_rows = 0;

  std::size_t pos = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line = strip_cr(
        std::string_view(text).substr(pos, eol - pos));
    pos = eol + 1;
    ++row_number;
    if (line.empty()) continue;

    const auto fields = split(line, ',');
    if (has_header && !saw_header) {
      saw_header = true;
      columns = fields.size();
      if (label_by_name) {
        bool found = false;
        for (std::size_t i = 0; i < fields.size(); ++i) {
          if (trim(fields[i]) == label_name) {
            label_idx = i;
            found = true;
            break;
          }
        }
        if (!found)
          throw io_error("row 1: no column named '" + label_name + "'");
      }
      continue;
    }
    if (columns == 0) columns = fields.size();
    if (fields.size() != columns)
      throw io_error("row " + std::to_string(row_number) +
                     ": expected " + std::to_string(columns) +
                     " fields, found " + std::to_string(fields.size()));
    if (label_column && label_idx >= columns)
      throw io_error("label column index out of range");

    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string token = trim(fields[i]);
      if (label_column && i == label_idx) {
        std::uint64_t as_int = 0;
        if (parse_integer(token, as_int)) {
          labels.push_back(as_int);
        } else {
          auto [it, inserted] =
              label_ids.try_emplace(token, label_ids.size());
          labels.push_back(it->second);
        }
        continue;
      }
      double v = 0.0;
      if (!parse_double(token, v))
        throw io_error("row " + std::to_string(row_number) +
                       ": non-numeric feature '" + token + "'");
      if (!std::isfinite(v))
        throw io_error("row " + std::to_string(row_number) +
                       ": non-finite feature");
      values.push_back(v);
    }
    ++data_rows;
  }

  if (data_rows == 0) throw io_error("no data rows in " + path);
  ds.n = data_rows;
  ds.d = columns - (label_column ? 1 : 0);
  if (ds.d == 0) throw io_error("no feature columns in " + path);
  ds.points = std::move(values);
  if (label_column) ds.labels = std::move(labels);
  validate(ds);
  return ds;
}

// Binary dataset layout, little-endian: magic "HACD", u32 version = 1,
// u64 n, u64 d, n*d float64 row-major, u8 label flag, then n u64 labels if
// the flag is 1.
inline std::string serialize_binary(const Dataset& ds) {
  std::string out;
  out.reserve(21 + ds.points.size() * 8 +
              (ds.labels ? ds.labels->size() * 8 : 0));
  out.append("HACD", 4);
  auto put = [&out](const void* p, std::size_t len) {
    out.append(static_cast<const char*>(p), len);
  };
  const std::uint32_t version = 1;
  put(&version, 4);
  const std::uint64_t n = ds.n, d = ds.d;
  put(&n, 8);
  put(&d, 8);
  put(ds.points.data(), ds.points.size() * 8);
  const std::uint8_t flag = ds.labels ? 1 : 0;
  put(&flag, 1);
  if (ds.labels) put(ds.labels->data(), ds.labels->size() * 8);
  return out;
}

inline Dataset parse_binary(const std::string& bytes) {
  using namespace io_detail;
  Cursor cur{bytes};
  cur.need(4, "magic");
  if (bytes.compare(0, 4, "HACD") != 0)
    throw io_error("bad magic at offset 0");
  cur.offset = 4;
  const auto version = cur.take<std::uint32_t>("version");
  if (version != 1)
    throw io_error("unsupported version " + std::to_string(version) +
                   " at offset 4");
  Dataset ds;
  const auto n = cur.take<std::uint64_t>("point count");
  const auto d = cur.take<std::uint64_t>("dimension");
  if (n == 0 || d == 0) throw io_error("empty dataset header");
  const std::uint64_t remaining = (bytes.size() - cur.offset) / 8;
  if (d > remaining || n > remaining / d)
    throw io_error("truncated point payload at offset " +
                   std::to_string(cur.offset));
  ds.n = n;
  ds.d = d;
  ds.points.resize(n * d);
  cur.need(n * d * 8, "point payload");
  std::memcpy(ds.points.data(), bytes.data() + cur.offset, n * d * 8);
  cur.offset += n * d * 8;
  const auto flag = cur.take<std::uint8_t>("label flag");
  if (flag > 1)
    throw io_error("bad label flag at offset " +
                   std::to_string(cur.offset - 1));
  if (flag == 1) {
    std::vector<std::uint64_t> labels(n);
    cur.need(n * 8, "label payload");
    std::memcpy(labels.data(), bytes.data() + cur.offset, n * 8);
    cur.offset += n * 8;
    ds.labels = std::move(labels);
  }
  if (cur.offset != bytes.size())
    throw io_error("trailing bytes at offset " + std::to_string(cur.offset));
  validate(ds);
  return ds;
}

inline void save_binary(const Dataset& ds, const std::string& path) {
  io_detail::write_file(path, serialize_binary(ds));
}

inline Dataset load_binary(const std::string& path) {
  return parse_binary(io_detail::read_file(path));
}

// Dendrogram TSV: header line "#n=<n>", then one merge per line as
// left<TAB>right<TAB>cost<TAB>size with costs at 17 significant digits.
inline std::string serialize_dendrogram(const Dendrogram& dg) {
  std::string out = "#n=" + std::to_string(dg.n) + "\n";
  for (const MergeRecord& m : dg.merges) {
    out += std::to_string(m.left);
    out += '\t';
    out += std::to_string(m.right);
    out += '\t';
    io_detail::append_double(out, m.cost);
    out += '\t';
    out += std::to_string(m.size);
    out += '\n';
  }
  return out;
}

inline Dendrogram parse_dendrogram(std::string_view text) {
  using namespace io_detail;
  Dendrogram dg;
  std::size_t pos = 0;
  std::size_t line_number = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = strip_cr(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_number;
    if (line.empty()) continue;
    if (!saw_header) {
      if (line.substr(0, 3) != "#n=")
        throw io_error("line 1: expected '#n=<count>' header");
      std::uint32_t n = 0;
      if (!parse_integer(line.substr(3), n) || n == 0)
        throw io_error("line 1: bad point count");
      dg.n = n;
      saw_header = true;
      continue;
    }
    const auto fields = split(line, '\t');
    if (fields.size() != 4)
      throw io_error("line " + std::to_string(line_number) +
                     ": expected 4 tab-separated fields");
    MergeRecord m;
    if (!parse_integer(fields[0], m.left) ||
        !parse_integer(fields[1], m.right))
      throw io_error("line " + std::to_string(line_number) + ": bad id");
    if (!parse_double(fields[2], m.cost))
      throw io_error("line " + std::to_string(line_number) + ": bad cost");
    if (!parse_integer(fields[3], m.size))
      throw io_error("line " + std::to_string(line_number) + ": bad size");
    dg.merges.push_back(m);
  }
  if (!saw_header) throw io_error("missing '#n=' header");
  try {
    validate(dg);
  } catch (const std::invalid_argument& e) {
    throw io_error(e.what());
  }
  return dg;
}

inline void save_dendrogram(const Dendrogram& dg, const std::string& path) {
  io_detail::write_file(path, serialize_dendrogram(dg));
}

inline Dendrogram load_dendrogram(const std::string& path) {
  return parse_dendrogram(io_detail::read_file(path));
}

// Ground-truth labels: a single-column CSV (integers or strings densified in
// first-appearance order) or a binary dataset file carrying labels.
inline std::vector<std::uint64_t> load_labels(const std::string& path) {
  using namespace io_detail;
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    const std::string text = read_file(path);
    std::vector<std::uint64_t> labels;
    std::unordered_map<std::string, std::uint64_t> ids;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) eol = text.size();
      const std::string token =
          trim(strip_cr(std::string_view(text).substr(pos, eol - pos)));
      pos = eol + 1;
      if (token.empty()) continue;
      std::uint64_t as_int = 0;
      if (parse_integer(token, as_int)) {
        labels.push_back(as_int);
      } else {
        auto [it, inserted] = ids.try_emplace(token, ids.size());
        labels.push_back(it->second);
      }
    }
    if (labels.empty()) throw io_error("no labels in " + path);
    return labels;
  }
  const Dataset ds = load_binary(path);
  if (!ds.labels) throw io_error("dataset file carries no labels: " + path);
  return *ds.labels;
}

}  // namespace hac
