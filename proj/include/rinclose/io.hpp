#pragma once

#include <rinclose/core.hpp>
#include <rinclose/enumerator.hpp>
#include <rinclose/rules.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace rinclose {

// ---------------------------------------------------------------------------
// Schema and parsing
// ---------------------------------------------------------------------------

struct ColumnSchema {
  std::string name;
  std::optional<ColumnKind> kind;
  std::optional<double> eps;
  std::vector<std::string> levels;  // code c <-> levels[c - 1]
  enum class Role { feature, label, drop } role = Role::feature;
};

/// Sidecar description of a delimited file. Every field is optional;
/// columns are matched by name when the file has a header, by position otherwise.
struct Schema {
  std::optional<char> delimiter;
  std::optional<bool> header;
  std::optional<bool> decimal_comma;
  std::optional<std::string> missing;
  std::optional<std::string> label;
  std::vector<std::string> drop;
  std::vector<ColumnSchema> columns;
  /// Relabels class values, e.g. {"no": "0", "yes": "1"}.
  std::map<std::string, std::string> label_map;

  static Schema from_json(const nlohmann::json& j) {
    Schema s;
    auto text = [&](const char* key) -> std::optional<std::string> {
      if (!j.contains(key)) return std::nullopt;
      return j.at(key).get<std::string>();
    };
    if (auto d = text("delimiter")) {
      if (*d == "\\t" || *d == "tab") *d = "\t";
      if (d->size() != 1) throw ConfigError("schema delimiter must be a single character");
      s.delimiter = (*d)[0];
    }
    if (j.contains("header")) s.header = j.at("header").get<bool>();
    if (j.contains("decimal_comma")) s.decimal_comma = j.at("decimal_comma").get<bool>();
    s.missing = text("missing");
    s.label = text("label");
    if (j.contains("drop")) s.drop = j.at("drop").get<std::vector<std::string>>();
    if (j.contains("label_map")) s.label_map = j.at("label_map").get<std::map<std::string, std::string>>();
    if (j.contains("columns")) {
      for (const auto& c : j.at("columns")) {
        ColumnSchema cs;
        cs.name = c.value("name", std::string{});
        if (c.contains("kind")) {
          auto k = column_kind_from_string(c.at("kind").get<std::string>());
          if (!k) throw ConfigError("unknown column kind '" + c.at("kind").get<std::string>() + "'");
          cs.kind = *k;
        }
        if (c.contains("eps")) cs.eps = c.at("eps").get<double>();
        if (c.contains("levels")) cs.levels = c.at("levels").get<std::vector<std::string>>();
        auto role = c.value("role", std::string("feature"));
        if (role == "label")
          cs.role = ColumnSchema::Role::label;
        else if (role == "drop")
          cs.role = ColumnSchema::Role::drop;
        else if (role != "feature")
          throw ConfigError("unknown column role '" + role + "'");
        s.columns.push_back(std::move(cs));
      }
    }
    return s;
  }

  static Schema load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema " + path.string());
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("bad schema " + path.string() + ": " + e.what());
    }
  }
};

/// Options for parse_dataset; unset fields fall back to the schema, then to defaults.
struct ParseOptions {
  std::optional<char> delimiter;  // default: tab if the first line has one, else ','
  std::optional<bool> header;     // default true
  std::optional<bool> decimal_comma;
  std::optional<std::string> missing;  // default "NA"
  std::optional<std::string> label;    // column name or 1-based position
  std::vector<std::string> drop;
  std::optional<Schema> schema;
};

struct LoadedDataset {
  LabeledDataset data;
  /// Per-feature eps taken from the schema, when given.
  std::vector<std::optional<double>> eps;
};

namespace detail {

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

/// Raw bytes to UTF-8, honouring UTF-8 and UTF-16 byte-order marks.
inline std::string decode_text(const std::string& raw) {
  auto u8 = [&](std::size_t k) { return static_cast<std::uint8_t>(raw[k]); };
  if (raw.size() >= 3 && u8(0) == 0xEF && u8(1) == 0xBB && u8(2) == 0xBF) return raw.substr(3);
  bool le = raw.size() >= 2 && u8(0) == 0xFF && u8(1) == 0xFE;
  bool be = raw.size() >= 2 && u8(0) == 0xFE && u8(1) == 0xFF;
  if (!le && !be) return raw;
  std::string out;
  out.reserve(raw.size() / 2);
  for (std::size_t k = 2; k + 1 < raw.size(); k += 2) {
    std::uint32_t unit = le ? (u8(k) | (u8(k + 1) << 8)) : ((u8(k) << 8) | u8(k + 1));
    if (unit >= 0xD800 && unit < 0xDC00 && k + 3 < raw.size()) {
      std::uint32_t low = le ? (u8(k + 2) | (u8(k + 3) << 8)) : ((u8(k + 2) << 8) | u8(k + 3));
      unit = 0x10000 + ((unit - 0xD800) << 10) + (low - 0xDC00);
      k += 2;
    }
    append_utf8(out, unit);
  }
  return out;
}

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_number(std::string s, bool decimal_comma) {
  if (decimal_comma) std::replace(s.begin(), s.end(), ',', '.');
  if (s.empty()) return std::nullopt;
  double v = 0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::size_t column_position(const std::vector<std::string>& names, const std::string& key,
                                   const char* what) {
  auto it = std::find(names.begin(), names.end(), key);
  if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
  std::size_t pos = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), pos);
  if (ec == std::errc{} && ptr == key.data() + key.size() && pos >= 1 && pos <= names.size()) return pos - 1;
  throw ConfigError(std::string("unknown ") + what + " column '" + key + "'");
}

}  // namespace detail

/// Reads a delimited text matrix.
///
/// Numeric columns whose values are all integers are typed discrete, other
/// numeric columns continuous, and anything else nominal with codes 1..k in
/// lexicographic level order. A schema can fix kinds, levels, eps and roles.
inline LoadedDataset parse_dataset(std::istream& in, const ParseOptions& opt = {}) {
  const Schema empty_schema;
  const Schema& schema = opt.schema ? *opt.schema : empty_schema;

  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string text = detail::decode_text(raw);

  std::vector<std::string> lines;
  {
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (detail::trim(line).empty()) continue;
      lines.push_back(line);
    }
  }
  if (lines.empty()) throw DataError("dataset is empty");

  const char delim = opt.delimiter.value_or(
      schema.delimiter.value_or(lines.front().find('\t') != std::string::npos ? '\t' : ','));
  const bool header = opt.header.value_or(schema.header.value_or(true));
  const bool decimal_comma = opt.decimal_comma.value_or(schema.decimal_comma.value_or(false));
  if (decimal_comma && delim == ',') throw ConfigError("decimal comma needs a delimiter other than ','");
  const std::string missing = opt.missing.value_or(schema.missing.value_or("NA"));

  std::vector<std::vector<std::string>> cells;
  for (const auto& l : lines) cells.push_back(detail::split(l, delim));
  const std::size_t width = cells.front().size();

  std::vector<std::string> names;
  std::size_t first_row = 0;
  if (header) {
    names = cells.front();
    first_row = 1;
  } else {
    for (std::size_t j = 0; j < width; ++j)
      names.push_back(j < schema.columns.size() && !schema.columns[j].name.empty() ? schema.columns[j].name
                                                                                    : "y" + std::to_string(j + 1));
  }
  for (std::size_t r = first_row; r < cells.size(); ++r)
    if (cells[r].size() != width)
      throw DataError("line " + std::to_string(r + 1) + ": expected " + std::to_string(width) + " fields, found " +
                      std::to_string(cells[r].size()));
  const std::size_t n = cells.size() - first_row;
  if (n == 0) throw DataError("dataset has a header but no rows");

  // Schema entry per file column.
  std::vector<const ColumnSchema*> col_schema(width, nullptr);
  for (std::size_t j = 0; j < width; ++j) {
    if (header) {
      for (const auto& cs : schema.columns)
        if (cs.name == names[j]) col_schema[j] = &cs;
    } else if (j < schema.columns.size()) {
      col_schema[j] = &schema.columns[j];
    }
  }

  std::optional<std::size_t> label_col;
  if (auto key = opt.label ? opt.label : schema.label) {
    label_col = detail::column_position(names, *key, "label");
  } else {
    for (std::size_t j = 0; j < width; ++j)
      if (col_schema[j] && col_schema[j]->role == ColumnSchema::Role::label) label_col = j;
  }
  std::vector<std::uint8_t> dropped(width, 0);
  for (const auto& d : opt.drop) dropped[detail::column_position(names, d, "drop")] = 1;
  for (const auto& d : schema.drop) dropped[detail::column_position(names, d, "drop")] = 1;
  for (std::size_t j = 0; j < width; ++j)
    if (col_schema[j] && col_schema[j]->role == ColumnSchema::Role::drop) dropped[j] = 1;
  if (label_col) dropped[*label_col] = 0;

  std::vector<std::size_t> features;
  for (std::size_t j = 0; j < width; ++j)
    if (!dropped[j] && j != label_col) features.push_back(j);
  if (features.empty()) throw DataError("dataset has no feature columns");

  LoadedDataset out;
  Matrix mat(n, features.size());
  for (std::size_t f = 0; f < features.size(); ++f) {
    const std::size_t j = features[f];
    const ColumnSchema* cs = col_schema[j];
    mat.set_name(f, names[j]);

    std::vector<std::optional<double>> numbers(n);
    bool all_numeric = true;
    bool all_integer = true;
    for (std::size_t r = 0; r < n; ++r) {
      const std::string& cell = cells[first_row + r][j];
      if (cell == missing) continue;
      numbers[r] = detail::parse_number(cell, decimal_comma);
      if (!numbers[r]) all_numeric = false;
      else if (*numbers[r] != std::floor(*numbers[r])) all_integer = false;
    }

    ColumnKind kind = cs && cs->kind ? *cs->kind
                      : all_numeric  ? (all_integer ? ColumnKind::discrete : ColumnKind::continuous)
                                     : ColumnKind::nominal;
    mat.set_kind(f, kind);

    bool coded = is_categorical(kind) && (!all_numeric || (cs && !cs->levels.empty()));
    if (coded) {
      std::vector<std::string> levels = cs ? cs->levels : std::vector<std::string>{};
      if (levels.empty()) {
        for (std::size_t r = 0; r < n; ++r)
          if (cells[first_row + r][j] != missing) levels.push_back(cells[first_row + r][j]);
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      }
      for (std::size_t r = 0; r < n; ++r) {
        const std::string& cell = cells[first_row + r][j];
        if (cell == missing) {
          mat.set_missing(r, f);
          continue;
        }
        auto it = std::find(levels.begin(), levels.end(), cell);
        if (it == levels.end())
          throw DataError("line " + std::to_string(first_row + r + 1) + ", column '" + names[j] +
                          "': value '" + cell + "' is not a declared level");
        mat.set(r, f, static_cast<double>(it - levels.begin() + 1));
      }
      mat.set_levels(f, std::move(levels));
    } else {
      for (std::size_t r = 0; r < n; ++r) {
        const std::string& cell = cells[first_row + r][j];
        if (cell == missing) {
          mat.set_missing(r, f);
          continue;
        }
        if (!numbers[r])
          throw DataError("line " + std::to_string(first_row + r + 1) + ", column '" + names[j] +
                          "': cannot parse '" + cell + "' as a number");
        mat.set(r, f, *numbers[r]);
      }
    }
    out.eps.push_back(cs ? cs->eps : std::nullopt);
  }

  if (label_col) {
    out.data.label_name = names[*label_col];
    for (std::size_t r = 0; r < n; ++r) {
      std::string v = cells[first_row + r][*label_col];
      if (v == missing) throw DataError("line " + std::to_string(first_row + r + 1) + ": missing class label");
      if (auto it = schema.label_map.find(v); it != schema.label_map.end()) v = it->second;
      out.data.labels.push_back(std::move(v));
    }
  }
  out.data.matrix = std::move(mat);
  return out;
}

inline LoadedDataset parse_dataset(const std::filesystem::path& path, ParseOptions opt = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_dataset(in, opt);
}

/// Writes a matrix as delimited text that parse_dataset reads back unchanged.
inline void write_matrix(const Matrix& mat, std::ostream& out, char delim = ',', const std::string& missing = "NA") {
  for (std::size_t j = 0; j < mat.cols(); ++j) out << (j ? std::string(1, delim) : "") << mat.name(j);
  out << '\n';
  for (std::size_t i = 0; i < mat.rows(); ++i) {
    for (std::size_t j = 0; j < mat.cols(); ++j) {
      if (j) out << delim;
      if (mat.missing(i, j)) {
        out << missing;
      } else if (!mat.levels(j).empty()) {
        out << mat.levels(j).at(static_cast<std::size_t>(mat.value(i, j)) - 1);
      } else {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, mat.value(i, j));
        out << std::string_view(buf, ptr - buf);
      }
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Solution output
// ---------------------------------------------------------------------------

enum class SolutionFormat { jsonl, table };

struct WriteOptions {
  SolutionFormat format = SolutionFormat::jsonl;
  /// Runtime makes output machine-dependent, so it is opt-in.
  bool include_runtime = false;
};

inline nlohmann::json stats_json(const EnumStats& s, bool include_runtime) {
  nlohmann::json j = {{"bicluster_count", s.bicluster_count},
                      {"recursive_calls", s.recursive_calls},
                      {"canonicity_tests", s.canonicity_tests},
                      {"canonicity_failures", s.canonicity_failures},
                      {"row_canonicity_failures", s.row_canonicity_failures},
                      {"peak_queue_depth", s.peak_queue_depth},
                      {"symbol_table_entries", s.symbol_table_entries},
                      {"peak_tracked_bytes", s.peak_tracked_bytes},
                      {"truncated", s.truncated}};
  if (include_runtime) j["seconds"] = s.seconds;
  return j;
}

/// Header line, one record per bicluster in row-set order, footer with stats.
inline void write_solution(const BiclusterSolution& sol, const EnumStats& stats, const Matrix& mat, std::ostream& out,
                           const WriteOptions& opt = {}) {
  const EnumParams& p = sol.params();
  auto ranges = [&](const IndexSet& rows, const IndexSet& cols) {
    std::vector<std::array<double, 2>> r;
    for (Index j : cols) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (Index i : rows) {
        lo = std::min(lo, mat.value(i, j));
        hi = std::max(hi, mat.value(i, j));
      }
      r.push_back({lo, hi});
    }
    return r;
  };

  if (opt.format == SolutionFormat::jsonl) {
    nlohmann::json header = {{"rows", mat.rows()},       {"cols", mat.cols()},       {"variant", to_string(p.variant)},
                             {"min_row", p.min_row},     {"min_col", p.min_col},     {"eps", p.eps},
                             {"pn_inheritance", p.pn_inheritance}, {"min_col_pruning", p.min_col_pruning}};
    out << nlohmann::json{{"header", header}}.dump() << '\n';
    sol.for_each([&](const IndexSet& rows, const IndexSet& cols) {
      out << nlohmann::json{{"rows", rows}, {"cols", cols}, {"ranges", ranges(rows, cols)}}.dump() << '\n';
    });
    nlohmann::json footer = stats_json(stats, opt.include_runtime);
    footer["count"] = sol.size();
    footer["coverage"] = coverage(sol);
    out << nlohmann::json{{"footer", footer}}.dump() << '\n';
    return;
  }

  auto join = [](const IndexSet& s) {
    std::string t;
    for (std::size_t k = 0; k < s.size(); ++k) t += (k ? "," : "") + std::to_string(s[k]);
    return t;
  };
  out << "# " << to_string(p.variant) << " on " << mat.rows() << "x" << mat.cols() << ", min_row=" << p.min_row
      << ", min_col=" << p.min_col << "\n";
  out << std::left << std::setw(6) << "#" << std::setw(32) << "rows" << std::setw(20) << "cols"
      << "ranges\n";
  std::size_t k = 0;
  sol.for_each([&](const IndexSet& rows, const IndexSet& cols) {
    std::string rtxt;
    auto rs = ranges(rows, cols);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::ostringstream one;
      one << mat.name(cols[c]) << "[" << rs[c][0] << "," << rs[c][1] << "]";
      rtxt += (c ? " " : "") + one.str();
    }
    out << std::left << std::setw(6) << ++k << std::setw(32) << join(rows) << std::setw(20) << join(cols) << rtxt
        << "\n";
  });
  out << "# count=" << sol.size() << " coverage=" << coverage(sol) << " calls=" << stats.recursive_calls
      << " canonicity_failures=" << stats.canonicity_failures
      << " row_canonicity_failures=" << stats.row_canonicity_failures << " peak_queue=" << stats.peak_queue_depth
      << (stats.truncated ? " truncated" : "");
  if (opt.include_runtime) out << " seconds=" << stats.seconds;
  out << "\n";
}

inline void write_solution(const BiclusterSolution& sol, const EnumStats& stats, const Matrix& mat,
                           const std::filesystem::path& path, const WriteOptions& opt = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_solution(sol, stats, mat, out, opt);
  if (!out) throw DataError("write failed for " + path.string());
}

/// Reads the records written by write_solution (jsonl format).
inline BiclusterSolution read_solution(std::istream& in) {
  BiclusterSolution sol;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("solution line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("rows")) continue;
    if (j.contains("header") || j.contains("footer")) continue;
    Bicluster b{j.at("rows").get<IndexSet>(), j.at("cols").get<IndexSet>()};
    std::sort(b.rows.begin(), b.rows.end());
    std::sort(b.cols.begin(), b.cols.end());
    sol.insert(std::move(b));
  }
  return sol;
}

inline void write_rules(const LabeledDataset& ds, std::span<const QuantRule> rules, std::ostream& out) {
  for (const QuantRule& r : rules) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : r.antecedent.items) items.push_back(format_item(ds.matrix, it));
    out << nlohmann::json{{"items", items},
                          {"label", r.label},
                          {"support", r.metrics.support},
                          {"confidence", r.metrics.confidence},
                          {"lift", r.metrics.lift},
                          {"leverage", r.metrics.leverage},
                          {"completeness", r.metrics.completeness},
                          {"matched_rows", r.metrics.antecedent_rows},
                          {"bicluster_rows", r.bicluster_rows}}
               .dump()
        << '\n';
  }
}

}  // namespace rinclose
