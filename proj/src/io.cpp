#include "disentangle/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "disentangle/error.hpp"

namespace disentangle::io {

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::column(std::string_view name) const {
  if (auto i = find_column(name)) return *i;
  throw DataError("csv: no column named '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A lone empty field is a blank line.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    if (ch == '"' && !field_started && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // handled by the following '\n'
    } else if (ch == '\n') {
      end_record();
      ++line;
    } else {
      field += ch;
      field_started = true;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field near line " + std::to_string(line));
  if (!field.empty() || !record.empty() || field_started) end_record();
  if (records.empty()) throw DataError("csv: missing header row");

  CsvTable t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw DataError("csv: record " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                      " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, std::string_view text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path);
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw IoError("write failed: " + path);
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text(path)); }

namespace {

std::string quote(const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
  std::string out = "\"";
  for (char ch : f) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void render_record(std::string& out, const std::vector<std::string>& rec) {
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (i) out += ',';
    out += quote(rec[i]);
  }
  out += '\n';
}

}  // namespace

std::string render_csv(const CsvTable& table) {
  std::string out;
  render_record(out, table.header);
  for (const auto& r : table.rows) render_record(out, r);
  return out;
}

void write_csv(const std::string& path, const CsvTable& table) { write_text(path, render_csv(table)); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view field, std::size_t row, std::string_view column) {
  auto where = [&] { return " at data row " + std::to_string(row + 1) + ", column '" + std::string(column) + "'"; };
  if (field.empty()) throw DataError("csv: missing value" + where());
  double v = 0.0;
  const char* first = field.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError("csv: '" + std::string(field) + "' is not a number" + where());
  }
  if (!std::isfinite(v)) throw DataError("csv: non-finite value" + where());
  return v;
}

Matrix to_matrix(const CsvTable& table, const std::vector<std::size_t>& columns) {
  Matrix m(table.rows.size(), columns.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      m(r, j) = parse_double(table.rows[r][columns[j]], r, table.header[columns[j]]);
    }
  }
  return m;
}

void append_columns(CsvTable& table, const Matrix& m, const std::vector<std::string>& names) {
  if (names.size() != m.cols()) throw InvariantError("append_columns: name count does not match columns");
  if (table.header.empty() && table.rows.empty()) table.rows.resize(m.rows());
  if (table.rows.size() != m.rows()) {
    throw InvariantError("append_columns: table has " + std::to_string(table.rows.size()) + " rows, matrix " +
                         m.shape_string());
  }
  table.header.insert(table.header.end(), names.begin(), names.end());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t j = 0; j < m.cols(); ++j) table.rows[r].push_back(format_double(m(r, j)));
  }
}

CsvDataset dataset_from_table(const CsvTable& table, const std::string& label_column) {
  std::vector<std::size_t> a, b, c, x, sc;
  const auto label = table.find_column(label_column);
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (label && i == *label) continue;
    const std::string& h = table.header[i];
    if (h.starts_with("a_")) {
      a.push_back(i);
    } else if (h.starts_with("b_")) {
      b.push_back(i);
    } else if (h.starts_with("c_")) {
      c.push_back(i);
    } else if (h.size() > 1 && h[0] == 'x' && std::isdigit(static_cast<unsigned char>(h[1]))) {
      x.push_back(i);
    } else if (h.size() > 1 && h[0] == 'c' && std::isdigit(static_cast<unsigned char>(h[1]))) {
      sc.push_back(i);
    }
  }
  if (a.empty()) {
    a = x;
    if (c.empty()) c = sc;
  }
  if (a.empty()) {
    throw DataError("csv: no modality columns (expected a_*/b_* or x1..xd headers)");
  }
  CsvDataset ds;
  ds.modality_a = to_matrix(table, a);
  for (auto i : a) ds.a_columns.push_back(table.header[i]);
  if (!b.empty()) {
    ds.modality_b = to_matrix(table, b);
    for (auto i : b) ds.b_columns.push_back(table.header[i]);
  }
  if (!c.empty()) ds.shared = to_matrix(table, c);
  if (label) {
    std::vector<std::string> labels;
    labels.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& v = table.rows[r][*label];
      if (v.empty()) throw DataError("csv: missing label at data row " + std::to_string(r + 1));
      labels.push_back(v);
    }
    ds.labels = std::move(labels);
  }
  return ds;
}

CsvDataset load_dataset(const std::string& path, const std::string& label_column) {
  return dataset_from_table(read_csv(path), label_column);
}

}  // namespace disentangle::io
