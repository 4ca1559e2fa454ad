#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "disentangle/matrix.hpp"

namespace disentangle::io {

// RFC-4180 text: comma separated, optional double quotes with "" as the
// escape, CRLF or LF line ends. The first record is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws DataError when the column is absent.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
};

// Throws DataError on ragged rows, an unterminated quote or a missing header.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::string& path);
std::string render_csv(const CsvTable& table);
// Creates parent directories. Throws IoError when the file cannot be written.
void write_csv(const std::string& path, const CsvTable& table);

// 17 significant digits, so a parse of the text reproduces the double.
std::string format_double(double v);
// Strict: the whole field must be a finite number. Throws DataError naming
// row and column otherwise.
double parse_double(std::string_view field, std::size_t row, std::string_view column);

// Selected columns as a row-major matrix.
Matrix to_matrix(const CsvTable& table, const std::vector<std::size_t>& columns);
// Adds the columns of m under the given names to a table with m.rows() rows
// (or to an empty table).
void append_columns(CsvTable& table, const Matrix& m, const std::vector<std::string>& names);

// Paired-modality data. Columns named a_* form modality a, b_* modality b,
// c_* optional precomputed shared features; the label column is optional.
// Generator output (x1..x6, c1, c2) loads as modality a = x*, shared = c*.
struct CsvDataset {
  Matrix modality_a;
  std::optional<Matrix> modality_b;
  std::optional<Matrix> shared;
  std::optional<std::vector<std::string>> labels;
  std::vector<std::string> a_columns;
  std::vector<std::string> b_columns;
};

// Throws DataError on empty fields, non-numeric cells or no modality columns.
CsvDataset load_dataset(const std::string& path, const std::string& label_column = "label");
CsvDataset dataset_from_table(const CsvTable& table, const std::string& label_column = "label");

void write_text(const std::string& path, std::string_view text);
std::string read_text(const std::string& path);

}  // namespace disentangle::io
