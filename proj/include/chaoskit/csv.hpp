#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace chaoskit {

// Shortest round-trip-safe rendering: 17 significant digits.
std::string format_double(double v);

class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<Cell> row);  // throws DomainError on width mismatch
  std::size_t rows() const noexcept { return rows_.size(); }
  const std::vector<std::string>& header() const noexcept { return header_; }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Numeric rows of a CSV file; a non-numeric first line is treated as a header.
std::vector<std::vector<double>> read_csv_numeric(const std::filesystem::path& path);

}  // namespace chaoskit
