#include "chaoskit/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "chaoskit/error.hpp"

namespace chaoskit {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw DomainError("csv: empty header");
}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size())
    throw DomainError("csv: row has " + std::to_string(row.size()) + " cells, header has " +
                      std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto put_line = [&out](const auto& cells, auto render) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += render(cells[i]);
    }
    out += '\n';
  };
  put_line(header_, [](const std::string& s) { return s; });
  for (const auto& r : rows_)
    put_line(r, [](const Cell& c) {
      if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
      if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
      return std::get<std::string>(c);
    });
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::vector<std::vector<double>> read_csv_numeric(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw LoadError("csv", "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool ok = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || errno == ERANGE) {
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) {
      if (first) {
        first = false;
        continue;
      }
      throw LoadError("csv", path.string() + ":" + std::to_string(lineno) + ": non-numeric cell");
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw LoadError("csv", path.string() + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace chaoskit
