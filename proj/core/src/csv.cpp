#include "qlp/csv.hpp"

#include <charconv>
#include <sstream>

#include "qlp/errors.hpp"

namespace qlp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  return cells;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorKind::Io, "CSV column '" + name + "' not found");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, "empty CSV " + path.string());
  table.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size())
      throw Error(ErrorKind::Io, path.string() + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(table.header.size()) + " columns");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw Error(ErrorKind::Io, path.string() + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header)
    : CsvWriter(path, std::vector<std::string>(header)) {}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), width_(header.size()) {
  if (!out_) throw Error(ErrorKind::Io, "cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
  row(std::span<const double>(values.begin(), values.size()));
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != width_) throw Error(ErrorKind::InvalidArgument, "CSV row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
  out_ << '\n';
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw Error(ErrorKind::InvalidArgument, "CSV row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
}

}  // namespace qlp
