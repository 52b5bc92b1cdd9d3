#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace qlp {

/// Numeric CSV with a single header line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws Io if absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Shortest round-trippable decimal form, so outputs are byte-stable.
std::string format_number(double value);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header);
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(std::initializer_list<double> values);
  void row(std::span<const double> values);
  /// Mixed numeric/text row; entries are written verbatim.
  void row_text(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace qlp
