#pragma once

// Plain CSV tables with %.17g numbers and '\n' line endings.

#include <filesystem>
#include <string>
#include <vector>

namespace spme {

std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  std::string to_string() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace spme
