#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "types.hpp"

namespace rcc {

// Comma CSV with an optional leading '#' comment (used to embed the resolved
// run configuration) and a header row.
class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header,
            const std::string& comment = "");
  void row(const std::vector<double>& values);
  void row_raw(const std::string& line);

private:
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path);

// whitespace-separated table for gnuplot, '#'-prefixed header
void write_dat(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows,
               const std::string& comment = "");

}  // namespace rcc
