#include "csvio.hpp"

#include <iomanip>
#include <sstream>

namespace rcc {

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header,
                     const std::string& comment) {
  out_.open(path);
  require(out_.good(), "csv: cannot open " + path + " for writing",
          ErrorCode::Io);
  if (!comment.empty()) out_ << "# " << comment << "\n";
  for (size_t i = 0; i < header.size(); ++i)
    out_ << header[i] << (i + 1 < header.size() ? "," : "");
  out_ << "\n";
  out_ << std::setprecision(17);
}

void CsvWriter::row(const std::vector<double>& values) {
  for (size_t i = 0; i < values.size(); ++i)
    out_ << values[i] << (i + 1 < values.size() ? "," : "");
  out_ << "\n";
}

void CsvWriter::row_raw(const std::string& line) { out_ << line << "\n"; }

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "csv: cannot open " + path, ErrorCode::Io);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ss, cell, ',')) table.header.push_back(cell);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::Io, "csv: non-numeric cell in " + path);
      }
    }
    if (!row.empty()) table.rows.push_back(std::move(row));
  }
  require(have_header, "csv: " + path + " has no header row", ErrorCode::Io);
  return table;
}

void write_dat(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows,
               const std::string& comment) {
  std::ofstream out(path);
  require(out.good(), "dat: cannot open " + path + " for writing",
          ErrorCode::Io);
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "#";
  for (const auto& hcol : header) out << " " << hcol;
  out << "\n" << std::setprecision(17);
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? " " : "");
    out << "\n";
  }
}

}  // namespace rcc
