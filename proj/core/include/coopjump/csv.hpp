#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coopjump {

// Numeric table with a header row.  Values are written with 17 significant
// digits so doubles round-trip exactly.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string format_full(double v);

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

}  // namespace coopjump
