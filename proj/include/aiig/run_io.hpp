#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace aiig {

// Double formatting used in every CSV so reruns of the same binary produce
// byte-identical files (shortest round-trip representation).
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns);

  using Cell = std::variant<std::string, double, long, int>;
  void row(const std::vector<Cell>& cells);
  void flush();
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::ofstream os_;
  std::filesystem::path path_;
  std::vector<std::string> columns_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const;  // -1 when absent
  double as_double(std::size_t row, int col) const;
};

CsvTable read_csv(const std::filesystem::path& path);

// --- Integrity manifest ---

std::string sha1_hex(const void* data, std::size_t len);
std::string sha1_hex_file(const std::filesystem::path& path);

// "aiig-manifest 1" header then one "<sha1>  <relative path>" line per file.
void write_manifest(const std::filesystem::path& manifest_path,
                    const std::filesystem::path& root,
                    const std::vector<std::filesystem::path>& files);

// Returns mismatched or missing files (empty = everything verifies).
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path,
                                         const std::filesystem::path& root);

}  // namespace aiig
