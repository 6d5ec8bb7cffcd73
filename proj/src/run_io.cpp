#include "aiig/run_io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace aiig {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  // %.17g round-trips every double; trim to the shortest exact form.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns)
    : os_(path), path_(path), columns_(std::move(columns)) {
  if (!os_) throw std::runtime_error("cannot open for writing: " + path.string());
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    os_ << columns_[i] << (i + 1 < columns_.size() ? "," : "\n");
  }
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_.size()) {
    throw std::invalid_argument("CSV row width " + std::to_string(cells.size()) +
                                " != header width " + std::to_string(columns_.size()) + " in " +
                                path_.string());
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::visit(
        [this](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::string>) {
            os_ << v;
          } else if constexpr (std::is_same_v<T, double>) {
            os_ << format_double(v);
          } else {
            os_ << v;
          }
        },
        cells[i]);
    os_ << (i + 1 < cells.size() ? "," : "\n");
  }
}

void CsvWriter::flush() { os_.flush(); }

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

double CsvTable::as_double(std::size_t row, int col) const {
  const std::string& cell = rows.at(row).at(static_cast<std::size_t>(col));
  if (cell.empty()) return std::nan("");
  return std::stod(cell);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open CSV: " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (first) {
      table.columns = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

std::string sha1_hex(const void* data, std::size_t len) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
  if (EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data, len) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &digest_len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("SHA-1 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(digest_len * 2);
  for (unsigned int i = 0; i < digest_len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha1_hex_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for hashing: " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  const std::string bytes = buf.str();
  return sha1_hex(bytes.data(), bytes.size());
}

void write_manifest(const std::filesystem::path& manifest_path,
                    const std::filesystem::path& root,
                    const std::vector<std::filesystem::path>& files) {
  std::ofstream os(manifest_path);
  if (!os) throw std::runtime_error("cannot open manifest: " + manifest_path.string());
  os << "aiig-manifest 1\n";
  for (const auto& rel : files) {
    os << sha1_hex_file(root / rel) << "  " << rel.generic_string() << '\n';
  }
}

std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path,
                                         const std::filesystem::path& root) {
  std::ifstream is(manifest_path);
  if (!is) throw std::runtime_error("cannot open manifest: " + manifest_path.string());
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "aiig-manifest" || version != 1) {
    throw std::runtime_error(manifest_path.string() + " is not a recognized manifest");
  }
  std::vector<std::string> problems;
  std::string digest, rel;
  while (is >> digest >> rel) {
    const std::filesystem::path p = root / rel;
    if (!std::filesystem::exists(p)) {
      problems.push_back(rel + ": missing");
    } else if (sha1_hex_file(p) != digest) {
      problems.push_back(rel + ": digest mismatch");
    }
  }
  return problems;
}

}  // namespace aiig
