#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace waveqed {

/// Column-oriented CSV writer with stable "%.12g" formatting, UTF-8, LF.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> columns);

    void add_row(const std::vector<double>& values);
    void add_raw_row(const std::vector<std::string>& fields);

    /// Serialized file contents (header + rows).
    std::string str() const;
    void write(const std::string& path) const;

    static std::string format(double v);

  private:
    std::vector<std::string> columns_;
    std::vector<std::string> rows_;
};

/// FNV-1a 64-bit content hash, hex-encoded; used for manifest bookkeeping.
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::string fnv1a64_hex(const std::string& bytes);
std::string hash_file(const std::string& path);

}  // namespace waveqed
