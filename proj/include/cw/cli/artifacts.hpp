#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cw::cli {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double x);

/// RFC-4180 CSV built in memory: comma separated, LF line endings, fields
/// quoted only when they contain a comma, quote, CR or LF.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row();
  CsvTable& cell(std::string_view text);
  CsvTable& cell(double x);
  CsvTable& cell(std::int64_t x);
  CsvTable& cell(std::uint64_t x);
  CsvTable& cell(int x) { return cell(static_cast<std::int64_t>(x)); }

  std::string str() const;

 private:
  std::size_t columns_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> header_;
};

/// Git blob id: SHA-1 of "blob <size>\0" followed by the content.
std::string git_blob_sha1(std::string_view content);

/// Output directory with a manifest. Artifacts are written as they are added;
/// finish() writes manifest.json, the only file carrying a timestamp.
class ArtifactSink {
 public:
  ArtifactSink(std::filesystem::path dir, std::string subcommand, std::map<std::string, std::string> config);

  void write_text(const std::string& name, const std::string& content);
  void write_csv(const std::string& name, const CsvTable& table) { write_text(name, table.str()); }
  /// JSON artifact; the resolved config is embedded under "config".
  void write_json(const std::string& name, Json body);
  /// "CWPS", uint32 version 1, uint64 count, then count int64 values, all little-endian.
  void write_positions(const std::string& name, const std::vector<std::int64_t>& positions);

  void finish();

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string subcommand_;
  std::map<std::string, std::string> config_;
  std::vector<std::pair<std::string, std::string>> hashes_;
};

}  // namespace cw::cli
