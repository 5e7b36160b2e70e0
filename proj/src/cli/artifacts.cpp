#include "cw/cli/artifacts.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

#include "cw/error.hpp"

namespace cw::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // folds -0
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()), header_(std::move(header)) {}

CsvTable& CsvTable::row() {
  if (!rows_.empty() && rows_.back().size() != columns_)
    throw Error("CSV row has " + std::to_string(rows_.back().size()) + " cells, expected " +
                std::to_string(columns_));
  rows_.emplace_back();
  return *this;
}

CsvTable& CsvTable::cell(std::string_view text) {
  rows_.back().emplace_back(text);
  return *this;
}
CsvTable& CsvTable::cell(double x) { return cell(std::string_view(format_number(x))); }
CsvTable& CsvTable::cell(std::int64_t x) { return cell(std::string_view(std::to_string(x))); }
CsvTable& CsvTable::cell(std::uint64_t x) { return cell(std::string_view(std::to_string(x))); }

namespace {

void append_field(std::string& out, const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    out += field;
    return;
  }
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

void append_line(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    append_field(out, fields[i]);
  }
  out += '\n';
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out += static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
}

}  // namespace

std::string CsvTable::str() const {
  std::string out;
  append_line(out, header_);
  for (const auto& r : rows_) {
    if (r.size() != columns_) throw Error("CSV row has the wrong number of cells");
    append_line(out, r);
  }
  return out;
}

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, digest.data(), &length);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 15];
  }
  return hex;
}

ArtifactSink::ArtifactSink(std::filesystem::path dir, std::string subcommand,
                           std::map<std::string, std::string> config)
    : dir_(std::move(dir)), subcommand_(std::move(subcommand)), config_(std::move(config)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
}

void ArtifactSink::write_text(const std::string& name, const std::string& content) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("cannot write " + path.string());
  hashes_.emplace_back(name, git_blob_sha1(content));
}

void ArtifactSink::write_json(const std::string& name, Json body) {
  Json doc;
  doc["subcommand"] = subcommand_;
  doc["config"] = config_;
  for (auto& [k, v] : body.items()) doc[k] = v;
  write_text(name, doc.dump(2) + "\n");
}

void ArtifactSink::write_positions(const std::string& name, const std::vector<std::int64_t>& positions) {
  std::string data = "CWPS";
  put_le<std::uint32_t>(data, 1);
  put_le<std::uint64_t>(data, positions.size());
  for (std::int64_t x : positions) put_le<std::uint64_t>(data, static_cast<std::uint64_t>(x));
  write_text(name, data);
}

void ArtifactSink::finish() {
  Json manifest;
  manifest["subcommand"] = subcommand_;
  manifest["timestamp"] = utc_timestamp();
  manifest["config"] = config_;
  Json files = Json::array();
  for (const auto& [name, hash] : hashes_) files.push_back({{"file", name}, {"git_blob_sha1", hash}});
  manifest["artifacts"] = files;
  const std::string text = manifest.dump(2) + "\n";
  std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write manifest.json");
}

}  // namespace cw::cli
