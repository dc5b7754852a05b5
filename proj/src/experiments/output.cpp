#include "wavemgt/experiments/output.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "wavemgt/error.hpp"

namespace wavemgt::experiments {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw NumericalError("to_chars failed");
  return std::string(buf.data(), ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& values) {
  if (values.size() != header_.size()) {
    throw PreconditionError("CSV row width does not match the header");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) body_ += ',';
    body_ += format_double(values[i]);
  }
  body_ += '\n';
  ++rows_;
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ',';
    out += header_[i];
  }
  out += '\n';
  return out + body_;
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw NumericalError("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return hex.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

}  // namespace

RunDirectory::RunDirectory(fs::path dir, nlohmann::json config_echo)
    : dir_(std::move(dir)), config_(std::move(config_echo)), started_(utc_now()) {
  fs::create_directories(dir_);
}

void RunDirectory::write(const std::string& name, const std::string& content) {
  write_atomic(dir_ / name, content);
  files_.emplace_back(name, sha256_hex(content));
}

void RunDirectory::write_json(const std::string& name, const nlohmann::json& doc) {
  write(name, doc.dump(2) + "\n");
}

void RunDirectory::finish(const std::string& status) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, digest] : files_) {
    files.push_back({{"name", name}, {"sha256", digest}});
  }
  const nlohmann::json manifest = {{"artifact_version", kArtifactVersion},
                                   {"config", config_},
                                   {"started", started_},
                                   {"finished", utc_now()},
                                   {"status", status},
                                   {"files", files}};
  write_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<std::string> verify_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ValidationError("no manifest.json in '" + dir.string() + "'");
  const auto manifest = nlohmann::json::parse(in);
  std::vector<std::string> bad;
  for (const auto& f : manifest.at("files")) {
    const auto name = f.at("name").get<std::string>();
    const fs::path p = dir / name;
    if (!fs::exists(p) || sha256_file(p) != f.at("sha256").get<std::string>()) bad.push_back(name);
  }
  return bad;
}

}  // namespace wavemgt::experiments
