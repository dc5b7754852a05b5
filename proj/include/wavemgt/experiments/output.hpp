#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace wavemgt::experiments {

/// Shortest round-trip decimal form; locale independent.
std::string format_double(double v);

/// Column-oriented CSV builder with a fixed header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<double>& values);
  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
  [[nodiscard]] std::string str() const;

 private:
  std::vector<std::string> header_;
  std::string body_;
  std::size_t rows_ = 0;
};

/// Write to a sibling temporary and rename over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// One run's output directory. Every file goes through write(); finish()
/// writes manifest.json (config echo, version, wall times, status, digests).
class RunDirectory {
 public:
  RunDirectory(std::filesystem::path dir, nlohmann::json config_echo);

  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& doc);
  void finish(const std::string& status);

  [[nodiscard]] const std::filesystem::path& path() const { return dir_; }

 private:
  std::filesystem::path dir_;
  nlohmann::json config_;
  std::string started_;
  std::vector<std::pair<std::string, std::string>> files_;  // name, digest
};

/// Checks every digest listed in a manifest; returns the mismatching names.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

inline constexpr const char* kArtifactVersion = "1.0.0";

}  // namespace wavemgt::experiments
