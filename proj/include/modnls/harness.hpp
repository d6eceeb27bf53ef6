#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modnls {

/// Flat key-value configuration. Text form is one `key = value` per line;
/// blank lines and lines starting with '#' are ignored.
class Config {
 public:
  Config() = default;
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& file);

  void set(const std::string& key, const std::string& value);
  /// "key=value"
  void apply_override(std::string_view assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Reals accept a trailing "pi" factor ("16pi", "0.5pi", "pi").
double parse_real(std::string_view text);

struct CampaignInfo {
  std::string name;
  std::string summary;
};

/// algebra, holder, propagator-growth, product-decomp, embeddings, peetre,
/// nls-solve, existence-scan, lipschitz.
const std::vector<CampaignInfo>& campaigns();

/// Every accepted key with its default value.
Config campaign_defaults(std::string_view name);

struct ResultRecord {
  std::string campaign;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;  // resolved, including defaults
  std::map<std::string, double> metrics;
  std::map<std::string, double> thresholds;   // every value that gates pass
  std::vector<std::string> artifacts;
  bool pass = false;
  std::string error;  // downstream failure, empty on success

  std::string to_json() const;
};

/// Validates config against the campaign schema (unknown keys or malformed
/// values throw ErrorCode::schema), runs it, and writes record.json, CSV files
/// and plot.gp into out_dir. Downstream errors are captured with pass = false.
ResultRecord run_campaign(std::string_view name, const Config& config, std::uint64_t seed,
                          const std::filesystem::path& out_dir);

}  // namespace modnls
