#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "modnls/modnls.h"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

int report(int status, const char* context) {
  std::fprintf(stderr, "%s: %s: %s\n", context, modnls_status_name(status), modnls_last_error());
  return kExitUsage;
}

int list_campaigns() {
  for (size_t i = 0; i < modnls_campaign_count(); ++i)
    std::printf("%-18s %s\n", modnls_campaign_name(i), modnls_campaign_summary(i));
  return 0;
}

int show_defaults(const std::string& name) {
  modnls_config* cfg = nullptr;
  if (const int st = modnls_config_defaults(name.c_str(), &cfg); st != MODNLS_OK)
    return report(st, "defaults");
  std::fputs(modnls_config_text(cfg), stdout);
  modnls_config_destroy(cfg);
  return 0;
}

int run(const std::string& name, const std::string& config_file,
        const std::vector<std::string>& overrides, const std::string& out, std::uint64_t seed) {
  modnls_config* cfg = nullptr;
  if (const int st = modnls_config_create(&cfg); st != MODNLS_OK) return report(st, "config");
  int st = MODNLS_OK;
  if (!config_file.empty()) st = modnls_config_load(cfg, config_file.c_str());
  for (const auto& kv : overrides)
    if (st == MODNLS_OK) st = modnls_config_set(cfg, kv.c_str());
  modnls_record* rec = nullptr;
  if (st == MODNLS_OK) st = modnls_campaign_run(name.c_str(), cfg, seed, out.c_str(), &rec);
  modnls_config_destroy(cfg);
  if (st != MODNLS_OK) return report(st, name.c_str());

  std::puts(modnls_record_json(rec));
  const bool pass = modnls_record_pass(rec) != 0;
  if (*modnls_record_error(rec)) std::fprintf(stderr, "%s: %s\n", name.c_str(), modnls_record_error(rec));
  std::fprintf(stderr, "%s: %s\n", name.c_str(), pass ? "PASS" : "FAIL");
  modnls_record_destroy(rec);
  return pass ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modulation-space norms, Schroedinger propagator and cubic NLS verification campaigns"};
  app.require_subcommand(1);

  app.add_subcommand("list", "List campaigns");

  auto* defaults = app.add_subcommand("defaults", "Print the default configuration of a campaign");
  std::string defaults_name;
  defaults->add_option("campaign", defaults_name)->required();

  auto* run_cmd = app.add_subcommand("run", "Run one campaign");
  std::string name, config_file, out = "out";
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  run_cmd->add_option("campaign", name, "Campaign name")->required();
  run_cmd->add_option("--config", config_file, "key = value file")->check(CLI::ExistingFile);
  run_cmd->add_option("--set", overrides, "Override key=value")->take_all();
  run_cmd->add_option("--out", out, "Output directory");
  run_cmd->add_option("--seed", seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (app.got_subcommand("list")) return list_campaigns();
  if (app.got_subcommand("defaults")) return show_defaults(defaults_name);
  return run(name, config_file, overrides, out, seed);
}
