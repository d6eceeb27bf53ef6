#include "modnls/modnls.h"

#include <new>
#include <optional>
#include <string>

#include "modnls/corpus.hpp"
#include "modnls/decomposition.hpp"
#include "modnls/error.hpp"
#include "modnls/harness.hpp"
#include "modnls/modnorm.hpp"
#include "modnls/nls_solver.hpp"
#include "modnls/propagator.hpp"

struct modnls_grid {
  modnls::GridSpec spec;
};
struct modnls_field {
  modnls::GridField field;
};
struct modnls_basis {
  modnls::DecompositionBasis basis;
};
struct modnls_picard {
  modnls::PicardRun run;
  std::string json;
};
struct modnls_config {
  modnls::Config config;
  std::string text;
};
struct modnls_record {
  modnls::ResultRecord record;
  std::string json;
};

namespace {

thread_local std::string last_error;

template <class F>
int guard(F&& body) {
  try {
    body();
    last_error.clear();
    return MODNLS_OK;
  } catch (const modnls::Error& e) {
    last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return MODNLS_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MODNLS_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  modnls::require(p != nullptr, modnls::ErrorCode::invalid_argument,
                  std::string("null ") + what);
}

modnls::NormParams params(int d, const char* p, const char* q, double s) {
  need(p, "p");
  need(q, "q");
  return modnls::NormParams{d, modnls::Exponent::parse(p), modnls::Exponent::parse(q), s};
}

}  // namespace

extern "C" {

const char* modnls_last_error(void) { return last_error.c_str(); }

const char* modnls_status_name(int status) {
  if (status == MODNLS_OK) return "ok";
  if (status == MODNLS_E_INTERNAL) return "internal";
  if (status >= MODNLS_E_INVALID_ARGUMENT && status <= MODNLS_E_IO)
    return modnls::error_code_name(static_cast<modnls::ErrorCode>(status));
  return "unknown";
}

int modnls_grid_create(int d, double length, int n, modnls_grid** out) {
  return guard([&] {
    need(out, "out");
    *out = new modnls_grid{modnls::GridSpec(d, 0.5 * length, n)};
  });
}

void modnls_grid_destroy(modnls_grid* grid) { delete grid; }

size_t modnls_grid_size(const modnls_grid* grid) { return grid ? grid->spec.size() : 0; }

int modnls_field_create(const modnls_grid* grid, const double* samples, size_t count,
                        modnls_field** out) {
  return guard([&] {
    need(grid, "grid");
    need(samples, "samples");
    need(out, "out");
    modnls::require(count == 2 * grid->spec.size(), modnls::ErrorCode::dimension_mismatch,
                    "sample count does not match the grid");
    std::vector<modnls::cplx> v(grid->spec.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = {samples[2 * i], samples[2 * i + 1]};
    *out = new modnls_field{modnls::GridField(grid->spec, std::move(v))};
  });
}

int modnls_field_gaussian(const modnls_grid* grid, modnls_field** out) {
  return guard([&] {
    need(grid, "grid");
    need(out, "out");
    *out = new modnls_field{modnls::unit_gaussian(grid->spec)};
  });
}

int modnls_field_samples(const modnls_field* field, double* samples, size_t count) {
  return guard([&] {
    need(field, "field");
    need(samples, "samples");
    const auto s = field->field.samples();
    modnls::require(count == 2 * s.size(), modnls::ErrorCode::dimension_mismatch,
                    "sample count does not match the field");
    for (std::size_t i = 0; i < s.size(); ++i) {
      samples[2 * i] = s[i].real();
      samples[2 * i + 1] = s[i].imag();
    }
  });
}

size_t modnls_field_size(const modnls_field* field) {
  return field ? field->field.samples().size() : 0;
}

void modnls_field_destroy(modnls_field* field) { delete field; }

int modnls_basis_create(const modnls_grid* grid, int cutoff, modnls_basis** out) {
  return guard([&] {
    need(grid, "grid");
    need(out, "out");
    *out = new modnls_basis{cutoff > 0 ? modnls::build_partition(grid->spec, cutoff)
                                       : modnls::build_partition(grid->spec)};
  });
}

void modnls_basis_destroy(modnls_basis* basis) { delete basis; }

int modnls_mod_norm(const modnls_basis* basis, const modnls_field* field, const char* p,
                    const char* q, double s, double* out) {
  return guard([&] {
    need(basis, "basis");
    need(field, "field");
    need(out, "out");
    *out = modnls::mod_norm(basis->basis, field->field,
                            params(basis->basis.spec().dim(), p, q, s));
  });
}

int modnls_evolve(const modnls_field* field, double t, modnls_field** out) {
  return guard([&] {
    need(field, "field");
    need(out, "out");
    *out = new modnls_field{modnls::evolve(t, field->field)};
  });
}

int modnls_picard_solve(const modnls_basis* basis, const modnls_field* u0, double horizon, int sign,
                        const char* p, const char* q, double s, int steps, double tol,
                        int max_iter, modnls_picard** out) {
  return guard([&] {
    need(basis, "basis");
    need(u0, "u0");
    need(out, "out");
    modnls::require(sign == MODNLS_FOCUSING || sign == MODNLS_DEFOCUSING,
                    modnls::ErrorCode::invalid_argument, "sign must be +1 or -1");
    modnls::PicardSettings settings;
    if (steps > 0) settings.steps = steps;
    if (tol > 0.0) settings.tol = tol;
    if (max_iter > 0) settings.max_iter = max_iter;
    auto run = modnls::picard_solve(u0->field, horizon, static_cast<modnls::Nonlinearity>(sign),
                                    basis->basis, params(basis->basis.spec().dim(), p, q, s),
                                    settings);
    *out = new modnls_picard{std::move(run), {}};
  });
}

int modnls_picard_status(const modnls_picard* run) {
  return run ? static_cast<int>(run->run.status) : -1;
}

int modnls_picard_iterations(const modnls_picard* run) { return run ? run->run.iterations : 0; }

double modnls_picard_defect(const modnls_picard* run) { return run ? run->run.defect : 0.0; }

double modnls_picard_max_factor(const modnls_picard* run) {
  return run ? run->run.max_factor() : 0.0;
}

int modnls_picard_node(const modnls_picard* run, size_t node, modnls_field** out) {
  return guard([&] {
    need(run, "run");
    need(out, "out");
    modnls::require(run->run.solution.has_value(), modnls::ErrorCode::not_converged,
                    "picard run holds no solution");
    const auto& fields = run->run.solution->fields;
    modnls::require(node < fields.size(), modnls::ErrorCode::invalid_argument,
                    "node index out of range");
    *out = new modnls_field{fields[node]};
  });
}

const char* modnls_picard_json(modnls_picard* run, uint64_t seed) {
  if (!run) return "";
  run->json = modnls::picard_run_json(run->run, seed);
  return run->json.c_str();
}

void modnls_picard_destroy(modnls_picard* run) { delete run; }

size_t modnls_campaign_count(void) { return modnls::campaigns().size(); }

const char* modnls_campaign_name(size_t index) {
  const auto& all = modnls::campaigns();
  return index < all.size() ? all[index].name.c_str() : nullptr;
}

const char* modnls_campaign_summary(size_t index) {
  const auto& all = modnls::campaigns();
  return index < all.size() ? all[index].summary.c_str() : nullptr;
}

int modnls_config_create(modnls_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new modnls_config{};
  });
}

int modnls_config_defaults(const char* campaign, modnls_config** out) {
  return guard([&] {
    need(campaign, "campaign");
    need(out, "out");
    *out = new modnls_config{modnls::campaign_defaults(campaign), {}};
  });
}

int modnls_config_parse(modnls_config* config, const char* text) {
  return guard([&] {
    need(config, "config");
    need(text, "text");
    const auto parsed = modnls::Config::parse(text);
    for (const auto& [k, v] : parsed.values()) config->config.set(k, v);
  });
}

int modnls_config_load(modnls_config* config, const char* path) {
  return guard([&] {
    need(config, "config");
    need(path, "path");
    const auto parsed = modnls::Config::load(path);
    for (const auto& [k, v] : parsed.values()) config->config.set(k, v);
  });
}

int modnls_config_set(modnls_config* config, const char* assignment) {
  return guard([&] {
    need(config, "config");
    need(assignment, "assignment");
    config->config.apply_override(assignment);
  });
}

const char* modnls_config_text(modnls_config* config) {
  if (!config) return "";
  config->text.clear();
  for (const auto& [k, v] : config->config.values()) config->text += k + " = " + v + "\n";
  return config->text.c_str();
}

void modnls_config_destroy(modnls_config* config) { delete config; }

int modnls_campaign_run(const char* name, const modnls_config* config, uint64_t seed,
                        const char* out_dir, modnls_record** out) {
  return guard([&] {
    need(name, "name");
    need(out_dir, "out_dir");
    need(out, "out");
    auto rec = modnls::run_campaign(name, config ? config->config : modnls::Config{}, seed,
                                    out_dir);
    std::string json = rec.to_json();
    *out = new modnls_record{std::move(rec), std::move(json)};
  });
}

int modnls_record_pass(const modnls_record* record) {
  return record && record->record.pass ? 1 : 0;
}

const char* modnls_record_json(const modnls_record* record) {
  return record ? record->json.c_str() : "";
}

const char* modnls_record_error(const modnls_record* record) {
  return record ? record->record.error.c_str() : "";
}

void modnls_record_destroy(modnls_record* record) { delete record; }

}  // extern "C"
