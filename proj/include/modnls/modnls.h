#ifndef MODNLS_MODNLS_H
#define MODNLS_MODNLS_H

/* C interface to the modnls core. Every fallible call returns a status code
 * (MODNLS_OK on success); the message of the most recent failure on the
 * calling thread is available from modnls_last_error(). Handles are opaque
 * and owned by the caller, who releases them with the matching destroy call.
 * Exponents are passed as text: "1", "4/3", "inf". */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  MODNLS_OK = 0,
  MODNLS_E_INVALID_ARGUMENT = 1,
  MODNLS_E_DIMENSION_MISMATCH = 2,
  MODNLS_E_ZERO_NORM = 3,
  MODNLS_E_HYPOTHESIS_VIOLATION = 4,
  MODNLS_E_SUPPORT_VIOLATION = 5,
  MODNLS_E_UNRESOLVED_CELL = 6,
  MODNLS_E_CUTOFF_EXCEEDED = 7,
  MODNLS_E_SPECTRAL_OVERFLOW = 8,
  MODNLS_E_SPEC_MISMATCH = 9,
  MODNLS_E_UNDERSAMPLED_STFT = 10,
  MODNLS_E_DOMAIN_TOO_SMALL = 11,
  MODNLS_E_NOT_CONVERGED = 12,
  MODNLS_E_SCHEMA = 13,
  MODNLS_E_IO = 14,
  MODNLS_E_INTERNAL = 99
};

enum { MODNLS_FOCUSING = 1, MODNLS_DEFOCUSING = -1 };

enum {
  MODNLS_PICARD_CONVERGED = 0,
  MODNLS_PICARD_MAX_ITER = 1,
  MODNLS_PICARD_DIVERGED = 2,
  MODNLS_PICARD_SPECTRAL_OVERFLOW = 3
};

typedef struct modnls_grid modnls_grid;
typedef struct modnls_field modnls_field;
typedef struct modnls_basis modnls_basis;
typedef struct modnls_picard modnls_picard;
typedef struct modnls_config modnls_config;
typedef struct modnls_record modnls_record;

const char* modnls_last_error(void);
const char* modnls_status_name(int status);

/* Periodic grid on [-length/2, length/2)^d with n points per axis. */
int modnls_grid_create(int d, double length, int n, modnls_grid** out);
void modnls_grid_destroy(modnls_grid* grid);
size_t modnls_grid_size(const modnls_grid* grid);

/* Samples are interleaved (re, im) pairs, 2 * grid size doubles, row-major. */
int modnls_field_create(const modnls_grid* grid, const double* samples, size_t count,
                        modnls_field** out);
int modnls_field_gaussian(const modnls_grid* grid, modnls_field** out);
int modnls_field_samples(const modnls_field* field, double* samples, size_t count);
size_t modnls_field_size(const modnls_field* field);
void modnls_field_destroy(modnls_field* field);

/* cutoff 0 selects the default lattice cutoff of the grid. */
int modnls_basis_create(const modnls_grid* grid, int cutoff, modnls_basis** out);
void modnls_basis_destroy(modnls_basis* basis);

int modnls_mod_norm(const modnls_basis* basis, const modnls_field* field, const char* p,
                    const char* q, double s, double* out);
int modnls_evolve(const modnls_field* field, double t, modnls_field** out);

/* steps, tol and max_iter <= 0 select the defaults (64, 1e-10, 100). */
int modnls_picard_solve(const modnls_basis* basis, const modnls_field* u0, double horizon, int sign,
                        const char* p, const char* q, double s, int steps, double tol,
                        int max_iter, modnls_picard** out);
int modnls_picard_status(const modnls_picard* run);
int modnls_picard_iterations(const modnls_picard* run);
double modnls_picard_defect(const modnls_picard* run);
double modnls_picard_max_factor(const modnls_picard* run);
/* Field at node j of the returned solution; fails when no solution exists. */
int modnls_picard_node(const modnls_picard* run, size_t node, modnls_field** out);
/* JSON summary; the pointer stays valid until the next call on run or its destruction. */
const char* modnls_picard_json(modnls_picard* run, uint64_t seed);
void modnls_picard_destroy(modnls_picard* run);

size_t modnls_campaign_count(void);
const char* modnls_campaign_name(size_t index);
const char* modnls_campaign_summary(size_t index);

int modnls_config_create(modnls_config** out);
/* Every accepted key of the campaign with its default value. */
int modnls_config_defaults(const char* campaign, modnls_config** out);
int modnls_config_parse(modnls_config* config, const char* text);
int modnls_config_load(modnls_config* config, const char* path);
/* "key=value" */
int modnls_config_set(modnls_config* config, const char* assignment);
/* `key = value` lines; valid until the next call on config or its destruction. */
const char* modnls_config_text(modnls_config* config);
void modnls_config_destroy(modnls_config* config);

/* Schema violations return MODNLS_E_SCHEMA without a record. Downstream
 * failures return MODNLS_OK with a record whose pass flag is 0. */
int modnls_campaign_run(const char* name, const modnls_config* config, uint64_t seed,
                        const char* out_dir, modnls_record** out);
int modnls_record_pass(const modnls_record* record);
const char* modnls_record_json(const modnls_record* record);
const char* modnls_record_error(const modnls_record* record);
void modnls_record_destroy(modnls_record* record);

#ifdef __cplusplus
}
#endif

#endif
