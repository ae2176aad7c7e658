/* franson: Franson-interferometry simulation and coincidence analysis.
 *
 * C interface to the shared library. All entry points return a status code;
 * on failure franson_last_error() carries a human-readable message for the
 * calling thread. Strings returned through char** are heap-allocated and must
 * be released with franson_string_free().
 */
#ifndef FRANSON_H
#define FRANSON_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FRANSON_API __declspec(dllexport)
#else
#define FRANSON_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum franson_status {
    FRANSON_OK = 0,
    FRANSON_ERROR_INVALID_ARGUMENT = 1,
    FRANSON_ERROR_REGIME = 2,
    FRANSON_ERROR_IO = 3,
    FRANSON_ERROR_INTERNAL = 4
} franson_status;

/* Opaque experiment configuration handle. */
typedef struct franson_config franson_config;

FRANSON_API const char* franson_version(void);
FRANSON_API const char* franson_status_name(franson_status status);
/* Message for the most recent failure on this thread; "" if none. */
FRANSON_API const char* franson_last_error(void);

/* Configuration ----------------------------------------------------------- */

FRANSON_API franson_config* franson_config_create(void);
FRANSON_API void franson_config_destroy(franson_config* cfg);
FRANSON_API franson_status franson_config_load(franson_config* cfg, const char* path);
FRANSON_API franson_status franson_config_save(const franson_config* cfg, const char* path);
FRANSON_API franson_status franson_config_set(franson_config* cfg, const char* key,
                                              const char* value);
FRANSON_API franson_status franson_config_get(const franson_config* cfg, const char* key,
                                              char* buffer, size_t size);
/* 16 lowercase hex digits identifying the experiment content. */
FRANSON_API franson_status franson_config_hash(const franson_config* cfg, char* buffer,
                                               size_t size);
/* Newline-separated "name<TAB>type<TAB>default<TAB>doc" rows, one per key. */
FRANSON_API const char* franson_config_keys(void);

/* Pipelines ----------------------------------------------------------------
 * Each call mirrors one CLI subcommand and yields a JSON document. */

FRANSON_API franson_status franson_run_validate(const franson_config* cfg, char** json_out);

/* Writes tags_ch1..tags_ch4 in the configured tag_format under out_dir
 * (falls back to the configured out_dir when NULL). */
FRANSON_API franson_status franson_run_simulate(const franson_config* cfg, const char* out_dir,
                                                char** json_out);

/* tag_paths holds the four channel files in order ch1..ch4. The delay
 * histogram CSV is written to histogram_csv_path when non-NULL. */
FRANSON_API franson_status franson_run_coincide(const franson_config* cfg,
                                                const char* const tag_paths[4],
                                                const char* histogram_csv_path, char** json_out);

FRANSON_API franson_status franson_run_scan(const franson_config* cfg, const char* csv_path,
                                            char** json_out);

FRANSON_API franson_status franson_run_chsh(const franson_config* cfg, char** json_out);

/* Recombines four saved coincide JSON documents, term order
 * (a,b), (a,b'), (a',b), (a',b'); refuses mismatched config hashes. */
FRANSON_API franson_status franson_run_chsh_from_files(const franson_config* cfg,
                                                       const char* const coincide_json_paths[4],
                                                       char** json_out);

/* Analytic-vs-Monte-Carlo report. event_scan_csv may be NULL (fresh in-process
 * simulation) or name a previously written event-mode scan CSV, which must
 * carry the same config hash. */
FRANSON_API franson_status franson_run_compare(const franson_config* cfg,
                                               const char* event_scan_csv, char** json_out);

FRANSON_API void franson_string_free(char* s);

/* Stream helpers ------------------------------------------------------------
 * Operate on raw sorted int64 picosecond tag arrays. */

/* Greedy one-to-one windowed matching; count of matched pairs. */
FRANSON_API franson_status franson_match_coincidences(const int64_t* a, size_t a_len,
                                                      const int64_t* b, size_t b_len,
                                                      int64_t offset_ps, int64_t half_width_ps,
                                                      uint64_t* count_out);

/* All-pairs delay histogram of a[i]-b[j] over [-range, +range]. counts must
 * hold 2*range/bin_width entries; the bin count is returned via bins_out. */
FRANSON_API franson_status franson_delay_histogram(const int64_t* a, size_t a_len,
                                                   const int64_t* b, size_t b_len,
                                                   int64_t bin_width_ps, int64_t range_ps,
                                                   uint64_t* counts, size_t counts_len,
                                                   size_t* bins_out);

#ifdef __cplusplus
}
#endif

#endif /* FRANSON_H */
