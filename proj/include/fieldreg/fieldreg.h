/* C interface of the fieldreg shared library.
 *
 * Every handle is opaque and owned by the caller; release it with the
 * matching *_destroy function. Functions returning fr_status report the
 * failure reason through fr_last_error(), which is per thread. */
#ifndef FIELDREG_FIELDREG_H
#define FIELDREG_FIELDREG_H

#include <stddef.h>
#include <stdint.h>

#if defined(FIELDREG_BUILDING_LIBRARY)
#define FR_API __attribute__((visibility("default")))
#else
#define FR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status values double as process exit codes of the command-line tool. */
typedef enum fr_status {
  FR_OK = 0,
  FR_ERR_INTERNAL = 1,
  FR_ERR_INPUT = 2,          /* IO, parse, schema, invalid argument */
  FR_ERR_OVERLAP = 3,        /* insufficient overlap or correspondences */
  FR_ERR_SOLVER = 4,         /* rank deficiency, divergence */
  FR_ERR_VEGETATION = 5      /* vegetation filter left no points */
} fr_status;

typedef struct fr_config fr_config;
typedef struct fr_cloud fr_cloud;
typedef struct fr_result fr_result;

FR_API const char* fr_version(void);

/* Message of the last failed call on this thread, "" if none. */
FR_API const char* fr_last_error(void);

FR_API fr_status fr_config_create(fr_config** out);
/* Applies a key=value file on top of the current settings. */
FR_API fr_status fr_config_load(fr_config* config, const char* path);
FR_API fr_status fr_config_set(fr_config* config, const char* key, const char* value);
/* Writes every setting, keys sorted. */
FR_API fr_status fr_config_write(const fr_config* config, const char* path);
FR_API void fr_config_destroy(fr_config* config);

/* `path` names the .ply file; the .meta sidecar sits next to it. */
FR_API fr_status fr_cloud_load(const char* path, fr_cloud** out);
FR_API fr_status fr_cloud_save(const fr_cloud* cloud, const char* path);
FR_API size_t fr_cloud_size(const fr_cloud* cloud);
FR_API void fr_cloud_destroy(fr_cloud* cloud);

FR_API fr_status fr_register(const fr_config* config, const fr_cloud* aerial, const fr_cloud* ground,
                             fr_result** out);
/* Final affine, row-major. */
FR_API fr_status fr_result_matrix(const fr_result* result, double out[16]);
/* Loads a truth transform so that fr_result_write adds the metrics block. */
FR_API fr_status fr_result_set_truth(fr_result* result, const char* path);
FR_API fr_status fr_result_write(const fr_result* result, const char* path);
FR_API fr_status fr_result_dump_flow(const fr_result* result, const char* path);
FR_API fr_status fr_result_dump_correspondences(const fr_result* result, const char* path);
FR_API void fr_result_destroy(fr_result* result);

FR_API fr_status fr_generate(const char* spec_path, const char* out_dir, uint64_t seed);

/* Runs a sweep and writes the per-trial CSV to `csv_path` and the bucket
 * summary next to it (`<stem>.summary.csv`). `trials` <= 0 keeps the
 * suite's count; `threads` <= 0 reads FIELDREG_THREADS. `config` may be
 * NULL for defaults. */
FR_API fr_status fr_evaluate(const fr_config* config, const char* suite_path, const char* methods, int trials,
                             int threads, const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif
