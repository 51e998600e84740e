/* C interface to the sparsedyn library. All functions are thread-safe with
 * respect to distinct handles; the last error message is per thread. */
#ifndef SPARSEDYN_H
#define SPARSEDYN_H

#include <stddef.h>

#if defined(_WIN32)
#define SD_API __declspec(dllexport)
#else
#define SD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sd_status {
  SD_OK = 0,
  SD_ERR_VALIDATION = 1, /* bad config, file, schema or argument */
  SD_ERR_NUMERICAL = 2,  /* divergence, undefined R^2, degenerate data, ... */
  SD_ERR_INTERNAL = 3    /* allocation failure or a bug */
} sd_status;

typedef struct sd_config sd_config;
typedef struct sd_dataset sd_dataset;
typedef struct sd_model sd_model;

SD_API const char* sd_version(void);

/* Message of the most recent failure on this thread ("" if none). */
SD_API const char* sd_last_error(void);
/* Error kind name of the most recent failure, e.g. "config error". */
SD_API const char* sd_last_error_kind(void);

/* Strings returned through char** outputs are owned by the caller. */
SD_API void sd_string_free(char* s);

/* Run configuration. */
SD_API sd_status sd_config_load(const char* path, sd_config** out);
SD_API sd_status sd_config_parse(const char* text, const char* source_name, sd_config** out);
/* Overrides a dotted key ("differentiation.reg") with a JSON literal ("0.01",
 * "\"tv\""). */
SD_API sd_status sd_config_set(sd_config* config, const char* dotted_key, const char* json_value);
SD_API void sd_config_free(sd_config* config);
/* Static text documenting every config key. */
SD_API const char* sd_config_help(void);

/* Pipeline commands. On success *summary (if non-null) receives the text
 * the CLI prints. */
SD_API sd_status sd_cmd_simulate(const sd_config* config, char** summary);
SD_API sd_status sd_cmd_fit(const sd_config* config, char** summary);
SD_API sd_status sd_cmd_evaluate(const sd_config* config, char** summary);
SD_API sd_status sd_cmd_compare(const sd_config* config, char** summary);
SD_API sd_status sd_cmd_render(const sd_config* config, char** summary);

/* Datasets. */
SD_API sd_status sd_dataset_load_csv(const char* path, const char* input_column, sd_dataset** out);
SD_API sd_status sd_dataset_shape(const sd_dataset* ds, size_t* rows, size_t* states);
SD_API void sd_dataset_free(sd_dataset* ds);

/* Models. */
SD_API sd_status sd_model_load(const char* path, sd_model** out);
SD_API sd_status sd_model_shape(const sd_model* model, size_t* terms, size_t* states);
/* Coefficient of library term `term` in state `state` (normalized units). */
SD_API sd_status sd_model_coefficient(const sd_model* model, size_t term, size_t state, double* out);
SD_API sd_status sd_model_render(const sd_model* model, char** text);
/* Row-major rows x states normalized derivative predictions; out_len must be
 * at least rows * states. */
SD_API sd_status sd_model_predict(const sd_model* model, const sd_dataset* ds, double* out, size_t out_len);
SD_API void sd_model_free(sd_model* model);

#ifdef __cplusplus
}
#endif

#endif
