#ifndef STEMCALYX_H
#define STEMCALYX_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SC_BUILDING_LIBRARY)
#    define SC_API __declspec(dllexport)
#  else
#    define SC_API __declspec(dllimport)
#  endif
#else
#  define SC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sc_status {
  SC_OK = 0,
  SC_ERR_PARAMETER = 1,
  SC_ERR_FORMAT = 2,
  SC_ERR_IO = 3,
  SC_ERR_EMPTY_REGION = 4,
  SC_ERR_DEGENERATE = 5,
  SC_ERR_NUMERICAL = 6,
  SC_ERR_TRAINING = 7,
  SC_ERR_GENERATION = 8,
  SC_ERR_INTERNAL = 9
} sc_status;

typedef enum sc_split {
  SC_SPLIT_TRAIN = 0,
  SC_SPLIT_TEST = 1,
  SC_SPLIT_ALL = 2
} sc_split;

typedef enum sc_sweep_axis {
  SC_SWEEP_FOURIER_K = 0,
  SC_SWEEP_TRAIN_FRACTION = 1
} sc_sweep_axis;

typedef struct sc_config sc_config;
typedef struct sc_image sc_image;
typedef struct sc_model sc_model;

typedef void (*sc_log_fn)(const char* message, void* user);

SC_API const char* sc_version(void);
SC_API const char* sc_status_string(sc_status status);
/* Message of the last failure on the calling thread; "" when none. */
SC_API const char* sc_last_error(void);

/* Configuration with every tunable at its default. */
SC_API sc_status sc_config_new(sc_config** out);
SC_API void sc_config_free(sc_config* config);
SC_API sc_status sc_config_load(sc_config* config, const char* path);
SC_API sc_status sc_config_save(const sc_config* config, const char* path);
SC_API sc_status sc_config_set(sc_config* config, const char* key, const char* value);
/* Copies the value (NUL terminated) into buf; *needed receives the full size
   including the terminator, so a call with cap 0 queries the length. */
SC_API sc_status sc_config_get(const sc_config* config, const char* key, char* buf, size_t cap, size_t* needed);
SC_API void sc_config_set_log(sc_config* config, sc_log_fn fn, void* user);

SC_API sc_status sc_image_load(const char* path, sc_image** out);
SC_API void sc_image_free(sc_image* image);
SC_API sc_status sc_image_size(const sc_image* image, int* width, int* height, int* channels);

/* Detection on a loaded image; *count receives the number of candidates. */
SC_API sc_status sc_detect(const sc_config* config, const sc_image* image, size_t* count);
SC_API sc_status sc_detect_file(const sc_config* config, const char* image_path, const char* out_dir,
                                size_t* count);
SC_API sc_status sc_detect_manifest(const sc_config* config, const char* manifest_path, const char* out_dir,
                                    size_t* count);

SC_API sc_status sc_extract(const sc_config* config, const char* candidates_dir, const char* out_csv,
                            size_t* rows, size_t* skipped);
/* Fused descriptor of one mask file; *len receives the vector length and
   values are written when cap is large enough. */
SC_API sc_status sc_extract_mask(const sc_config* config, const char* mask_path, double* values, size_t cap,
                                 size_t* len);

/* When model_path is not NULL the model and a config echo are written there. */
SC_API sc_status sc_model_train(const sc_config* config, const char* const* feature_csvs, size_t n_csvs,
                                sc_split split, const char* model_path, sc_model** out);
SC_API sc_status sc_model_load(const char* path, sc_model** out);
SC_API sc_status sc_model_save(const sc_model* model, const char* path);
SC_API void sc_model_free(sc_model* model);
/* *accuracy, when not NULL, receives the overall accuracy in percent. */
SC_API sc_status sc_model_evaluate(const sc_model* model, const sc_config* config, const char* const* feature_csvs,
                                   size_t n_csvs, sc_split split, const char* report_path, const char* csv_path,
                                   double* accuracy);
SC_API sc_status sc_model_predict(const sc_model* model, const sc_config* config, const char* const* feature_csvs,
                                  size_t n_csvs, const char* out_csv, size_t* rows);

/* accuracies receives 9 percentages, row-major [svm, knn, ldc][MD, MD+RD, MD+RD+FD]. */
SC_API sc_status sc_compare_fusions(const sc_config* config, const char* const* feature_csvs, size_t n_csvs,
                                    const char* report_path, const char* csv_path, double* accuracies);
SC_API sc_status sc_sweep(const sc_config* config, const char* const* feature_csvs, size_t n_csvs,
                          sc_sweep_axis axis, const double* grid, size_t n_grid, const char* out_csv);

SC_API sc_status sc_synth(const sc_config* config, int n_per_class, uint64_t seed, const char* out_dir,
                          size_t* scenes);

#ifdef __cplusplus
}
#endif

#endif
