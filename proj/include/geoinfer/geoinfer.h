#ifndef GEOINFER_GEOINFER_H
#define GEOINFER_GEOINFER_H

/* C interface to the geoinfer library.
 *
 * All handles are opaque and must be released with the matching _free
 * function. Functions returning geoinfer_status set a thread-local error
 * message readable via geoinfer_last_error(). Strings returned through
 * char** out-parameters are heap-allocated and must be released with
 * geoinfer_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GEOINFER_API __declspec(dllexport)
#else
#define GEOINFER_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum geoinfer_status {
  GEOINFER_OK = 0,
  GEOINFER_ERR_ARGUMENT = 1, /* bad parameter or configuration value */
  GEOINFER_ERR_DATA = 2,     /* unusable input data or model state */
  GEOINFER_ERR_INTERNAL = 3  /* unexpected failure */
} geoinfer_status;

typedef struct geoinfer_config geoinfer_config;
typedef struct geoinfer_corpus geoinfer_corpus;
typedef struct geoinfer_partition geoinfer_partition;
typedef struct geoinfer_bundle geoinfer_bundle;

typedef struct geoinfer_leaf_info {
  int32_t leaf_id;
  int32_t depth;
  int64_t count;
  double min_lat;
  double max_lat;
  double min_lon;
  double max_lon;
  double centroid_lat;
  double centroid_lon;
} geoinfer_leaf_info;

typedef struct geoinfer_ingest_report {
  int64_t read;
  int64_t parsed;
  int64_t malformed;
  int64_t deduped;
  int64_t kept;
} geoinfer_ingest_report;

GEOINFER_API const char* geoinfer_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
GEOINFER_API const char* geoinfer_last_error(void);

GEOINFER_API void geoinfer_string_free(char* s);

/* --- configuration ------------------------------------------------------ */

GEOINFER_API geoinfer_config* geoinfer_config_new(void);
GEOINFER_API void geoinfer_config_free(geoinfer_config* cfg);
GEOINFER_API geoinfer_status geoinfer_config_set(geoinfer_config* cfg, const char* key,
                                                 const char* value);
GEOINFER_API geoinfer_status geoinfer_config_load_file(geoinfer_config* cfg,
                                                       const char* path);
GEOINFER_API geoinfer_status geoinfer_config_fingerprint(const geoinfer_config* cfg,
                                                         char** out);

/* --- corpus ------------------------------------------------------------- */

GEOINFER_API geoinfer_status geoinfer_corpus_load(const geoinfer_config* cfg,
                                                  const char* path,
                                                  geoinfer_corpus** out);
GEOINFER_API void geoinfer_corpus_free(geoinfer_corpus* corpus);
GEOINFER_API geoinfer_status geoinfer_corpus_report(const geoinfer_corpus* corpus,
                                                    geoinfer_ingest_report* out);
GEOINFER_API int64_t geoinfer_corpus_size(const geoinfer_corpus* corpus);

/* --- spatial partition --------------------------------------------------- */

GEOINFER_API geoinfer_status geoinfer_partition_build(const geoinfer_corpus* corpus,
                                                      const geoinfer_config* cfg,
                                                      geoinfer_partition** out);
GEOINFER_API void geoinfer_partition_free(geoinfer_partition* partition);
GEOINFER_API int32_t geoinfer_partition_leaf_count(const geoinfer_partition* partition);
GEOINFER_API geoinfer_status geoinfer_partition_leaf_info(
    const geoinfer_partition* partition, int32_t leaf_id, geoinfer_leaf_info* out);
/* Leaf containing the point; fails with GEOINFER_ERR_DATA outside the root box. */
GEOINFER_API geoinfer_status geoinfer_partition_locate(const geoinfer_partition* partition,
                                                       double lat, double lon,
                                                       int32_t* out_leaf);
/* Like locate, but points outside the root map to the nearest leaf centroid. */
GEOINFER_API geoinfer_status geoinfer_partition_locate_nearest(
    const geoinfer_partition* partition, double lat, double lon, int32_t* out_leaf);
GEOINFER_API geoinfer_status geoinfer_partition_geojson(const geoinfer_partition* partition,
                                                        const char* fingerprint, char** out);

/* --- trained model bundle ------------------------------------------------ */

GEOINFER_API geoinfer_status geoinfer_bundle_train(const geoinfer_corpus* corpus,
                                                   const geoinfer_config* cfg,
                                                   geoinfer_bundle** out);
GEOINFER_API geoinfer_status geoinfer_bundle_save(const geoinfer_bundle* bundle,
                                                  const char* path);
GEOINFER_API geoinfer_status geoinfer_bundle_load(const char* path, geoinfer_bundle** out);
GEOINFER_API void geoinfer_bundle_free(geoinfer_bundle* bundle);
/* Predicts a location for one text; *out receives a JSON object string. */
GEOINFER_API geoinfer_status geoinfer_bundle_predict_json(const geoinfer_bundle* bundle,
                                                          const char* text, char** out);

/* --- whole-pipeline commands (write artifacts into config "out_dir") ----- */

GEOINFER_API geoinfer_status geoinfer_run_partition(const geoinfer_config* cfg,
                                                    geoinfer_ingest_report* out);
GEOINFER_API geoinfer_status geoinfer_run_train(const geoinfer_config* cfg,
                                                geoinfer_ingest_report* out);
GEOINFER_API geoinfer_status geoinfer_run_evaluate(const geoinfer_config* cfg,
                                                   geoinfer_ingest_report* out);

/* --- utilities ----------------------------------------------------------- */

/* Great-circle distance in kilometers; NaN if either point is invalid. */
GEOINFER_API double geoinfer_haversine_km(double lat1, double lon1, double lat2,
                                          double lon2);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GEOINFER_GEOINFER_H */
