#ifndef SOCIALTIE_H
#define SOCIALTIE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StStatus {
  ST_STATUS_OK = 0,
  ST_STATUS_NULL_POINTER = 1,
  ST_STATUS_INVALID_ARGUMENT = 2,
  ST_STATUS_INVALID_UTF8 = 3,
  ST_STATUS_OUT_OF_RANGE = 4,
  ST_STATUS_GRAPH = 5,
  ST_STATUS_CLASSIFY = 6,
  ST_STATUS_METRICS = 7,
  ST_STATUS_IO = 8,
  ST_STATUS_PIPELINE = 9,
  ST_STATUS_PANIC = 10,
} StStatus;

typedef enum StClass {
  /**
   * Actor has no interactions.
   */
  ST_CLASS_NONE = -1,
  ST_CLASS_INNOCUOUS = 0,
  ST_CLASS_BROKERAGE = 1,
  ST_CLASS_CLOSURE = 2,
} StClass;

typedef enum StMethod {
  ST_METHOD_IQR = 0,
  ST_METHOD_MODIFIED_Z = 1,
} StMethod;

typedef enum StMetric {
  ST_METRIC_DEGREE = 0,
  ST_METRIC_CLOSENESS = 1,
  ST_METRIC_BETWEENNESS = 2,
  ST_METRIC_CLUSTERING = 3,
  ST_METRIC_PAGERANK = 4,
} StMetric;

typedef struct StClassification StClassification;

typedef struct StMetrics StMetrics;

typedef struct StNetwork StNetwork;

typedef struct StNetworkBuilder StNetworkBuilder;

/**
 * Per-class counts, indexed by `StClass` value.
 */
typedef struct StClassCounts {
  size_t counts[3];
  size_t total;
} StClassCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *st_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *st_version(void);

/**
 * Starts an empty network with `snapshots` snapshots.
 */
struct StNetworkBuilder *st_builder_new(size_t snapshots);

/**
 * Adds an interaction between actors `u` and `v` at 0-based `snapshot`
 * carrying `n_attrs` attribute names.
 *
 * # Safety
 * `b` must come from [`st_builder_new`]. `u` and `v` must be NUL-terminated
 * strings; `attrs` must point to `n_attrs` such strings (or be NULL when
 * `n_attrs` is 0).
 */
enum StStatus st_builder_add(struct StNetworkBuilder *b,
                             const char *u,
                             const char *v,
                             uint32_t snapshot,
                             const char *const *attrs,
                             size_t n_attrs);

/**
 * Consumes the builder and writes the finished network to `*net`. The
 * builder is freed whether or not the call succeeds.
 *
 * # Safety
 * `b` must come from [`st_builder_new`] and not be used afterwards.
 */
enum StStatus st_builder_build(struct StNetworkBuilder *b, struct StNetwork **net);

/**
 * # Safety
 * `b` must come from [`st_builder_new`] or be NULL.
 */
void st_builder_free(struct StNetworkBuilder *b);

/**
 * Loads `network.tsv` from a run directory.
 *
 * # Safety
 * `dir` must be a NUL-terminated path; `net` must be writable.
 */
enum StStatus st_network_load(const char *dir, struct StNetwork **net);

/**
 * # Safety
 * `net` must be a network handle or NULL.
 */
void st_network_free(struct StNetwork *net);

/**
 * # Safety
 * `net` must be a valid network handle.
 */
size_t st_network_actor_count(const struct StNetwork *net);

/**
 * # Safety
 * `net` must be a valid network handle.
 */
size_t st_network_instance_count(const struct StNetwork *net);

/**
 * # Safety
 * `net` must be a valid network handle.
 */
size_t st_network_snapshot_count(const struct StNetwork *net);

/**
 * Id of the actor called `name`.
 *
 * # Safety
 * `net` must be a valid handle, `name` NUL-terminated, `id` writable.
 */
enum StStatus st_network_actor_id(const struct StNetwork *net, const char *name, uint32_t *id);

/**
 * Endpoints and snapshot of instance `i`. Instances are ordered by
 * snapshot, ties in insertion order.
 *
 * # Safety
 * `net` must be a valid handle; output pointers must be writable.
 */
enum StStatus st_network_instance(const struct StNetwork *net,
                                  size_t i,
                                  uint32_t *u,
                                  uint32_t *v,
                                  uint32_t *snapshot);

/**
 * Extracts relevant attributes and labels every node and instance.
 * `method` is a [`StMethod`] value.
 *
 * # Safety
 * `net` must be a valid handle; `result` writable.
 */
enum StStatus st_classify(const struct StNetwork *net,
                          uint32_t method,
                          struct StClassification **result);

/**
 * # Safety
 * `result` must be a classification handle or NULL.
 */
void st_classification_free(struct StClassification *result);

/**
 * # Safety
 * `result` must be a valid handle; `class` writable.
 */
enum StStatus st_node_class(const struct StClassification *result,
                            uint32_t actor,
                            enum StClass *class_);

/**
 * Class of instance `i`, in the order of [`st_network_instance`].
 *
 * # Safety
 * `result` must be a valid handle; `class` writable.
 */
enum StStatus st_edge_class(const struct StClassification *result, size_t i, enum StClass *class_);

/**
 * # Safety
 * `result` must be a valid handle; `nodes` and `edges` writable.
 */
enum StStatus st_class_counts(const struct StClassification *result,
                              struct StClassCounts *nodes,
                              struct StClassCounts *edges);

/**
 * Structural metrics on the collapsed graph. `pivots` 0 means exact
 * betweenness; otherwise that many sampled sources drawn with `seed`.
 *
 * # Safety
 * `net` must be a valid handle; `metrics` writable.
 */
enum StStatus st_metrics_compute(const struct StNetwork *net,
                                 size_t pivots,
                                 uint64_t seed,
                                 struct StMetrics **metrics);

/**
 * # Safety
 * `metrics` must be a metrics handle or NULL.
 */
void st_metrics_free(struct StMetrics *metrics);

/**
 * Node metric of `actor`; `metric` is a [`StMetric`] value.
 *
 * # Safety
 * `metrics` must be a valid handle; `value` writable.
 */
enum StStatus st_metric_value(const struct StMetrics *metrics,
                              uint32_t metric,
                              uint32_t actor,
                              double *value);

/**
 * Runs the whole pipeline from a TOML config file into `out_dir`.
 * `exit_code` receives the code the command-line tool would return.
 *
 * # Safety
 * `config` and `out_dir` must be NUL-terminated paths; `exit_code` writable.
 */
enum StStatus st_run_config(const char *config, const char *out_dir, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOCIALTIE_H */
