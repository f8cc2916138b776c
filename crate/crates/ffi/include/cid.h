#ifndef CID_H
#define CID_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum CidStatus {
  CID_STATUS_OK = 0,
  CID_STATUS_NULL_POINTER = 1,
  CID_STATUS_INVALID_INPUT = 2,
  CID_STATUS_DIMENSION_MISMATCH = 3,
  CID_STATUS_INDEX_OUT_OF_RANGE = 4,
  CID_STATUS_PARSE = 5,
  CID_STATUS_IO = 6,
  CID_STATUS_SERIALIZATION = 7,
  CID_STATUS_PANIC = 8,
} CidStatus;

// Opaque point cloud.
typedef struct CidCloud CidCloud;

// Opaque exact nearest-neighbour index over a cloud.
typedef struct CidIndex CidIndex;

// Pipeline settings. A negative `merge_iterations` and a NaN
// `merge_threshold` both mean "not set"; when both are set the iteration
// count wins.
typedef struct CidRunConfig {
  size_t subsample_size;
  size_t k_seeds;
  size_t m_discretization;
  size_t group_cap;
  int64_t merge_iterations;
  double merge_threshold;
  uint64_t rng_seed;
} CidRunConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library defaults: 20000-point subsample, 100 seeds, 100 segment samples,
// 32 points per group, no merging, seed 0.
struct CidRunConfig cid_run_config_default(void);

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL, or 0
// when there is none.
size_t cid_last_error_message(char *buf, size_t len);

// Builds a cloud from `n` points of `dim` (2 or 3) interleaved coordinates.
enum CidStatus cid_cloud_new(const double *coords, size_t n, uint32_t dim, struct CidCloud **out);

// Attaches ground-truth labels; either array may be null.
enum CidStatus cid_cloud_set_labels(struct CidCloud *cloud,
                                    const int32_t *semantic,
                                    const int32_t *instance,
                                    size_t n);

// Reads a PLY or whitespace text scene.
enum CidStatus cid_cloud_read(const char *path, struct CidCloud **out);

// Generates a labelled synthetic scene (`l_shape`, `four_arcs`, `two_planes`
// or `box_room`). A non-positive `density` selects the scene default.
enum CidStatus cid_cloud_synth(const char *scene,
                               double density,
                               uint64_t rng_seed,
                               struct CidCloud **out);

// Number of points, or 0 for a null handle.
size_t cid_cloud_len(const struct CidCloud *cloud);

// Copies the coordinates of point `i` (always 3 values, z = 0 in 2D).
enum CidStatus cid_cloud_point(const struct CidCloud *cloud, size_t i, double *xyz);

void cid_cloud_free(struct CidCloud *cloud);

enum CidStatus cid_index_build(const struct CidCloud *cloud, struct CidIndex **out);

void cid_index_free(struct CidIndex *index);

// Exact distance from `q` to the nearest indexed point.
enum CidStatus cid_point_distance(const struct CidIndex *index,
                                  const double *q,
                                  uint32_t dim,
                                  double *out);

// CID between points `a` and `b` with `m` segment samples.
enum CidStatus cid_p(const struct CidIndex *index,
                     const double *a,
                     const double *b,
                     uint32_t dim,
                     size_t m,
                     double *out);

// CID farthest point sampling. Writes `k` point indices, in selection order,
// into `seeds_out`.
enum CidStatus cid_fps(const struct CidCloud *cloud,
                       const struct CidIndex *index,
                       size_t k,
                       size_t m,
                       uint64_t rng_seed,
                       size_t *seeds_out);

// Ground-truth seeded segmentation. Writes one predicted label pair per
// point (`n` = cloud length) and `[ap25, ap50, ap75]` into `ap_out`; any
// output pointer may be null.
enum CidStatus cid_segment(const struct CidCloud *cloud,
                           const struct CidRunConfig *config,
                           int32_t *semantic_out,
                           int32_t *instance_out,
                           double *ap_out);

// Seeds, merges and groups the full cloud. Writes a group id per point into
// `group_of_out` (may be null), the group count, and the purity (NaN when
// the cloud has no instance labels).
enum CidStatus cid_abstract(const struct CidCloud *cloud,
                            const struct CidRunConfig *config,
                            size_t *group_of_out,
                            size_t *group_count_out,
                            double *purity_out);

// Segmentation report as JSON. The string must be released with
// [`cid_string_free`].
enum CidStatus cid_segment_report_json(const struct CidCloud *cloud,
                                       const struct CidRunConfig *config,
                                       char **json_out);

void cid_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CID_H */
