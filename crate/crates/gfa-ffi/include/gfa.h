#ifndef GFA_H
#define GFA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum GfaStatus {
  GFA_STATUS_OK = 0,
  /**
   * A pointer was null or a parameter was out of range.
   */
  GFA_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Growth gave up (stall cap exhausted or a launch failed outright).
   */
  GFA_STATUS_GROWTH_ABORTED = 2,
  /**
   * The filesystem said no.
   */
  GFA_STATUS_IO_ERROR = 3,
  /**
   * The potential/dimension combination is not defined.
   */
  GFA_STATUS_UNSUPPORTED = 4,
  /**
   * A panic was caught at the boundary; state may be stale, message set.
   */
  GFA_STATUS_INTERNAL_ERROR = 5,
} GfaStatus;

/**
 * A grown or loaded particle cluster. Opaque: create with `gfa_grow` or
 * `gfa_cluster_read_csv`, inspect with the accessors, destroy with
 * `gfa_cluster_free`.
 */
typedef struct GfaCluster GfaCluster;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on the calling thread. Never null;
 * empty before the first failure. The pointer stays valid until the next
 * failing call on the same thread.
 */
const char *gfa_last_error(void);

/**
 * Grow a cluster of `n` particles from a single seed at the origin.
 * `alpha`: 0 selects the logarithmic potential, a positive real the
 * inverse-power potential, +infinity the nearest-particle maximum.
 * `dim` is 2 or 3 (3D supports alpha = 1 and +infinity). On success
 * `*out` owns the cluster; free it with `gfa_cluster_free`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum GfaStatus gfa_grow(double alpha,
                        uint32_t dim,
                        uintptr_t n,
                        uint64_t seed,
                        struct GfaCluster **out);

/**
 * Load a cluster from CSV (`id,x,y[,z],parent,order`); the dimension comes
 * from the header. On success `*out` owns the cluster.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum GfaStatus gfa_cluster_read_csv(const char *path, struct GfaCluster **out);

/**
 * Write a cluster as CSV.
 *
 * # Safety
 * `cluster` must come from this library and be live; `path` must be a
 * NUL-terminated string.
 */
enum GfaStatus gfa_cluster_write_csv(const struct GfaCluster *cluster, const char *path);

/**
 * Number of particles; 0 if `cluster` is null.
 *
 * # Safety
 * `cluster` must be null or a live handle from this library.
 */
uintptr_t gfa_cluster_len(const struct GfaCluster *cluster);

/**
 * Ambient dimension (2 or 3); 0 if `cluster` is null.
 *
 * # Safety
 * `cluster` must be null or a live handle from this library.
 */
uint32_t gfa_cluster_dim(const struct GfaCluster *cluster);

/**
 * Largest pairwise distance; 0 for singletons and null handles.
 *
 * # Safety
 * `cluster` must be null or a live handle from this library.
 */
double gfa_cluster_diameter(const struct GfaCluster *cluster);

/**
 * Copy particle positions into `out` as row-major doubles
 * (`len * dim` values). `cap` is the capacity of `out` in doubles.
 *
 * # Safety
 * `out` must point to at least `cap` writable doubles.
 */
enum GfaStatus gfa_cluster_positions(const struct GfaCluster *cluster, double *out, uintptr_t cap);

/**
 * Parent id of particle `id`, or -1 for roots, out-of-range ids, and null
 * handles.
 *
 * # Safety
 * `cluster` must be null or a live handle from this library.
 */
int64_t gfa_cluster_parent(const struct GfaCluster *cluster, uintptr_t id);

/**
 * Monte Carlo attachment probabilities: launches `samples` flows at the
 * cluster and writes one probability per particle into `out` (`cap` is the
 * capacity in doubles, at least the particle count). `workers` = 0 uses the
 * shared thread pool; results are identical for every worker count.
 *
 * # Safety
 * `cluster` must be a live handle; `out` must point to `cap` writable
 * doubles.
 */
enum GfaStatus gfa_hit_probabilities(const struct GfaCluster *cluster,
                                     double alpha,
                                     uint64_t samples,
                                     uint64_t seed,
                                     uintptr_t workers,
                                     double *out,
                                     uintptr_t cap);

/**
 * Destroy a cluster handle. Null is a no-op. The handle must not be used
 * afterwards.
 *
 * # Safety
 * `cluster` must be null or an owned handle not freed before.
 */
void gfa_cluster_free(struct GfaCluster *cluster);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GFA_H */
