#ifndef LCLAVG_H
#define LCLAVG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define LCLAVG_OK 0

#define LCLAVG_ERR_NULL -1

#define LCLAVG_ERR_INVALID_ARGUMENT -2

#define LCLAVG_ERR_SOLVER -3

#define LCLAVG_ERR_BUFFER_TOO_SMALL -4

#define LCLAVG_ERR_PANIC -5

#define LCLAVG_FAMILY_PATH 0

#define LCLAVG_FAMILY_COMPLETE 1

#define LCLAVG_FAMILY_RANDOM 2

#define LCLAVG_FAMILY_HIER 3

#define LCLAVG_PROBLEM_3COL 0

#define LCLAVG_PROBLEM_2HALF 1

#define LCLAVG_SOLVER_DET_AVG 0

#define LCLAVG_SOLVER_RAND_AVG 1

#define LCLAVG_SOLVER_BASELINE 2

#define LCLAVG_SOLVER_DIAM_ORACLE 3

/**
 * Opaque result of one solve.
 */
typedef struct LclavgRun LclavgRun;

/**
 * Opaque tree handle.
 */
typedef struct LclavgTree LclavgTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *lclavg_status_message(int32_t status);

/**
 * Generates a tree of the family with about `n` nodes. `k` is used by the
 * hierarchical family, the random family caps degrees at 4.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
int32_t lclavg_tree_generate(int32_t family_code,
                             uintptr_t n,
                             uint64_t seed,
                             uintptr_t k,
                             struct LclavgTree **out);

/**
 * Builds a tree from `edge_count` pairs stored flat in `edges`
 * (`u0 v0 u1 v1 ...`).
 *
 * # Safety
 * `edges` must point to `2 * edge_count` readable values (it may be null
 * when `edge_count` is 0) and `out` must be valid for a pointer write.
 */
int32_t lclavg_tree_from_edges(uintptr_t n,
                               const uint32_t *edges,
                               uintptr_t edge_count,
                               struct LclavgTree **out);

/**
 * Number of nodes, or 0 for a null handle.
 *
 * # Safety
 * `tree` must be null or a live handle from this library.
 */
uintptr_t lclavg_tree_node_count(const struct LclavgTree *tree);

/**
 * # Safety
 * `tree` must be null or a live handle from this library, not used
 * afterwards.
 */
void lclavg_tree_free(struct LclavgTree *tree);

/**
 * Solves `problem_code` on `tree` with `solver_code`. IDs and random coins
 * derive from `seed`. A run whose output the checker rejects still
 * succeeds; query it with `lclavg_run_checker_ok`.
 *
 * # Safety
 * `tree` must be a live handle and `out` valid for a pointer write.
 */
int32_t lclavg_solve(const struct LclavgTree *tree,
                     int32_t problem_code,
                     int32_t solver_code,
                     uint64_t seed,
                     uintptr_t ell,
                     uintptr_t k,
                     struct LclavgRun **out);

/**
 * Node-averaged termination round.
 *
 * # Safety
 * `run` must be a live handle and `avg` valid for a write.
 */
int32_t lclavg_run_avg_rounds(const struct LclavgRun *run, double *avg);

/**
 * Last termination round over all nodes.
 *
 * # Safety
 * `run` must be a live handle and `max` valid for a write.
 */
int32_t lclavg_run_max_rounds(const struct LclavgRun *run, uint64_t *max);

/**
 * Writes 1 if the checker accepted the output, else 0.
 *
 * # Safety
 * `run` must be a live handle and `ok` valid for a write.
 */
int32_t lclavg_run_checker_ok(const struct LclavgRun *run, int32_t *ok);

/**
 * Decomposition iterations (or `k` for the 2½-coloring) and randomized
 * compress fallbacks.
 *
 * # Safety
 * `run` must be a live handle; both out-pointers valid for writes.
 */
int32_t lclavg_run_stats(const struct LclavgRun *run, uintptr_t *iterations, uintptr_t *failures);

/**
 * Copies the per-node termination rounds into `buf`. `len` must be at
 * least the node count; `written` receives the node count either way.
 *
 * # Safety
 * `run` must be a live handle, `buf` writable for `len` values (or null
 * with `len` 0), `written` null or valid for a write.
 */
int32_t lclavg_run_termination_rounds(const struct LclavgRun *run,
                                      uint64_t *buf,
                                      uintptr_t len,
                                      uintptr_t *written);

/**
 * # Safety
 * `run` must be null or a live handle, not used afterwards.
 */
void lclavg_run_free(struct LclavgRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LCLAVG_H */
