#ifndef SPGG_H
#define SPGG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpggBehavior {
  SPGG_BEHAVIOR_DEFECTOR = 0,
  SPGG_BEHAVIOR_HYPOCRITICAL = 1,
  SPGG_BEHAVIOR_COOPERATOR = 2,
} SpggBehavior;

/**
 * Condition classification. For the two-order model `TOO_LOW` means
 * `alpha1 >= delta * beta1` and `TOO_HIGH` means `alpha2 >= beta2`.
 */
typedef enum SpggConditions {
  SPGG_CONDITIONS_SATISFIED = 0,
  SPGG_CONDITIONS_TOO_LOW = 1,
  SPGG_CONDITIONS_TOO_HIGH = 2,
  SPGG_CONDITIONS_BOTH_VIOLATED = 3,
} SpggConditions;

typedef enum SpggRule {
  SPGG_RULE_GREEDY = 0,
  /**
   * Uses the `p_greedy` argument.
   */
  SPGG_RULE_NOISY = 1,
  SPGG_RULE_NO_HYPOCRISY = 2,
} SpggRule;

typedef enum SpggStatus {
  SPGG_STATUS_OK = 0,
  SPGG_STATUS_NULL_POINTER = 1,
  SPGG_STATUS_INVALID_ARGUMENT = 2,
  SPGG_STATUS_INVALID_GRAPH = 3,
  SPGG_STATUS_GENERATION_FAILED = 4,
  SPGG_STATUS_OUT_OF_RANGE = 5,
  SPGG_STATUS_PANIC = 6,
} SpggStatus;

typedef enum SpggTermination {
  SPGG_TERMINATION_MAX_ROUNDS = 0,
  SPGG_TERMINATION_FIXED_POINT = 1,
  SPGG_TERMINATION_TWO_CYCLE = 2,
} SpggTermination;

/**
 * Opaque network handle.
 */
typedef struct SpggNetwork SpggNetwork;

/**
 * Opaque handle to the per-round counts of one run.
 */
typedef struct SpggTrace SpggTrace;

typedef struct SpggMetrics {
  size_t vertex_count;
  size_t edge_count;
  size_t diameter;
  size_t min_degree;
  bool bipartite;
  /**
   * Zero when the network is bipartite.
   */
  size_t odd_girth;
} SpggMetrics;

typedef struct SpggMainParams {
  double e_h;
  double rho_h;
  double rho_d;
} SpggMainParams;

typedef struct SpggTwoOrderParams {
  double alpha1;
  double alpha2;
  double beta1;
  double beta2;
} SpggTwoOrderParams;

typedef struct SpggCounts {
  size_t defectors;
  size_t hypocritical;
  size_t cooperators;
  size_t private_cooperators;
} SpggCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next `spgg_*` call on the same thread.
 */
const char *spgg_last_error(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum SpggStatus spgg_network_torus(size_t width, size_t height, struct SpggNetwork **out);

/**
 * Random `degree`-regular network on at most `n` vertices.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum SpggStatus spgg_network_random_regular(size_t n,
                                            size_t degree,
                                            uint64_t seed,
                                            struct SpggNetwork **out);

/**
 * Parses the `n m` header plus `u v` lines format.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` valid writable storage.
 */
enum SpggStatus spgg_network_from_edge_list(const char *text, struct SpggNetwork **out);

/**
 * # Safety
 * `network` must come from an `spgg_network_*` constructor and not have
 * been freed; null is ignored.
 */
void spgg_network_free(struct SpggNetwork *network);

/**
 * # Safety
 * `network` must be a live handle and `out` valid writable storage.
 */
enum SpggStatus spgg_network_metrics(const struct SpggNetwork *network, struct SpggMetrics *out);

/**
 * Degree of `vertex`.
 *
 * # Safety
 * `network` must be a live handle and `out` valid writable storage.
 */
enum SpggStatus spgg_network_degree(const struct SpggNetwork *network, size_t vertex, size_t *out);

/**
 * Samples an initial configuration and runs the main model. Seeding
 * matches `spgg simulate --seed`.
 *
 * # Safety
 * `network` must be a live handle, `params` readable and `out` writable.
 */
enum SpggStatus spgg_simulate_main(const struct SpggNetwork *network,
                                   const struct SpggMainParams *params,
                                   enum SpggRule rule,
                                   double p_greedy,
                                   double epsilon,
                                   uint64_t seed,
                                   size_t rounds,
                                   bool early_stop,
                                   struct SpggTrace **out);

/**
 * Samples an initial configuration and runs the two-order model.
 *
 * # Safety
 * `network` must be a live handle, `params` readable and `out` writable.
 */
enum SpggStatus spgg_simulate_two_order(const struct SpggNetwork *network,
                                        const struct SpggTwoOrderParams *params,
                                        double epsilon,
                                        uint64_t seed,
                                        size_t rounds,
                                        bool early_stop,
                                        struct SpggTrace **out);

/**
 * # Safety
 * `trace` must come from an `spgg_simulate_*` call and not have been
 * freed; null is ignored.
 */
void spgg_trace_free(struct SpggTrace *trace);

/**
 * Number of recorded rounds, including round 0; zero for a null handle.
 *
 * # Safety
 * `trace` must be null or a live handle.
 */
size_t spgg_trace_len(const struct SpggTrace *trace);

/**
 * # Safety
 * `trace` must be a live handle and `out` valid writable storage.
 */
enum SpggStatus spgg_trace_counts(const struct SpggTrace *trace,
                                  size_t round,
                                  struct SpggCounts *out);

/**
 * Writes the first round from which everyone cooperates and returns true,
 * or returns false if the run never settled on full cooperation.
 *
 * # Safety
 * `trace` must be null or a live handle; `round` may be null.
 */
bool spgg_trace_convergence_round(const struct SpggTrace *trace, size_t *round);

/**
 * Why the run stopped, and the round at which the cycle starts.
 *
 * # Safety
 * `trace` must be a live handle and `round` valid writable storage or null.
 */
enum SpggStatus spgg_trace_termination(const struct SpggTrace *trace,
                                       enum SpggTermination *out,
                                       size_t *round);

/**
 * Cost of `behavior` for a player with `k` non-defector neighbors.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum SpggStatus spgg_cost_main(enum SpggBehavior behavior,
                               size_t k,
                               const struct SpggMainParams *params,
                               double *out);

/**
 * Classifies `(1 - e_h) / delta < rho_h < rho_d - e_h`.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum SpggStatus spgg_check_main_conditions(const struct SpggMainParams *params,
                                           size_t delta,
                                           enum SpggConditions *out);

/**
 * Classifies `alpha2 < beta2` and `alpha1 < delta * beta1`.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum SpggStatus spgg_check_two_order_conditions(const struct SpggTwoOrderParams *params,
                                                size_t delta,
                                                enum SpggConditions *out);

/**
 * Main-model parameters equivalent to the two-order parameters.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum SpggStatus spgg_map_two_order_params(const struct SpggTwoOrderParams *params,
                                          struct SpggMainParams *out);

/**
 * Library version as a static nul-terminated string.
 */
const char *spgg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPGG_H */
