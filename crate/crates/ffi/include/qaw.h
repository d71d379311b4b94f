#ifndef QAW_H
#define QAW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QawMethod {
  QAW_METHOD_CIRCLE = 0,
  QAW_METHOD_CIRCLE_PLUS_TAIL = 1,
  QAW_METHOD_RESIDUE_FULL = 2,
  QAW_METHOD_RESIDUE_REDUCED = 3,
  QAW_METHOD_CLOSED_FORM = 4,
} QawMethod;

typedef enum QawStatus {
  QAW_STATUS_OK = 0,
  QAW_STATUS_NULL_POINTER = 1,
  QAW_STATUS_INVALID_INPUT = 2,
  QAW_STATUS_POLE_PROXIMITY = 3,
  QAW_STATUS_THETA_ZERO = 4,
  QAW_STATUS_DIVERGENCE = 5,
  QAW_STATUS_NO_CONVERGENCE = 6,
  QAW_STATUS_UNSUPPORTED_DOMAIN = 7,
  QAW_STATUS_DEGENERATE = 8,
  QAW_STATUS_PANIC = 9,
} QawStatus;

/**
 * Opaque q and tolerance settings.
 */
typedef struct QawContext QawContext;

/**
 * Opaque parameter set (N, a_1..a_2N) bound to a context.
 */
typedef struct QawParams QawParams;

/**
 * Result of `qaw_eval`.
 */
typedef struct QawIntegral {
  double value_re;
  double value_im;
  double est_error;
  uintptr_t nodes_or_terms;
  bool tail_omitted;
} QawIntegral;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a context for base q = q_re + i q_im. `eps <= 0` keeps the default.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QawStatus qaw_context_new(double q_re, double q_im, double eps, struct QawContext **out);

/**
 * # Safety
 * `ctx` must come from `qaw_context_new` and not have been freed. Null is a no-op.
 */
void qaw_context_free(struct QawContext *ctx);

/**
 * Creates a parameter set from `len = 2n` complex values. With `continued`
 * set, parameters outside the unit disc are accepted and their poles are
 * picked up as residues.
 *
 * # Safety
 * `a_re` and `a_im` must each point to `len` doubles; `ctx` must be live.
 */
enum QawStatus qaw_params_new(const struct QawContext *ctx,
                              uintptr_t n,
                              const double *a_re,
                              const double *a_im,
                              uintptr_t len,
                              bool continued,
                              struct QawParams **out);

/**
 * # Safety
 * `p` must come from `qaw_params_new` and not have been freed. Null is a no-op.
 */
void qaw_params_free(struct QawParams *p);

/**
 * Evaluates I_N by `method`.
 *
 * # Safety
 * `p` must be live and `out` writable.
 */
enum QawStatus qaw_eval(const struct QawParams *p, enum QawMethod method, struct QawIntegral *out);

/**
 * theta(z; q) = (z;q)_inf (q/z;q)_inf.
 *
 * # Safety
 * `ctx` must be live; `out_re` and `out_im` writable.
 */
enum QawStatus qaw_theta(const struct QawContext *ctx,
                         double z_re,
                         double z_im,
                         double *out_re,
                         double *out_im);

/**
 * (a; q)_inf.
 *
 * # Safety
 * `ctx` must be live; `out_re` and `out_im` writable.
 */
enum QawStatus qaw_qpoch_inf(const struct QawContext *ctx,
                             double a_re,
                             double a_im,
                             double *out_re,
                             double *out_im);

/**
 * Static description of a status code.
 */
const char *qaw_status_message(enum QawStatus s);

/**
 * Message of the last failed call on this thread, empty if none. Valid
 * until the next failing call on the same thread.
 */
const char *qaw_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QAW_H */
