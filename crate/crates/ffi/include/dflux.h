#ifndef DFLUX_H
#define DFLUX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum DfluxStatus {
  DFLUX_STATUS_OK = 0,
  DFLUX_STATUS_NULL_POINTER = 1,
  DFLUX_STATUS_INVALID_PARAMETER = 2,
  DFLUX_STATUS_CFL_VIOLATION = 3,
  DFLUX_STATUS_PARITY_MISMATCH = 4,
  DFLUX_STATUS_EMPTY_STATE = 5,
  DFLUX_STATUS_BUFFER_TOO_SMALL = 6,
  DFLUX_STATUS_INTERNAL = 7,
} DfluxStatus;

/*
 Time-stepping scheme.
 */
typedef enum DfluxScheme {
  DFLUX_SCHEME_LAX_FRIEDRICHS = 0,
  DFLUX_SCHEME_NESSYAHU_TADMOR = 1,
} DfluxScheme;

/*
 Flux model together with its spatial coefficient.
 */
typedef struct DfluxModel DfluxModel;

/*
 Cell averages at one time level.
 */
typedef struct DfluxState DfluxState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `cap`). Returns the full message length without the NUL,
 or 0 when no error has been recorded.

 # Safety
 `buf` must be null or point to `cap` writable bytes.
 */
uintptr_t dflux_last_error_message(char *buf, uintptr_t cap);

/*
 `f(k, u) = k u (1 - u)` with `k` jumping from `k_left` to `k_right` at `x = 0`.

 # Safety
 `out` must be a valid pointer to a handle slot.
 */
enum DfluxStatus dflux_model_multiplicative(double k_left, double k_right, struct DfluxModel **out);

/*
 Rational two-flux model switching at `x = 0`.

 # Safety
 `out` must be a valid pointer to a handle slot.
 */
enum DfluxStatus dflux_model_two_flux(struct DfluxModel **out);

/*
 Burgers flux `k u^2 / 2` with constant `k`.

 # Safety
 `out` must be a valid pointer to a handle slot.
 */
enum DfluxStatus dflux_model_burgers(double k, struct DfluxModel **out);

/*
 Supremum of `|f_u|` over the model's state box.

 # Safety
 `model` must be a live handle and `out` a valid pointer.
 */
enum DfluxStatus dflux_model_sup_fu(const struct DfluxModel *model, double *out);

/*
 Releases a model handle. Null is ignored.

 # Safety
 `model` must be null or a handle not yet freed.
 */
void dflux_model_free(struct DfluxModel *model);

/*
 State at `t = 0` on `n_cells` uniform cells of `[x_min, x_max]` with the
 given cell averages (`len` must equal `n_cells`).

 # Safety
 `model` must be a live handle, `values` must point to `len` doubles and
 `out` must be a valid pointer to a handle slot.
 */
enum DfluxStatus dflux_state_new(const struct DfluxModel *model,
                                 double x_min,
                                 double x_max,
                                 uintptr_t n_cells,
                                 const double *values,
                                 uintptr_t len,
                                 struct DfluxState **out);

/*
 Number of cells at the state's current parity.

 # Safety
 `state` must be null or a live handle.
 */
uintptr_t dflux_state_len(const struct DfluxState *state);

/*
 Simulated time of the state.

 # Safety
 `state` must be null or a live handle.
 */
double dflux_state_time(const struct DfluxState *state);

/*
 Copies the cell averages into `buf`. Fails with `BUFFER_TOO_SMALL` when
 `cap` is smaller than the cell count; `out_len` always receives the count.

 # Safety
 `state` must be a live handle, `buf` must point to `cap` writable doubles
 and `out_len` must be null or a valid pointer.
 */
enum DfluxStatus dflux_state_values(const struct DfluxState *state,
                                    double *buf,
                                    uintptr_t cap,
                                    uintptr_t *out_len);

/*
 Advances the state by one staggered step after checking the
 maximum-principle CFL condition.

 # Safety
 `state` and `model` must be live handles.
 */
enum DfluxStatus dflux_state_step(struct DfluxState *state,
                                  const struct DfluxModel *model,
                                  enum DfluxScheme scheme,
                                  double lambda);

/*
 Marches the state to `t_end` (snapped down to an even step count).
 The state is left unchanged on failure.

 # Safety
 `state` and `model` must be live handles.
 */
enum DfluxStatus dflux_state_march(struct DfluxState *state,
                                   const struct DfluxModel *model,
                                   enum DfluxScheme scheme,
                                   double lambda,
                                   double t_end);

/*
 Releases a state handle. Null is ignored.

 # Safety
 `state` must be null or a handle not yet freed.
 */
void dflux_state_free(struct DfluxState *state);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DFLUX_H */
