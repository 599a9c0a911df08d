#ifndef QOLLIDE_H
#define QOLLIDE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QollideStatus {
  QOLLIDE_STATUS_OK = 0,
  QOLLIDE_STATUS_NULL_POINTER = 1,
  QOLLIDE_STATUS_INVALID_ARGUMENT = 2,
  QOLLIDE_STATUS_INVALID_STATE = 3,
  QOLLIDE_STATUS_NUMERICAL = 4,
  QOLLIDE_STATUS_PANIC = 5,
} QollideStatus;

// Opaque bath description.
typedef struct QollideBath QollideBath;

typedef struct QollideParams {
  double g;
  double tau;
  double p;
  double omega0;
} QollideParams;

// Master-equation coefficients; λ = ⟨J₋⟩ and ε = ⟨J₋²⟩ split into parts.
typedef struct QollideCoefficients {
  double lambda_re;
  double lambda_im;
  double epsilon_re;
  double epsilon_im;
  double r_e;
  double r_d;
  double mu;
  double pg_tau;
} QollideCoefficients;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call into this library on the thread.
const char *qollide_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *qollide_version(void);

// g = 1, τ = 1/8, p = 64, ω₀ = 1, giving μ = 1.
struct QollideParams qollide_params_default(void);

// Product bath ⊗(p_g|g⟩⟨g| + p_e|e⟩⟨e|) of `n` qubits.
//
// # Safety
// `out` must be null or valid for writing one pointer.
enum QollideStatus qollide_bath_product(size_t n, double p_e, struct QollideBath **out);

// Thermally prepared block-diagonal bath with mean photon number `n_bar`.
//
// # Safety
// `out` must be null or valid for writing one pointer.
enum QollideStatus qollide_bath_thermal_hec(size_t n, double n_bar, struct QollideBath **out);

// Symmetric Dicke bath with `k` excitations.
//
// # Safety
// `out` must be null or valid for writing one pointer.
enum QollideStatus qollide_bath_dicke(size_t n, size_t k, struct QollideBath **out);

// Bath from an explicit density matrix given as row-major real and
// imaginary parts of length `len` = 4^n, in the excitation-sorted basis.
//
// # Safety
// `re` and `im` must be null or valid for reading `len` doubles; `out` must
// be null or valid for writing one pointer.
enum QollideStatus qollide_bath_explicit(size_t n,
                                         const double *re,
                                         const double *im,
                                         size_t len,
                                         struct QollideBath **out);

// Releases a bath handle. Null is ignored.
//
// # Safety
// `bath` must be null or a handle from a `qollide_bath_*` constructor that
// has not been freed.
void qollide_bath_free(struct QollideBath *bath);

// Number of qubits in the bath, or 0 for a null handle.
//
// # Safety
// `bath` must be null or a live handle.
size_t qollide_bath_qubits(const struct QollideBath *bath);

// Master-equation coefficients of a bath.
//
// # Safety
// `bath` must be null or a live handle; `params` null or readable; `out`
// null or writable.
enum QollideStatus qollide_coefficients(const struct QollideBath *bath,
                                        const struct QollideParams *params,
                                        struct QollideCoefficients *out);

// t_q = 1/(μ(r_e + r_d)); +∞ for an uncoupled qubit.
//
// # Safety
// `c` must be null or readable; `out` null or writable.
enum QollideStatus qollide_thermalization_time(const struct QollideCoefficients *c, double *out);

// Steady temperature −1/ln(r_e/r_d) in units of ħω₀/k_B.
//
// # Safety
// `c` must be null or readable; `out` null or writable.
enum QollideStatus qollide_steady_temperature(const struct QollideCoefficients *c, double *out);

// Steady temperature of a Dicke bath; `inverted` receives 1 when r_e > r_d.
//
// # Safety
// `out` must be null or writable; `inverted` may be null.
enum QollideStatus qollide_dicke_temperature(size_t n, size_t k, double *out, int32_t *inverted);

// Excited population at each of `len` times for a qubit starting in
// diag(rho_ee0, 1 − rho_ee0). Requires λ = ε = 0.
//
// # Safety
// `c` must be null or readable; `times` and `out_rho_ee` null or valid for
// `len` reads and writes respectively.
enum QollideStatus qollide_evolve_analytic(const struct QollideCoefficients *c,
                                           double rho_ee0,
                                           const double *times,
                                           size_t len,
                                           double *out_rho_ee);

// Temperature of a qubit starting in its ground state at each of `len`
// strictly increasing times. Requires r_e > 0.
//
// # Safety
// `c` must be null or readable; `times` and `out` null or valid for `len`
// reads and writes respectively.
enum QollideStatus qollide_temperature_trajectory(const struct QollideCoefficients *c,
                                                  const double *times,
                                                  size_t len,
                                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QOLLIDE_H */
