#ifndef FLOQUET_RABI_H
#define FLOQUET_RABI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FrStatus {
  FR_STATUS_OK = 0,
  FR_STATUS_NULL_POINTER = 1,
  FR_STATUS_INVALID_CONFIG = 2,
  FR_STATUS_SOLVER = 3,
  FR_STATUS_BUFFER_TOO_SMALL = 4,
  FR_STATUS_PANIC = 5,
} FrStatus;

typedef enum FrWaveform {
  FR_WAVEFORM_SINE = 0,
  FR_WAVEFORM_SAWTOOTH = 1,
  FR_WAVEFORM_TOPHAT = 2,
} FrWaveform;

// A solved Floquet problem: dressed basis, quasienergies and modes.
typedef struct FrFloquet FrFloquet;

// A validated model.
typedef struct FrModel FrModel;

// Model parameters; energies in units of the cavity frequency.
typedef struct FrParams {
  double omega_c;
  double omega_a;
  double eta0;
  double eta_m;
  double omega_m;
  double gamma;
  size_t n_fock;
  size_t n_j;
  size_t m_max;
  size_t l_max;
  enum FrWaveform waveform;
} FrParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *fr_version(void);

// Copies the calling thread's last error message into `buf` (truncated, NUL
// terminated) and returns the full message length, 0 if there was none.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t fr_last_error(char *buf, size_t len);

// Fills `out` with the documented defaults.
//
// # Safety
// `out` must be null or point to writable memory for one `FrParams`.
enum FrStatus fr_params_default(struct FrParams *out);

// Validates `params` and creates a model handle.
//
// # Safety
// `params` must point to an `FrParams`; `out` must be writable.
enum FrStatus fr_model_new(const struct FrParams *params, struct FrModel **out);

// # Safety
// `model` must be null or a handle from [`fr_model_new`] not yet freed.
void fr_model_free(struct FrModel *model);

// Lowest `n_j` eigenvalues of the period-averaged Hamiltonian.
//
// # Safety
// `model` must be a live handle; `out` must hold `len` doubles; `written` may be null.
enum FrStatus fr_model_static_energies(const struct FrModel *model,
                                       double *out,
                                       size_t len,
                                       size_t *written);

// Solves the Floquet problem of `model`.
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum FrStatus fr_floquet_new(const struct FrModel *model, struct FrFloquet **out);

// # Safety
// `floquet` must be null or a handle from [`fr_floquet_new`] not yet freed.
void fr_floquet_free(struct FrFloquet *floquet);

// Quasienergies in the first zone, ascending.
//
// # Safety
// `floquet` must be a live handle; `out` must hold `len` doubles; `written` may be null.
enum FrStatus fr_floquet_quasienergies(const struct FrFloquet *floquet,
                                       double *out,
                                       size_t len,
                                       size_t *written);

// Steady-state period averages of the cavity and atom excitation numbers
// for the system prepared in the static ground state.
//
// # Safety
// `floquet` must be a live handle; `n_cav` and `n_tls` must be writable.
enum FrStatus fr_floquet_mean_excitations(const struct FrFloquet *floquet,
                                          double *n_cav,
                                          double *n_tls);

// Photon number of the undriven Rabi ground state at coupling `params->eta0`.
//
// # Safety
// `params` must point to an `FrParams`; `out` must be writable.
enum FrStatus fr_virtual_photons(const struct FrParams *params, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOQUET_RABI_H */
