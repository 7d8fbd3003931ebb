#ifndef MOSIM_H
#define MOSIM_H

/* This file is generated by cbindgen from mosim-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every C-ABI call.
typedef enum MosimStatus {
  MosimStatus_Ok = 0,
  // A required pointer argument was null.
  MosimStatus_NullPointer = 1,
  // A string argument was not valid UTF-8.
  MosimStatus_InvalidUtf8 = 2,
  // The configuration document failed schema validation.
  MosimStatus_InvalidConfig = 3,
  // An argument was outside its domain (dimensions, parameters).
  MosimStatus_InvalidArgument = 4,
  // A numerical routine failed.
  MosimStatus_NumericalError = 5,
  // The requested quantity has no exact method for this model.
  MosimStatus_Unsupported = 6,
  // The provided output buffer is too small.
  MosimStatus_BufferTooSmall = 7,
  // An internal panic was caught at the boundary.
  MosimStatus_InternalPanic = 8,
} MosimStatus;

// Opaque handle to a validated simulation model.
typedef struct MosimModel MosimModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *mosim_version(void);

// Copies the most recent error message of this thread into `buffer`
// (NUL-terminated, truncated to `capacity`). Returns the full message
// length in bytes, excluding the NUL.
//
// # Safety
// `buffer` must point to `capacity` writable bytes (or be null to query
// the required length).
size_t mosim_last_error(char *buffer, size_t capacity);

// Parses a JSON model configuration into a model handle.
//
// On success writes the handle to `out_model`; free it with
// [`mosim_model_free`].
//
// # Safety
// `json` must be a NUL-terminated string; `out_model` must be a valid
// pointer to a pointer slot.
enum MosimStatus mosim_model_from_json(const char *json, struct MosimModel **out_model);

// Releases a model handle. Null is a no-op.
//
// # Safety
// `model` must come from [`mosim_model_from_json`] and not be freed twice.
void mosim_model_free(struct MosimModel *model);

// Writes the model dimension (number of components) to `out_dim`.
//
// # Safety
// `model` must be a live handle; `out_dim` must be writable.
enum MosimStatus mosim_model_dim(const struct MosimModel *model, uint32_t *out_dim);

// Evaluates the exact joint survival probability
// `P(tau_1 > times[0], …, tau_d > times[d-1])`.
//
// Returns `Unsupported` when the model admits no exact method (for example
// heterogeneous frailty triggers, or looping models off their grid).
//
// # Safety
// `times` must point to `num_times` readable doubles; `out_probability`
// must be writable.
enum MosimStatus mosim_survival(const struct MosimModel *model,
                                const double *times,
                                size_t num_times,
                                double *out_probability);

// Simulates `num_paths` independent paths and writes the default times
// path-major into `out_default_times` (`num_paths * dim` doubles).
// Components surviving the horizon are written as `INFINITY`. Identical
// `(configuration, seed)` pairs produce identical output.
//
// # Safety
// `out_default_times` must point to `capacity` writable doubles with
// `capacity >= num_paths * dim`.
enum MosimStatus mosim_simulate(const struct MosimModel *model,
                                uint64_t num_paths,
                                uint64_t seed,
                                double *out_default_times,
                                size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOSIM_H */
