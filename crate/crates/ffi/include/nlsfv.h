#ifndef NLSFV_H
#define NLSFV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NlsfvInitial {
  // `½ exp(−((x−1)² + (y−1)² + (i/2)(x−1)))`
  NLSFV_INITIAL_EXAMPLE1 = 1,
  // `exp(−(x² + (y−10)² + (i/2)x))`
  NLSFV_INITIAL_EXAMPLE3 = 3,
} NlsfvInitial;

typedef enum NlsfvStatus {
  NLSFV_STATUS_OK = 0,
  NLSFV_STATUS_NULL_POINTER = 1,
  NLSFV_STATUS_INVALID_ARGUMENT = 2,
  NLSFV_STATUS_INVALID_CONFIG = 3,
  NLSFV_STATUS_MESH_ERROR = 4,
  NLSFV_STATUS_SOLVER_ERROR = 5,
  NLSFV_STATUS_IO_ERROR = 6,
  NLSFV_STATUS_PARSE_ERROR = 7,
  NLSFV_STATUS_PANIC = 99,
} NlsfvStatus;

typedef struct NlsfvMesh NlsfvMesh;

typedef struct NlsfvSimulation NlsfvSimulation;

// Scheme parameters; obtain defaults from [`nlsfv_scheme_params_default`].
typedef struct NlsfvSchemeParams {
  double dt;
  double p;
  double picard_tol;
  uint32_t picard_max_iters;
  double krylov_tol;
  uint32_t krylov_restart;
  uint32_t krylov_max_iters;
  bool nonlinearity_enabled;
  bool jacobi;
} NlsfvSchemeParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. The
// pointer stays valid until the next call into this library on the same
// thread.
const char *nlsfv_last_error_message(void);

struct NlsfvSchemeParams nlsfv_scheme_params_default(double dt, double p);

// Generates a centroidal Voronoi mesh of the domain described by `domain`
// (`"disk:R"` or `"annulus:RI,RO"`).
//
// # Safety
// `domain` must be a NUL-terminated string and `out` a writable pointer.
enum NlsfvStatus nlsfv_mesh_generate(const char *domain,
                                     size_t n_cells,
                                     uint64_t seed,
                                     struct NlsfvMesh **out);

// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum NlsfvStatus nlsfv_mesh_load(const char *path, struct NlsfvMesh **out);

// # Safety
// `mesh` must be a live handle and `path` a NUL-terminated string.
enum NlsfvStatus nlsfv_mesh_save(const struct NlsfvMesh *mesh, const char *path);

// Number of cells, or 0 for a null handle.
//
// # Safety
// `mesh` must be null or a live handle.
size_t nlsfv_mesh_n_cells(const struct NlsfvMesh *mesh);

// Largest cell diameter, or NaN for a null handle.
//
// # Safety
// `mesh` must be null or a live handle.
double nlsfv_mesh_h(const struct NlsfvMesh *mesh);

// Copies cell generators as interleaved `x, y` pairs into `xy`, which
// must hold `2 * len` doubles with `len` equal to the cell count.
//
// # Safety
// `mesh` must be a live handle and `xy` valid for `2 * len` writes.
enum NlsfvStatus nlsfv_mesh_cell_points(const struct NlsfvMesh *mesh, double *xy, size_t len);

// # Safety
// `mesh` must be null or a handle not yet freed.
void nlsfv_mesh_free(struct NlsfvMesh *mesh);

// Creates a simulation on a copy of `mesh` with damping preset `damping`
// (`"zero"`, `"example1"`…`"example4"`, `"constant:C"`, …) and initial
// data `initial`, one of the [`NlsfvInitial`] values.
//
// # Safety
// `mesh` must be a live handle, `damping` a NUL-terminated string,
// `params` readable and `out` writable.
enum NlsfvStatus nlsfv_simulation_new(const struct NlsfvMesh *mesh,
                                      const char *damping,
                                      int32_t initial,
                                      const struct NlsfvSchemeParams *params,
                                      struct NlsfvSimulation **out);

// Advances `n_steps` time steps. On failure the state is left at the last
// completed step.
//
// # Safety
// `sim` must be a live handle.
enum NlsfvStatus nlsfv_simulation_step(struct NlsfvSimulation *sim, uint64_t n_steps);

// # Safety
// `sim` must be null or a live handle.
double nlsfv_simulation_time(const struct NlsfvSimulation *sim);

// # Safety
// `sim` must be null or a live handle.
uint64_t nlsfv_simulation_steps(const struct NlsfvSimulation *sim);

// Total Picard and Krylov iterations so far.
//
// # Safety
// `sim` must be a live handle; the output pointers may be null.
enum NlsfvStatus nlsfv_simulation_iterations(const struct NlsfvSimulation *sim,
                                             uint64_t *picard,
                                             uint64_t *krylov);

// Writes the mass `E₀` of the current field.
//
// # Safety
// `sim` must be a live handle and `out` writable.
enum NlsfvStatus nlsfv_simulation_mass(const struct NlsfvSimulation *sim, double *out);

// Writes the energy `E₁` of the current field.
//
// # Safety
// `sim` must be a live handle and `out` writable.
enum NlsfvStatus nlsfv_simulation_energy(const struct NlsfvSimulation *sim, double *out);

// Copies the current field into `re` and `im`, each of length `len`
// equal to the cell count.
//
// # Safety
// `sim` must be a live handle and `re`, `im` valid for `len` writes.
enum NlsfvStatus nlsfv_simulation_get_field(const struct NlsfvSimulation *sim,
                                            double *re,
                                            double *im,
                                            size_t len);

// Replaces the current field.
//
// # Safety
// `sim` must be a live handle and `re`, `im` valid for `len` reads.
enum NlsfvStatus nlsfv_simulation_set_field(struct NlsfvSimulation *sim,
                                            const double *re,
                                            const double *im,
                                            size_t len);

// # Safety
// `sim` must be null or a handle not yet freed.
void nlsfv_simulation_free(struct NlsfvSimulation *sim);

// Runs a reference example (`"I"`…`"IV"`) and writes its report into
// `out_dir`. A positive `t_final` overrides the final time.
//
// # Safety
// `example` and `out_dir` must be NUL-terminated strings.
enum NlsfvStatus nlsfv_run_example(const char *example,
                                   bool reduced,
                                   double t_final,
                                   const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLSFV_H */
