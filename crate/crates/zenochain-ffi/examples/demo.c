/* Smoke test for the zenochain C ABI.
 *
 * Build (from the workspace root, after `cargo build -p zenochain-ffi`):
 *   gcc crates/zenochain-ffi/examples/demo.c \
 *       -Icrates/zenochain-ffi/include \
 *       target/debug/libzenochain_ffi.a -lm -o /tmp/zc_demo
 */
#include <stdio.h>
#include <math.h>
#include "zenochain.h"

static int check(ZcStatus status, const char *what) {
  if (status != ZcStatus_Ok) {
    fprintf(stderr, "%s failed (%d): %s\n", what, (int)status, zc_last_error());
    return 1;
  }
  return 0;
}

int main(void) {
  printf("zenochain %s\n", zc_version());

  /* Bell state (|00> + |11>)/sqrt(2): concurrence must be 1. */
  double rho[32] = {0};
  rho[2 * (0 * 4 + 0)] = 0.5;
  rho[2 * (0 * 4 + 3)] = 0.5;
  rho[2 * (3 * 4 + 0)] = 0.5;
  rho[2 * (3 * 4 + 3)] = 0.5;
  double c = 0.0;
  if (check(zc_observable_from_density(2, rho, "concurrence", &c), "concurrence"))
    return 1;
  if (fabs(c - 1.0) > 1e-10) {
    fprintf(stderr, "Bell concurrence %.12f != 1\n", c);
    return 1;
  }
  printf("bell concurrence: %.12f\n", c);

  /* Small trajectory ensemble. */
  ZcParams *params = NULL;
  if (check(zc_params_new(2, 0.5, 0.0, 1.0, &params), "params_new")) return 1;
  double mean = 0.0, stderr_ = 0.0;
  ZcStatus status = zc_steady_state_average(params, "concurrence", 16, 2.0, 2.0,
                                            0.5, 424242, &mean, &stderr_);
  if (check(status, "steady_state_average")) return 1;
  printf("steady-state concurrence: %.6f +/- %.6f\n", mean, stderr_);
  zc_params_free(params);

  /* Error path: invalid efficiency must report Config. */
  ZcParams *bad = NULL;
  if (zc_params_new(2, 0.5, 0.0, 2.0, &bad) != ZcStatus_Config) {
    fprintf(stderr, "expected Config status for eta = 2\n");
    return 1;
  }
  printf("error path ok: %s\n", zc_last_error());
  return 0;
}
