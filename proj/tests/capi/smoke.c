/* Compile-as-C check for the public header plus a minimal call sequence. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "ptgen.h"

static int failures = 0;

#define EXPECT(cond, name)                         \
  do {                                             \
    if (cond) {                                    \
      printf("ok: %s\n", name);                    \
    } else {                                       \
      printf("FAILED: %s\n", name);                \
      ++failures;                                  \
    }                                              \
  } while (0)

int main(void) {
  const char* version = ptgen_version();
  EXPECT(version != NULL && strlen(version) > 0, "version string");

  ptgen_model* idm = NULL;
  EXPECT(ptgen_model_idm(NULL, &idm) == PTGEN_OK, "default idm model");

  ptgen_memory* mem = NULL;
  EXPECT(ptgen_memory_new(idm, &mem) == PTGEN_OK, "memory handle");

  double follower[3] = {100.0, 10.0, 0.0};
  double leader[3] = {130.0, 10.0, 0.0};
  double accel = 0.0;
  EXPECT(ptgen_decide(idm, follower, leader, mem, &accel) == PTGEN_OK, "decide");
  EXPECT(isfinite(accel) && fabs(accel - 1.4 * 5399.0 / 8100.0) < 1e-12, "idm acceleration value");

  EXPECT(ptgen_decide(NULL, follower, leader, mem, &accel) == PTGEN_E_USAGE, "null model rejected");
  EXPECT(strlen(ptgen_last_error()) > 0, "error message set");

  ptgen_memory_free(mem);
  ptgen_model_free(idm);

  if (failures) {
    printf("%d smoke check(s) failed\n", failures);
    return 1;
  }
  printf("all smoke checks passed\n");
  return 0;
}
