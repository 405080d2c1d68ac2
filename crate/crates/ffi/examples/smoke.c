/* Runs three_boxes through the C interface and prints its weak values. */
#include <stdio.h>

#include "oblivion.h"

int main(void) {
  ObvResult *r = NULL;
  if (obv_run_builtin("three_boxes", 1, 42, &r) != OBV_STATUS_OK) {
    fprintf(stderr, "%s\n", obv_last_error());
    return 1;
  }
  const char *names[] = {"P1", "P2", "P3"};
  for (int i = 0; i < 3; i++) {
    double re = 0, im = 0;
    if (obv_result_weak_value(r, names[i], &re, &im) != OBV_STATUS_OK) {
      fprintf(stderr, "%s\n", obv_last_error());
      obv_result_free(r);
      return 1;
    }
    printf("%s %.6f %.6f\n", names[i], re, im);
  }
  double re = 0, im = 0;
  ObvStatus missing = obv_result_weak_value(r, "P9", &re, &im);
  printf("missing %d\n", (int)missing);
  obv_result_free(r);
  return 0;
}
