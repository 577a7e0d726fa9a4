#include <math.h>
#include <stdio.h>
#include <string.h>
#include "tdesign.h"

int main(void) {
    TdDesign *d = NULL;
    double value = 0.0;
    if (td_maximin_polynomial(0, 2, -1.0, 1.0, 2.0, &d, &value) != TD_STATUS_OK) {
        fprintf(stderr, "%s\n", td_last_error());
        return 1;
    }
    size_t n = td_design_len(d);
    double x[8], w[8];
    if (n != 3 || td_design_copy(d, x, w, 8) != TD_STATUS_OK) return 2;
    if (fabs(w[1] - 0.375) > 1e-9 || fabs(value - 0.64) > 1e-9) return 3;
    char *json = td_design_to_json(d);
    TdDesign *e = NULL;
    if (td_design_from_json(json, &e) != TD_STATUS_OK) return 4;
    td_string_free(json);
    double b = 0.5, eff = 0.0;
    if (td_efficiency_polynomial(e, 0, 2, &b, 1, &eff) != TD_STATUS_OK) return 5;
    if (fabs(eff - 0.64) > 1e-9) return 6;
    if (td_xi_m_beta(1, 0.5, 1.0, &e) != TD_STATUS_INVALID_ARGUMENT) return 7;
    if (td_last_error() == NULL || strlen(td_last_error()) == 0) return 8;
    td_design_free(d);
    td_design_free(e);
    printf("ok\n");
    return 0;
}
