#include <stdio.h>
#include "damped_chain.h"

int main(void) {
    const double t = 1.0 / 3.0;
    const double p0[25] = {
        0.2, 0.2, 0.2, 0.2, 0.2,
        0.25, 0.0, 0.25, 0.25, 0.25,
        0.0, t, 0.0, t, t,
        0.0, t, t, 0.0, t,
        0.0, t, t, t, 0.0,
    };
    const double d[5] = {0.2, 0.2, 0.2, 0.2, 0.2};
    DcMatrix *m = NULL;
    DcMatrix *pe = NULL;
    double pi[5];

    if (dc_matrix_new(p0, 5, &m) != DC_STATUS_OK
        || dc_damped_matrix(m, d, 5, 0.15, &pe) != DC_STATUS_OK
        || dc_stationary_direct(pe, pi, 5) != DC_STATUS_OK) {
        fprintf(stderr, "error: %s\n", dc_last_error_message());
        return 1;
    }
    printf("damped-chain %s\n", dc_version());
    for (int j = 0; j < 5; j++) {
        printf("pi[%d] = %.6f\n", j + 1, pi[j]);
    }
    dc_matrix_free(pe);
    dc_matrix_free(m);
    return 0;
}
