#include <stdio.h>
#include "qaw.h"

int main(void) {
    QawContext *ctx = NULL;
    QawParams *p = NULL;
    const double re[4] = {0.5, 0.6, 0.7, 0.8};
    const double im[4] = {0.0, 0.0, 0.0, 0.0};
    QawIntegral out;
    if (qaw_context_new(0.1, 0.0, 0.0, &ctx) != QAW_STATUS_OK) return 1;
    if (qaw_params_new(ctx, 2, re, im, 4, false, &p) != QAW_STATUS_OK) return 2;
    if (qaw_eval(p, QAW_METHOD_CIRCLE, &out) != QAW_STATUS_OK) {
        fprintf(stderr, "%s\n", qaw_last_error());
        return 3;
    }
    printf("%.15f\n", out.value_re);
    qaw_params_free(p);
    qaw_context_free(ctx);
    return 0;
}
