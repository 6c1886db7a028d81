#include <math.h>
#include <stdio.h>

#include "ballnorm.h"

#define CHECK(call)                                                          \
    do {                                                                     \
        BnStatus s_ = (call);                                                \
        if (s_ != BN_STATUS_OK) {                                            \
            printf("%s -> %d: %s\n", #call, (int)s_, bn_last_error_message()); \
            return 1;                                                        \
        }                                                                    \
    } while (0)

int main(void) {
    BnFunctionSpec spec = {BN_FAMILY_WEIERSTRASS, 0.5, -1, 0, 0, 0, 1, 256};
    BnField *w = NULL;
    CHECK(bn_generate(&spec, &w));

    BnNormParams params = {BN_SPACE_BESOV, BN_METHOD_CLASSICAL, true, 0.5,
                           INFINITY, INFINITY, 1, BN_BODY_BALL, true, 0, 6, 1};
    double value = 0.0;
    CHECK(bn_norm(w, &params, &value));
    if (fabs(value - 1.0) > 1e-12) {
        printf("classical norm %.17g\n", value);
        return 1;
    }

    BnField *d = NULL;
    CHECK(bn_ball_difference(w, 1, 0.25, BN_BODY_BALL, &d));
    double samples[256];
    CHECK(bn_field_real_parts(d, samples, 256));

    BnField *bad = NULL;
    if (bn_ball_difference(w, 1, 4.0, BN_BODY_BALL, &bad) != BN_STATUS_RADIUS_OUT_OF_RANGE) {
        printf("expected a radius error\n");
        return 1;
    }

    bn_field_free(d);
    bn_field_free(w);
    printf("ok %s\n", bn_version());
    return 0;
}
