#include <stdio.h>
#include <string.h>
#include "supersheaf.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s\n", #cond); return 1; } } while (0)

int main(void) {
    uint64_t dim = 0;
    CHECK(ss_bott_dim(1, -2, 1, &dim) == SS_STATUS_OK && dim == 1);

    SsDescriptor *d = NULL;
    CHECK(ss_descriptor_from_json("{\"n\":1,\"m\":1,\"even_twists\":[0],\"odd_twists\":[-1]}", &d) == SS_STATUS_OK);
    uint64_t h0 = 0, h1 = 0;
    CHECK(ss_obstruction_dims(d, 1, &h0, &h1) == SS_STATUS_OK && h0 == 1 && h1 == 1);

    uint64_t even[2], odd[2];
    CHECK(ss_split_cohomology(d, even, odd) == SS_STATUS_OK);
    CHECK(even[0] == 1 && odd[0] == 0 && even[1] == 1 && odd[1] == 0);
    const char *cocycle = "[{\"row\":1,\"col\":0,\"terms\":[{\"z\":-1,\"zetas\":[1],\"coeff\":\"1\"}]}]";
    CHECK(ss_twisted_cohomology(d, cocycle, even, odd) == SS_STATUS_OK);
    CHECK(even[0] + odd[0] + even[1] + odd[1] == 0);
    ss_descriptor_free(d);

    CHECK(ss_descriptor_from_json("{\"n\":1}", &d) == SS_STATUS_INVALID_INPUT);
    char msg[256];
    CHECK(ss_last_error(msg, sizeof msg, NULL) == SS_STATUS_OK && strlen(msg) > 0);
    printf("ok %s\n", ss_status_name(SS_STATUS_OK));
    return 0;
}
