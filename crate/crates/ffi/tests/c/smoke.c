#include <math.h>
#include <stdio.h>
#include <string.h>

#include "grassmetric.h"

static const char *DOMAIN = "{\"kind\":\"symmetric\",\"form\":[1,0,0,0,0,1,0,0,0,0,-1,0,0,0,0,-1]}";
static const char *X = "{\"n\":4,\"k\":2,\"basis\":[1,0,0,1,0,0,0,0]}";
static const char *Y = "{\"n\":4,\"k\":2,\"basis\":[1,0,0,1,0.5,0,0,0.25]}";

int main(void) {
    GmDomain *d = NULL;
    GmPlane *x = NULL, *y = NULL;
    if (gm_domain_from_json(DOMAIN, &d) != GM_STATUS_OK) return 1;
    if (gm_plane_from_json(X, &x) != GM_STATUS_OK) return 2;
    if (gm_plane_from_json(Y, &y) != GM_STATUS_OK) return 3;

    double k = 0.0;
    if (gm_kobayashi_closed_form(d, x, y, &k) != GM_STATUS_OK) return 4;
    if (fabs(k - log(5.0)) > 1e-12) return 5;

    size_t dist = 0;
    if (gm_arithmetic_distance(x, y, &dist) != GM_STATUS_OK || dist != 2) return 6;

    char *report = NULL;
    if (gm_sandwich_json(d, x, y, "{\"search\":{\"max_segments\":4,\"restarts\":1,\"budget\":200},"
                                  "\"dual_samples\":100,\"optimize_duals\":true}",
                         7, &report) != GM_STATUS_OK)
        return 7;
    if (strstr(report, "\"seed\":7") == NULL) return 8;
    gm_string_free(report);

    GmPlane *bad = NULL;
    if (gm_plane_from_json("{\"n\":4}", &bad) != GM_STATUS_INVALID_INPUT) return 9;
    if (gm_last_error_message() == NULL) return 10;

    printf("%.15f\n", k);
    gm_plane_free(x);
    gm_plane_free(y);
    gm_domain_free(d);
    return 0;
}
