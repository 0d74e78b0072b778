#include <stdio.h>
#include <string.h>
#include "locomp.h"

static int fail(const char *what) {
    const char *e = locomp_last_error();
    fprintf(stderr, "%s: %s\n", what, e ? e : "(no message)");
    return 1;
}

int main(void) {
    LocompSpace *sp = NULL;
    if (locomp_space_new("{\"kind\":\"rational_line\"}", &sp) != LOCOMP_STATUS_OK) return fail("space");

    LocompVerdict v;
    char *ev = NULL;
    const char *a = "{\"metric\":[\"d\"],\"center\":\"0\",\"radius\":\"1\"}";
    const char *u = "[{\"metric\":[\"d\"],\"center\":\"-1/2\",\"radius\":\"1\"},"
                    "{\"metric\":[\"d\"],\"center\":\"1/2\",\"radius\":\"1\"}]";
    if (locomp_ball_cover(sp, a, u, 12, &v, &ev) != LOCOMP_STATUS_OK) return fail("cover");
    if (v != LOCOMP_VERDICT_PROVED || ev == NULL || ev[0] != '{') return fail("cover verdict");
    locomp_string_free(ev);

    LocompPoint *p = NULL;
    if (locomp_point_sqrt(sp, 2, &p) != LOCOMP_STATUS_OK) return fail("sqrt");
    if (locomp_point_member(p, "{\"metric\":[\"d\"],\"center\":\"7/5\",\"radius\":\"1/50\"}", 16, &v) != LOCOMP_STATUS_OK
        || v != LOCOMP_VERDICT_PROVED) return fail("member");

    if (locomp_space_new("[", &sp) != LOCOMP_STATUS_PARSE || locomp_last_error() == NULL) return fail("parse error");

    locomp_point_free(p);
    locomp_space_free(sp);
    printf("ok %s\n", locomp_version());
    return 0;
}
