#include "sensors.h"
#include "warnings.h"

static int timer;

void tmon_init(void) {
    timer = 5;
    tmon_sens_create();
    tmon_warn_create();
}

static int update_sat(char cond, int timer, int min, int max) {
    int res = timer;
    if (cond) { res += 1; } else { res -= 1; }
    if (res > max) res = max;
    if (res < min) res = min;
    return res;
}

int tmon_step(void) {
    int sens = tmon_sens_read();
    timer = update_sat(sens, timer, 0, 10);
    if (timer == 10) {
        /* activate warning */
        tmon_warn_write(1);
    } else if (timer == 0) {
        /* deactivate warning */
        tmon_warn_write(0);
    } else {
        /* do nothing */
    }
    return 0;
}
