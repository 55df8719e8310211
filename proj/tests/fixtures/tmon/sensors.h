#ifndef SENSORS_H
#define SENSORS_H

void tmon_sens_create(void);
int tmon_sens_read(void);

#endif
