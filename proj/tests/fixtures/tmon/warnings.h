#ifndef WARNINGS_H
#define WARNINGS_H

void tmon_warn_create(void);
void tmon_warn_write(int w);
void xmon_warn_write(int w);

#endif
