/* firmware for task tmp36-read on nrf52840+zephyr */
#include <stdint.h>

int main(void) {
    for (;;) {
    }
    return 0;
}
