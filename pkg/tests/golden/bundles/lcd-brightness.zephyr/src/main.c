/* firmware for task lcd-brightness on nrf52840+zephyr */
#include <stdint.h>

int main(void) {
    for (;;) {
    }
    return 0;
}
