"""Peripheral registry: the 23 hardware peripherals supported by the bench.

Each entry records the electrical interface(s) a peripheral speaks and its
coarse category. The registry drives task validation and the inference of
bus subsystems (I2C/SPI) during project assembly. User corpora may extend
it via ``register_extra``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Interface(enum.Enum):
    GPIO_OUT = "GPIO-out"
    GPIO_IN = "GPIO-in"
    GPIO_TRIGGER_ECHO = "GPIO-trigger-echo"
    ADC = "ADC"
    PWM = "PWM"
    I2C = "I2C"
    SPI = "SPI"
    ONE_WIRE = "1-Wire"
    PARALLEL = "Parallel"


class Category(enum.Enum):
    ACTUATOR = "Actuator"
    INPUT = "Input"
    SENSOR = "Sensor"
    OUTPUT = "Output"


@dataclass(frozen=True)
class Peripheral:
    id: str
    name: str
    interfaces: tuple[Interface, ...]
    category: Category


def _p(pid: str, name: str, interfaces: tuple[Interface, ...], category: Category) -> Peripheral:
    return Peripheral(pid, name, interfaces, category)


PERIPHERALS: dict[str, Peripheral] = {
    p.id: p
    for p in (
        _p("led", "LED", (Interface.GPIO_OUT,), Category.ACTUATOR),
        _p("push-button", "Push Button", (Interface.GPIO_IN,), Category.INPUT),
        _p("active-buzzer", "Active Buzzer", (Interface.GPIO_OUT,), Category.ACTUATOR),
        _p("passive-buzzer", "Passive Buzzer", (Interface.PWM,), Category.ACTUATOR),
        _p("relay", "Relay Module", (Interface.GPIO_OUT,), Category.ACTUATOR),
        _p("laser", "Laser Emitter Module", (Interface.GPIO_OUT,), Category.ACTUATOR),
        _p("rotary-encoder", "Rotary Encoder", (Interface.GPIO_IN,), Category.INPUT),
        _p("keypad-4x4", "16-Key Keypad (4x4)", (Interface.GPIO_IN,), Category.INPUT),
        _p("tilt-switch", "Tilt Switch (KY-020)", (Interface.GPIO_IN,), Category.INPUT),
        _p("joystick", "Analog Joystick", (Interface.ADC,), Category.INPUT),
        _p("photoresistor", "Photoresistor (KY-018)", (Interface.ADC,), Category.SENSOR),
        _p("tmp36", "TMP36 Temperature Sensor", (Interface.ADC,), Category.SENSOR),
        _p("water-level", "Analog Water Level Sensor", (Interface.ADC,), Category.SENSOR),
        _p("pir-motion", "PIR Motion Sensor (HC-SR501)", (Interface.GPIO_IN,), Category.SENSOR),
        _p("ultrasonic-hcsr04", "Ultrasonic Sensor (HC-SR04)", (Interface.GPIO_TRIGGER_ECHO,), Category.SENSOR),
        _p("sound-sensor", "Digital Sound Sensor", (Interface.GPIO_IN,), Category.SENSOR),
        _p("shock-sensor", "Digital Shock Sensor", (Interface.GPIO_IN,), Category.SENSOR),
        _p("dht11", "DHT11 (Temp & Humidity)", (Interface.ONE_WIRE,), Category.SENSOR),
        _p("ds18b20", "DS18B20 (Temperature)", (Interface.ONE_WIRE,), Category.SENSOR),
        _p("lcd1602", "LCD1602 Display (HD44780)", (Interface.PARALLEL,), Category.OUTPUT),
        _p("ds1307-rtc", "DS1307 RTC Module", (Interface.I2C,), Category.SENSOR),
        _p("mpu6050", "MPU6050 / GY-521", (Interface.I2C,), Category.SENSOR),
        _p("bme280", "BME280 (Temp, Humidity, Pres.)", (Interface.I2C, Interface.SPI), Category.SENSOR),
    )
}


def get_peripheral(pid: str) -> Peripheral:
    try:
        return PERIPHERALS[pid]
    except KeyError:
        raise KeyError(f"unknown peripheral {pid!r}") from None


def register_extra(peripheral: Peripheral) -> None:
    """Add a user-defined peripheral. Ids must stay unique."""
    if peripheral.id in PERIPHERALS:
        raise ValueError(f"peripheral id {peripheral.id!r} already registered")
    PERIPHERALS[peripheral.id] = peripheral
