#!/usr/bin/env python3
"""Regenerate the shipped fixtures: task corpus files and reference journal.

Run from the repository root:

    python3 scripts/build_fixtures.py

Output is deterministic; a test asserts the committed fixtures match what
this script produces, so edit the definitions here and re-run rather than
editing fixture files in place.
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from hilbench import refdata  # noqa: E402
from hilbench.corpus import load_corpus, validate_corpus_shape  # noqa: E402

FIXTURES = ROOT / "fixtures"

PLATFORM_SHORT = {
    "atmega2560+arduino": "arduino",
    "esp32s3+espidf": "espidf",
    "nrf52840+zephyr": "zephyr",
}

# id -> (level, title, description, check fields, pins per platform)
# pins: list of (peripheral, signal, {platform: descriptor})
TASKS: dict[str, dict] = {
    "button-debounce": {
        "level": 1,
        "title": "Button Status with Debouncing",
        "description": (
            "Read the state of a pull-down button and implement software debouncing "
            'to avoid multiple triggers. Print "Button Pressed!" to the serial console '
            "when the button is pressed."
        ),
        "check": {"mode": "serial-pattern", "pattern": "Button Pressed!"},
        "pins": [
            ("push-button", "button", {"arduino": "2", "espidf": "4", "zephyr": "button-ext"}),
        ],
    },
    "tmp36-read": {
        "level": 1,
        "title": "TMP36",
        "description": (
            "Read the analog output of the TMP36 temperature sensor, where the output "
            "voltage is linearly proportional to the temperature in degrees Celsius, "
            "and print the temperature value to the serial console."
        ),
        "check": {"mode": "serial-pattern", "pattern": "(?i)temp"},
        "pins": [
            ("tmp36", "sensor", {"arduino": "A0", "espidf": "1", "zephyr": "tmp36-adc"}),
        ],
    },
    "sos-morse": {
        "level": 1,
        "title": "SOS Morse Code",
        "description": 'Blink the LED to spell out "SOS" in Morse code.',
        "check": {
            "mode": "human",
            "checklist": [
                "LED blinks three short pulses then three long pulses then three short pulses",
                "The SOS pattern repeats after a pause",
            ],
        },
        "pins": [
            ("led", "led", {"arduino": "13", "espidf": "2", "zephyr": "led-ext"}),
        ],
    },
    "mpu6050-i2c": {
        "level": 2,
        "title": "MPU6050 Data Reading (I2C)",
        "description": (
            "Read raw accelerometer and gyroscope data from the MPU6050 via I2C and "
            "print to the serial console."
        ),
        "check": {"mode": "serial-pattern", "pattern": "(?i)(accel|gyro)"},
        "pins": [
            ("mpu6050", "sda", {"arduino": "20", "espidf": "8", "zephyr": "i2c-sda"}),
            ("mpu6050", "scl", {"arduino": "21", "espidf": "9", "zephyr": "i2c-scl"}),
        ],
    },
    "bme280-spi": {
        "level": 2,
        "title": "BME280 Data Reading (SPI)",
        "description": (
            "Read the humidity and temperature from a BME280 sensor using the SPI bus, "
            "and print the humidity and temperature values to the serial console."
        ),
        "check": {"mode": "serial-pattern", "pattern": "(?i)humidity"},
        "pins": [
            ("bme280", "sck", {"arduino": "52", "espidf": "12", "zephyr": "spi-sck"}),
            ("bme280", "mosi", {"arduino": "51", "espidf": "11", "zephyr": "spi-mosi"}),
            ("bme280", "miso", {"arduino": "50", "espidf": "13", "zephyr": "spi-miso"}),
            ("bme280", "cs", {"arduino": "53", "espidf": "10", "zephyr": "spi-cs"}),
        ],
    },
    "lcd1602-hello": {
        "level": 2,
        "title": 'LCD1602 Display "Hello World"',
        "description": 'Set up the LCD1602 display, and display "Hello World" at the center of the screen.',
        "check": {
            "mode": "human",
            "checklist": ["Display shows Hello World centered on the top row"],
        },
        "pins": [
            ("lcd1602", "rs", {"arduino": "12", "espidf": "15", "zephyr": "lcd-rs"}),
            ("lcd1602", "en", {"arduino": "11", "espidf": "16", "zephyr": "lcd-en"}),
            ("lcd1602", "d4", {"arduino": "5", "espidf": "17", "zephyr": "lcd-d4"}),
            ("lcd1602", "d5", {"arduino": "4", "espidf": "18", "zephyr": "lcd-d5"}),
            ("lcd1602", "d6", {"arduino": "3", "espidf": "6", "zephyr": "lcd-d6"}),
            ("lcd1602", "d7", {"arduino": "2", "espidf": "7", "zephyr": "lcd-d7"}),
        ],
    },
    "safe-box": {
        "level": 3,
        "title": "Safe Box with Display",
        "description": (
            "Write the program that will read the password input from the 16 key keypad, "
            "there are in total 8 lines connected to each 4 rows and 4 cols. In particular, "
            'the password will be set to "1234". The program will read the key input from '
            "the 16 key keypad, and if the input matches the password, the program will "
            "connect the relay to unlock the safebox."
        ),
        "check": {
            "mode": "human",
            "checklist": [
                "Entering 1234 on the keypad activates the relay",
                "Entering a wrong code leaves the relay off",
            ],
        },
        "pins": [
            ("keypad-4x4", "row1", {"arduino": "22", "espidf": "4", "zephyr": "keypad-row1"}),
            ("keypad-4x4", "row2", {"arduino": "24", "espidf": "5", "zephyr": "keypad-row2"}),
            ("keypad-4x4", "row3", {"arduino": "26", "espidf": "6", "zephyr": "keypad-row3"}),
            ("keypad-4x4", "row4", {"arduino": "28", "espidf": "7", "zephyr": "keypad-row4"}),
            ("keypad-4x4", "col1", {"arduino": "30", "espidf": "15", "zephyr": "keypad-col1"}),
            ("keypad-4x4", "col2", {"arduino": "32", "espidf": "16", "zephyr": "keypad-col2"}),
            ("keypad-4x4", "col3", {"arduino": "34", "espidf": "17", "zephyr": "keypad-col3"}),
            ("keypad-4x4", "col4", {"arduino": "36", "espidf": "18", "zephyr": "keypad-col4"}),
            ("relay", "relay", {"arduino": "8", "espidf": "21", "zephyr": "relay-ctl"}),
        ],
    },
    "lcd-brightness": {
        "level": 3,
        "title": "Automatic Brightness Control for LCD1602 Display",
        "description": (
            "Use the ambient light intensity (the KY-018 photoresistor) to automatically "
            "adjust the brightness of the LCD1602 backlight. Read the analog value from "
            "the KY-018 photoresistor, map it to a suitable PWM duty cycle, and control "
            "the backlight brightness accordingly."
        ),
        "check": {
            "mode": "human",
            "checklist": ["Covering the photoresistor changes the backlight brightness accordingly"],
        },
        "pins": [
            ("photoresistor", "ldr", {"arduino": "A1", "espidf": "2", "zephyr": "ldr-adc"}),
            ("lcd1602", "backlight", {"arduino": "9", "espidf": "14", "zephyr": "lcd-backlight"}),
        ],
    },
    "led-freq-buzzer": {
        "level": 3,
        "title": "Variable Frequency LED with Buzzer",
        "description": (
            "Build the program that integrates the button press with both the buzzer and "
            "the timer-based LED control. After the system reset, when you press the button:\n"
            "\n"
            "- For the 1st time, a timer is triggered that toggles the external LED at 1 Hz;\n"
            "- For the 2nd time, a timer is triggered that toggles the external LED at 2 Hz;\n"
            "- For the 3rd time, a timer is triggered that toggles the external LED at 4 Hz;\n"
            "- For the 4th time, the timer is stopped and the external LED will not blink;\n"
            "\n"
            "The process repeats and the toggling frequency of the LED will undergo the "
            "sequence of 1 Hz, 2 Hz, 4 Hz, N/A, 1 Hz, 2 Hz, 4 Hz, N/A, ... as you press the "
            "button. In addition, every time the button is pressed, the buzzer will go off, "
            "indicating that the button has been pressed. The button and buzzer must be "
            "connected to separate GPIO pins, and the buzzer operation will be triggered by "
            "its own connected GPIO pin."
        ),
        "check": {
            "mode": "human",
            "checklist": [
                "Button presses cycle the LED toggle frequency through 1 Hz then 2 Hz then 4 Hz then off",
                "The buzzer sounds on every press",
                "The cycle repeats after the fourth press",
            ],
        },
        "pins": [
            ("push-button", "button", {"arduino": "3", "espidf": "5", "zephyr": "button-ext"}),
            ("active-buzzer", "buzzer", {"arduino": "7", "espidf": "6", "zephyr": "buzzer-ctl"}),
            ("led", "led", {"arduino": "6", "espidf": "7", "zephyr": "led-ext"}),
        ],
    },
}

PLATFORM_IDS = {
    "arduino": "atmega2560+arduino",
    "espidf": "esp32s3+espidf",
    "zephyr": "nrf52840+zephyr",
}


def render_task_file(task_id: str, short: str) -> str:
    spec = TASKS[task_id]
    check = spec["check"]
    lines = [
        "---",
        f"id: {task_id}",
        f"level: {spec['level']}",
        f"title: {spec['title']}",
        f"target: {PLATFORM_IDS[short]}",
    ]
    pins = [f"{per}/{sig}={desc[short]}" for per, sig, desc in spec["pins"]]
    lines.append("pins: [" + ", ".join(pins) + "]")
    lines.append(f"check-mode: {check['mode']}")
    if check["mode"] == "serial-pattern":
        lines.append(f"check-pattern: {check['pattern']}")
    else:
        lines.append("check-list: [" + ", ".join(check["checklist"]) + "]")
    lines.append("---")
    lines.append(spec["description"])
    return "\n".join(lines) + "\n"


def build_corpus() -> None:
    corpus_dir = FIXTURES / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    for old in corpus_dir.glob("*.task.md"):
        old.unlink()
    for task_id in TASKS:
        for short in PLATFORM_IDS:
            path = corpus_dir / f"{task_id}.{short}.task.md"
            path.write_text(render_task_file(task_id, short), encoding="utf-8")
    corpus = load_corpus(corpus_dir)
    mismatches = validate_corpus_shape(corpus, {1: 3, 2: 3, 3: 3})
    assert not mismatches, mismatches
    print(f"corpus: {len(corpus.tasks)} task files under {corpus_dir}")


def build_journal() -> None:
    path = FIXTURES / "reference_journal.jsonl"
    count = refdata.write_reference_journal(path)
    print(f"journal: {count} records -> {path}")


def main() -> None:
    build_corpus()
    build_journal()


if __name__ == "__main__":
    main()
