"""Platform-framework registry and pin descriptor conventions.

Three platform families are registered by default, covering distinct MCU
architectures and HAL paradigms. Pin descriptors follow a per-platform
convention: Arduino tasks reference board pin labels, ESP-IDF tasks use
numeric GPIO numbers, and Zephyr tasks use devicetree aliases (or absolute
node paths).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass


class PinConvention(enum.Enum):
    BOARD_LABEL = "board-label"
    GPIO_NUMBER = "gpio-number"
    DT_ALIAS = "dt-alias"


@dataclass(frozen=True)
class PlatformProfile:
    """One MCU board + development framework combination."""

    id: str
    mcu: str
    framework: str
    architecture: str
    pin_convention: PinConvention
    toolchain: str
    display: str


PLATFORMS: dict[str, PlatformProfile] = {
    p.id: p
    for p in (
        PlatformProfile(
            id="atmega2560+arduino",
            mcu="ATmega2560",
            framework="Arduino",
            architecture="AVR",
            pin_convention=PinConvention.BOARD_LABEL,
            toolchain="arduino",
            display="Arduino",
        ),
        PlatformProfile(
            id="esp32s3+espidf",
            mcu="ESP32-S3",
            framework="ESP-IDF",
            architecture="Xtensa",
            pin_convention=PinConvention.GPIO_NUMBER,
            toolchain="espidf",
            display="ESP-IDF",
        ),
        PlatformProfile(
            id="nrf52840+zephyr",
            mcu="nRF52840",
            framework="Zephyr",
            architecture="ARM Cortex-M4",
            pin_convention=PinConvention.DT_ALIAS,
            toolchain="zephyr",
            display="Zephyr",
        ),
    )
}

# Canonical ordering for reports and prompts.
PLATFORM_ORDER = tuple(PLATFORMS)

_BOARD_LABEL_RE = re.compile(r"^[A-Za-z0-9_+.-]+$")
_GPIO_NUMBER_RE = re.compile(r"^[0-9]+$")
_DT_ALIAS_RE = re.compile(r"^[a-z][a-z0-9-]*$")


def get_platform(platform_id: str) -> PlatformProfile:
    try:
        return PLATFORMS[platform_id]
    except KeyError:
        raise KeyError(f"unknown platform {platform_id!r}; known: {', '.join(PLATFORMS)}") from None


def descriptor_matches(convention: PinConvention, descriptor: str) -> bool:
    """Check a pin descriptor against a platform's referencing convention.

    Zephyr descriptors must be devicetree aliases (or "/"-rooted node
    paths); a bare number is rejected there even though it is a valid
    Arduino board label.
    """
    if not descriptor:
        return False
    if convention is PinConvention.GPIO_NUMBER:
        return bool(_GPIO_NUMBER_RE.match(descriptor))
    if convention is PinConvention.DT_ALIAS:
        return descriptor.startswith("/") or bool(_DT_ALIAS_RE.match(descriptor))
    return bool(_BOARD_LABEL_RE.match(descriptor))
