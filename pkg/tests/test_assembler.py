"""Code extraction, project layout, prj.conf inference, overlay generation."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from support import GOLDEN, PLATFORM_SHORT, canonical_source

from hilbench.assembler import (
    PLATFORM_LAYOUTS,
    assemble,
    extract_code,
    generate_overlay,
    render_prj_conf,
)
from hilbench.corpus import BehaviorCheck, PinAssignment, TaskSpec
from hilbench.errors import InvalidDescriptor, NoCodeFound, UnsupportedPlatform
from hilbench.peripherals import PERIPHERALS, Interface
from hilbench.platforms import get_platform


class TestExtract:
    def test_single_block(self):
        source = extract_code("Here is the code:\n```c\nint main(){}\n```\nEnjoy!")
        assert source.code == "int main(){}\n"

    def test_longest_block_wins(self):
        short = "int x;"
        long = "int main(void) {\n" + "    x += 1;\n" * 20 + "}"
        raw = f"```\n{short}\n```\nand then\n```c\n{long}\n```"
        source = extract_code(raw)
        assert source.code.startswith("int main")
        assert "2 of 2" in source.note
        assert "discarded" in source.note

    def test_pure_prose_rejected(self):
        with pytest.raises(NoCodeFound):
            extract_code("I am sorry, I cannot write firmware today.")

    def test_fence_free_source_accepted(self):
        raw = "#include <stdint.h>\nint main(void) {\n    return 0;\n}\n"
        source = extract_code(raw)
        assert source.code == raw
        assert "whole text" in source.note

    def test_unterminated_fence_salvaged(self):
        source = extract_code("```c\nint main(){}\n")
        assert source.code == "int main(){}\n"

    def test_no_fence_delimiters_in_output(self):
        raw = "```c\nint main(){}\n```\n```python\nprint('x')\n```"
        source = extract_code(raw)
        for line in source.code.splitlines():
            assert not line.strip().startswith("```")

    @given(
        st.lists(
            st.one_of(
                st.sampled_from(["```", "```c", "int main(void) {", "}", "x += 1;", "#include <a.h>", "prose words here", ""]),
                st.text(alphabet=st.characters(codec="ascii", exclude_characters="`"), max_size=30),
            ),
            max_size=40,
        )
    )
    @settings(max_examples=150, deadline=None)
    def test_extraction_never_leaks_fences(self, lines):
        raw = "\n".join(lines)
        try:
            source = extract_code(raw)
        except NoCodeFound:
            return
        for line in source.code.splitlines():
            assert not line.strip().startswith("```")


def _task(pins: list[PinAssignment], target: str = "nrf52840+zephyr", task_id: str = "t") -> TaskSpec:
    return TaskSpec(
        id=task_id,
        level=1,
        title="T",
        description="desc",
        target=target,
        pins=tuple(pins),
        check=BehaviorCheck(mode="human", checklist=("ok",)),
    )


class TestAssemble:
    def test_layouts_match_mandated_sets(self, fixture_corpus):
        for task in fixture_corpus.tasks:
            bundle = assemble(get_platform(task.target), canonical_source(task), task)
            expected = tuple(p.format(task=task.id) for p in PLATFORM_LAYOUTS[task.target])
            assert tuple(path for path, _ in bundle.files) == expected

    def test_identity(self, fixture_corpus):
        task = fixture_corpus.variant("sos-morse", "nrf52840+zephyr")
        profile = get_platform(task.target)
        a = assemble(profile, canonical_source(task), task)
        b = assemble(profile, canonical_source(task), task)
        assert a == b

    def test_golden_bundles_byte_exact(self, fixture_corpus):
        for task in fixture_corpus.tasks:
            bundle = assemble(get_platform(task.target), canonical_source(task), task)
            golden_dir = GOLDEN / "bundles" / f"{task.id}.{PLATFORM_SHORT[task.target]}"
            for rel, content in bundle.files:
                golden = (golden_dir / rel).read_text(encoding="utf-8")
                assert content == golden, f"{task.id}/{task.target}: {rel} drifted"

    def test_unsupported_platform(self, fixture_corpus):
        task = fixture_corpus.variant("sos-morse", "atmega2560+arduino")
        profile = get_platform("atmega2560+arduino")
        fake = profile.__class__(**{**profile.__dict__, "id": "riscv+freertos"})
        with pytest.raises(UnsupportedPlatform):
            assemble(fake, canonical_source(task), task)

    def test_arduino_sketch_dir_matches_basename(self, fixture_corpus):
        task = fixture_corpus.variant("sos-morse", "atmega2560+arduino")
        bundle = assemble(get_platform(task.target), canonical_source(task), task)
        assert bundle.entry == "sos-morse/sos-morse.ino"


class TestPrjConf:
    def test_i2c_task_enables_i2c(self, fixture_corpus):
        task = fixture_corpus.variant("mpu6050-i2c", "nrf52840+zephyr")
        conf = render_prj_conf(task)
        assert "CONFIG_I2C=y" in conf
        assert "CONFIG_SPI=y" not in conf

    def test_spi_inference_covers_bme280(self, fixture_corpus):
        task = fixture_corpus.variant("bme280-spi", "nrf52840+zephyr")
        conf = render_prj_conf(task)
        assert "CONFIG_SPI=y" in conf

    def test_bus_lines_iff_interface_across_registry(self):
        """For every peripheral: I2C/SPI lines appear iff the interface does."""
        for peripheral in PERIPHERALS.values():
            task = _task([PinAssignment(peripheral.id, "sig", "sig-alias")])
            conf = render_prj_conf(task)
            assert ("CONFIG_I2C=y" in conf) == (Interface.I2C in peripheral.interfaces), peripheral.id
            assert ("CONFIG_SPI=y" in conf) == (Interface.SPI in peripheral.interfaces), peripheral.id

    def test_baseline_constant_across_tasks(self, fixture_corpus):
        """Only the bus lines vary task to task."""
        def non_bus(conf: str) -> list[str]:
            return [l for l in conf.splitlines() if l not in ("CONFIG_I2C=y", "CONFIG_SPI=y")]

        confs = [
            render_prj_conf(t) for t in fixture_corpus.tasks if t.target == "nrf52840+zephyr"
        ]
        assert len({tuple(non_bus(c)) for c in confs}) == 1


class TestOverlay:
    def test_alias_points_at_bench_node(self):
        overlay = generate_overlay((PinAssignment("led", "led", "led-ext"),))
        assert "led-ext = &bench_led;" in overlay
        assert "gpio-leds" in overlay
        assert "bench_led: bench_led" in overlay

    def test_empty_pins_valid_root(self):
        overlay = generate_overlay(())
        assert overlay.endswith("/ {\n};\n")

    def test_numeric_descriptor_rejected(self):
        with pytest.raises(InvalidDescriptor):
            generate_overlay((PinAssignment("led", "led", "17"),))

    def test_inputs_grouped_as_keys(self):
        overlay = generate_overlay(
            (
                PinAssignment("push-button", "button", "button-ext"),
                PinAssignment("led", "led", "led-ext"),
            )
        )
        assert "gpio-keys" in overlay
        assert overlay.index("gpio-leds") < overlay.index("gpio-keys")

    def test_sorted_by_signal(self):
        overlay = generate_overlay(
            (
                PinAssignment("led", "zeta", "zeta-alias"),
                PinAssignment("led", "alpha", "alpha-alias"),
            )
        )
        assert overlay.index("alpha-alias") < overlay.index("zeta-alias")

    def test_node_path_descriptor_kept_verbatim(self):
        overlay = generate_overlay((PinAssignment("led", "led", "/soc/gpio@50000000"),))
        assert 'led = "/soc/gpio@50000000";' in overlay
