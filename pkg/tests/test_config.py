"""Quantity parsing and YAML run-configuration loading."""

import pytest

from snspdsim.config import load_run_config
from snspdsim.errors import ConfigError
from snspdsim.quantities import parse_quantity

BASE = """
circuit:
  kinetic_inductance: 500 nH
  hotspot_resistance: 5 kohm
  load_resistance: 25 ohm
  bias_current: 25.0 uA
  critical_current: 25.3 uA
rates:
  dark_rate_ref: 3200 Hz
  dark_rate_slope_per_amp: 2.0934e6
  efficiency_max: 0.025
  efficiency_slope_per_amp: 1.2e7
  reference_bias: 25.0 uA
run:
  duration: 0.5 s
  seed: 7
"""


def write_config(tmp_path, text):
    path = tmp_path / "run.yaml"
    path.write_text(text)
    return path


class TestQuantities:
    @pytest.mark.parametrize(
        "raw,dimension,expected",
        [
            ("0.1ms", "time", 1e-4),
            ("180 ns", "time", 180e-9),
            ("25 uA", "current", 25e-6),
            ("25 µA", "current", 25e-6),
            ("15 MHz", "frequency", 15e6),
            ("0.5 MHz", "frequency", 0.5e6),
            ("5 kohm", "resistance", 5000.0),
            ("500 nH", "inductance", 500e-9),
            ("-150 mV", "voltage", -0.15),
            ("56 dB", "gain", 56.0),
            (3200, "frequency", 3200.0),
            (2.5e-8, "time", 2.5e-8),
        ],
    )
    def test_accepted(self, raw, dimension, expected):
        assert parse_quantity(raw, dimension) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize(
        "raw,dimension",
        [
            ("25 uA", "time"),       # wrong unit for the dimension
            ("ten ns", "time"),      # not a number
            ("5 zops", "resistance"),
            (True, "time"),
        ],
    )
    def test_rejected(self, raw, dimension):
        with pytest.raises(ConfigError):
            parse_quantity(raw, dimension)


class TestRunConfig:
    def test_minimal_config(self, tmp_path):
        cfg = load_run_config(write_config(tmp_path, BASE))
        assert cfg.model.circuit.bias_current == pytest.approx(25e-6)
        assert cfg.model.kernel is None  # no kernel section -> gaussian needs amplitude
        assert cfg.stimulus.mode == "none"
        assert cfg.duration == 0.5
        assert cfg.seed == 7
        assert len(cfg.digest) == 16

    def test_gaussian_kernel_section(self, tmp_path):
        text = BASE + "kernel:\n  type: gaussian\n  amplitude: 3.7 uA\n  width: 15 ns\n"
        cfg = load_run_config(write_config(tmp_path, text))
        assert cfg.model.kernel is not None
        assert cfg.model.kernel.peak == pytest.approx(3.7e-6, rel=1e-9)

    def test_from_filter_kernel_section(self, tmp_path):
        text = BASE + (
            "kernel:\n"
            "  type: from-filter\n"
            "  passband_low: 15 MHz\n"
            "  passband_high: 580 MHz\n"
            "  peak_amplitude: 3.7 uA\n"
            "  time_offset: 160 ns\n"
        )
        cfg = load_run_config(write_config(tmp_path, text))
        assert cfg.model.kernel.peak == pytest.approx(3.7e-6, rel=1e-9)

    def test_stimulus_sections(self, tmp_path):
        text = BASE + "stimulus:\n  mode: periodic\n  rate: 0.5 MHz\n  mean_photons: 10\n"
        cfg = load_run_config(write_config(tmp_path, text))
        assert cfg.stimulus.rate == pytest.approx(0.5e6)
        text = BASE + (
            "stimulus:\n  mode: double-pulse\n  separation: 180 ns\n  mean_photons: 1\n"
        )
        cfg = load_run_config(write_config(tmp_path, text))
        assert cfg.stimulus.separation == pytest.approx(180e-9)

    def test_unknown_key_rejected_with_location(self, tmp_path):
        text = BASE.replace("  seed: 7", "  seed: 7\n  sede: 8")
        with pytest.raises(ConfigError, match="run.*sede"):
            load_run_config(write_config(tmp_path, text))

    def test_unknown_section_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="lazer"):
            load_run_config(write_config(tmp_path, BASE + "lazer: {}\n"))

    def test_missing_required_key_named(self, tmp_path):
        text = BASE.replace("  bias_current: 25.0 uA\n", "")
        with pytest.raises(ConfigError, match="bias_current"):
            load_run_config(write_config(tmp_path, text))

    def test_missing_section_rejected(self, tmp_path):
        text = BASE.replace("run:\n  duration: 0.5 s\n  seed: 7\n", "")
        with pytest.raises(ConfigError, match="run"):
            load_run_config(write_config(tmp_path, text))

    def test_digest_tracks_content(self, tmp_path):
        a = load_run_config(write_config(tmp_path, BASE))
        b = load_run_config(write_config(tmp_path, BASE.replace("seed: 7", "seed: 8")))
        assert a.digest != b.digest

    def test_example_configs_load(self):
        for name in (
            "dark_counts_25p0uA.yaml",
            "laser_0p5MHz.yaml",
            "double_pulse_180ns.yaml",
        ):
            cfg = load_run_config(f"configs/{name}")
            assert cfg.duration > 0
