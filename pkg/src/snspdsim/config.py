"""Run configuration: a YAML file with `circuit`, `rates`, `kernel`,
`detector`, `stimulus` and `run` sections.

Every physical value is either a bare number in SI base units or a string
with an SI-prefixed unit ("25 uA", "180 ns", "0.5 MHz"). Unknown keys are
rejected so typos cannot silently fall back to defaults.

Example:

    circuit:
      kinetic_inductance: 500 nH
      hotspot_resistance: 5 kohm
      load_resistance: 25 ohm
      bias_current: 25.0 uA
      critical_current: 25.3 uA
      amplifier_gain_db: 56
      hotspot_duration: 1 ns
    rates:
      dark_rate_ref: 3200 Hz
      dark_rate_slope_per_amp: 2.0934e6
      efficiency_max: 0.025
      efficiency_slope_per_amp: 1.2e7
      reference_bias: 25.0 uA
    kernel:
      type: gaussian            # gaussian | from-filter | none
      amplitude: 3.2 uA
      center: 180 ns
      width: 40 ns
    detector:
      shunt_enabled: true
      latch_policy: none        # none | permanent-until-reset
    stimulus:
      mode: none                # none | periodic | double-pulse
    run:
      duration: 3 s
      seed: 1
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import yaml

from . import circuit as circ
from .errors import ConfigError
from .quantities import parse_quantity
from .simulation import DetectorModel, RateModel, StimulusConfig

_SECTIONS = ("circuit", "rates", "kernel", "detector", "stimulus", "run")
_REQUIRED = object()


def _take(section: dict, section_name: str, key: str, default=_REQUIRED):
    if key in section:
        return section.pop(key)
    if default is _REQUIRED:
        raise ConfigError(f"{section_name}: missing required key {key!r}")
    return default


def _reject_unknown(section: dict, section_name: str) -> None:
    if section:
        key = sorted(section)[0]
        raise ConfigError(f"{section_name}: unknown key {key!r}")


def _q(section, section_name, key, dimension, default=_REQUIRED) -> float:
    raw = _take(section, section_name, key, default)
    return parse_quantity(raw, dimension, f"{section_name}.{key}")


@dataclass(frozen=True)
class RunConfig:
    model: DetectorModel
    stimulus: StimulusConfig
    duration: float
    seed: int
    output: str | None
    digest: str


def _build_circuit(section: dict) -> circ.CircuitParams:
    name = "circuit"
    params = circ.CircuitParams(
        kinetic_inductance=_q(section, name, "kinetic_inductance", "inductance"),
        hotspot_resistance=_q(section, name, "hotspot_resistance", "resistance"),
        load_resistance=_q(section, name, "load_resistance", "resistance"),
        bias_current=_q(section, name, "bias_current", "current"),
        critical_current=_q(section, name, "critical_current", "current"),
        amplifier_gain_db=_q(section, name, "amplifier_gain_db", "gain", 56.0),
        hotspot_duration=_q(section, name, "hotspot_duration", "time", 1e-9),
    )
    _reject_unknown(section, name)
    return params


def _build_rates(section: dict) -> RateModel:
    name = "rates"
    rates = RateModel(
        dark_rate_ref=_q(section, name, "dark_rate_ref", "frequency"),
        dark_rate_slope=float(_take(section, name, "dark_rate_slope_per_amp")),
        efficiency_max=float(_take(section, name, "efficiency_max")),
        efficiency_slope=float(_take(section, name, "efficiency_slope_per_amp")),
        reference_bias=_q(section, name, "reference_bias", "current"),
    )
    _reject_unknown(section, name)
    return rates


def _build_kernel(section: dict, circuit_params: circ.CircuitParams):
    name = "kernel"
    kind = str(_take(section, name, "type", "gaussian" if section else "none")).lower()
    if kind == "none":
        _reject_unknown(section, name)
        return None
    if kind == "gaussian":
        kernel = circ.gaussian_kernel(
            amplitude=_q(section, name, "amplitude", "current"),
            center=_q(section, name, "center", "time", 180e-9),
            width=_q(section, name, "width", "time", 40e-9),
        )
        _reject_unknown(section, name)
        return kernel
    if kind == "from-filter":
        spec = circ.FilterSpec(
            order=int(_take(section, name, "order", 4)),
            passband_low=_q(section, name, "passband_low", "frequency"),
            passband_high=_q(section, name, "passband_high", "frequency"),
        )
        sample_period = _q(section, name, "sample_period", "time", circ.DEFAULT_SAMPLE_PERIOD)
        pulse_duration = _q(section, name, "pulse_duration", "time", 2e-6)
        peak = section.pop("peak_amplitude", None)
        coupling = section.pop("amps_per_volt", None)
        offset = _q(section, name, "time_offset", "time", 0.0)
        _reject_unknown(section, name)
        cascade = circ.design_bandpass(spec, sample_period)
        pulse = circ.readout_pulse(
            circuit_params, sample_period, pulse_duration, cascade=cascade
        )
        return circ.overshoot_kernel(
            pulse,
            peak_amplitude=None if peak is None else parse_quantity(peak, "current", "kernel.peak_amplitude"),
            amps_per_volt=None if coupling is None else float(coupling),
            time_offset=offset,
        )
    raise ConfigError(f"kernel: unknown type {kind!r}")


def _build_stimulus(section: dict) -> StimulusConfig:
    name = "stimulus"
    mode = str(_take(section, name, "mode", "none")).lower()
    if mode == "none":
        _reject_unknown(section, name)
        return StimulusConfig.none()
    if mode == "periodic":
        config = StimulusConfig.periodic(
            rate=_q(section, name, "rate", "frequency"),
            mean_photons=float(_take(section, name, "mean_photons")),
        )
        _reject_unknown(section, name)
        return config
    if mode == "double-pulse":
        config = StimulusConfig.double_pulse(
            separation=_q(section, name, "separation", "time"),
            mean_photons=float(_take(section, name, "mean_photons")),
            window=_q(section, name, "window", "time", 2e-6),
        )
        _reject_unknown(section, name)
        return config
    raise ConfigError(f"stimulus: unknown mode {mode!r}")


def load_run_config(path) -> RunConfig:
    with open(path, "r") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config file must contain a mapping of sections")
    digest = hashlib.sha256(
        json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str).encode()
    ).hexdigest()[:16]
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown section {sorted(unknown)[0]!r}")
    for section_name in ("circuit", "rates", "run"):
        if section_name not in raw:
            raise ConfigError(f"missing required section {section_name!r}")
    sections = {k: dict(raw.get(k) or {}) for k in _SECTIONS}

    circuit_params = _build_circuit(sections["circuit"])
    rates = _build_rates(sections["rates"])
    kernel = _build_kernel(sections["kernel"], circuit_params)

    det = sections["detector"]
    shunt = bool(_take(det, "detector", "shunt_enabled", True))
    latch = str(_take(det, "detector", "latch_policy", "none"))
    _reject_unknown(det, "detector")

    model = DetectorModel(
        circuit=circuit_params,
        rates=rates,
        kernel=kernel,
        shunt_enabled=shunt,
        latch_policy=latch,
    )
    stimulus = _build_stimulus(sections["stimulus"])

    run = sections["run"]
    duration = _q(run, "run", "duration", "time")
    seed = int(_take(run, "run", "seed", 0))
    output = _take(run, "run", "output", None)
    _reject_unknown(run, "run")
    if duration < 0:
        raise ConfigError("run.duration must be non-negative")

    return RunConfig(
        model=model,
        stimulus=stimulus,
        duration=duration,
        seed=seed,
        output=None if output is None else str(output),
        digest=digest,
    )
