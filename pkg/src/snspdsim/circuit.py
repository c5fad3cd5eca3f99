"""Lumped-element model of the nanowire readout loop.

Covers the post-click current dynamics in the nanowire, the voltage pulse
seen across the load resistor, the band-limited amplifier chain (a cascaded
biquad band-pass), threshold discrimination of the readout trace, and the
bias-perturbation kernel that couples the readout transient back onto the
effective bias current.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import ConfigError, PrecisionError

# Grid fine enough to resolve the sub-ns current drop with the default
# constants (fall constant ~0.1 ns).
DEFAULT_SAMPLE_PERIOD = 0.025e-9

# The stated grid requirement is sample_period <= fall_constant / 4; a 1%
# slack keeps the documented 0.025 ns default valid when the fall constant
# works out to 0.0995 ns.
_GRID_SLACK = 1.01


@dataclass(frozen=True)
class CircuitParams:
    """Electrical constants of the nanowire / readout loop (SI units)."""

    kinetic_inductance: float          # H
    hotspot_resistance: float          # ohm
    load_resistance: float             # ohm
    bias_current: float                # A
    critical_current: float            # A
    amplifier_gain_db: float = 56.0
    hotspot_duration: float = 1e-9     # s, lifetime of the resistive segment

    def __post_init__(self):
        for name in (
            "kinetic_inductance",
            "hotspot_resistance",
            "load_resistance",
            "bias_current",
            "critical_current",
            "hotspot_duration",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        # bias_current >= critical_current is representable on purpose: an
        # over-biased detector exists physically (relaxation oscillations),
        # it is just not a valid operating point.

    @property
    def recovery_tau(self) -> float:
        """Current-recovery time constant L_k / R_L."""
        return self.kinetic_inductance / self.load_resistance

    @property
    def fall_tau(self) -> float:
        """Current-drop time constant L_k / (R_n + R_L)."""
        return self.kinetic_inductance / (self.hotspot_resistance + self.load_resistance)

    @property
    def resistive_branch_current(self) -> float:
        """Steady-state nanowire current while the hotspot persists."""
        return (
            self.bias_current
            * self.load_resistance
            / (self.hotspot_resistance + self.load_resistance)
        )

    @property
    def hotspot_end_current(self) -> float:
        """Nanowire current at the instant the hotspot heals."""
        i_ss = self.resistive_branch_current
        return i_ss + (self.bias_current - i_ss) * math.exp(
            -self.hotspot_duration / self.fall_tau
        )

    @property
    def amplifier_gain(self) -> float:
        return 10.0 ** (self.amplifier_gain_db / 20.0)

    @property
    def is_validly_biased(self) -> bool:
        return self.bias_current < self.critical_current


@dataclass(frozen=True, eq=False)
class Waveform:
    """Uniformly sampled trace (volts or amperes)."""

    samples: np.ndarray
    sample_period: float
    t0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.sample_period <= 0:
            raise ValueError("sample_period must be strictly positive")
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size * self.sample_period

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) * self.sample_period


def write_waveform_csv(wave: Waveform, path) -> None:
    """Two columns `time_s,value`, full double precision."""
    with open(path, "w", newline="") as fh:
        fh.write("time_s,value\n")
        for t, v in zip(wave.times.tolist(), wave.samples.tolist()):
            fh.write(f"{t!r},{v!r}\n")


def nanowire_current(params: CircuitParams, t):
    """Nanowire current at time `t` (seconds) after a click.

    Two-phase response: while the hotspot persists the current decays from
    I_b toward the resistive-branch value with the fall constant
    L_k/(R_n+R_L); afterwards it recovers toward I_b with tau = L_k/R_L.
    Accepts a scalar or an array; negative times are a domain error.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("time since click must be non-negative")
    i_b = params.bias_current
    i_ss = params.resistive_branch_current
    t_hs = params.hotspot_duration
    falling = i_ss + (i_b - i_ss) * np.exp(-np.minimum(t, t_hs) / params.fall_tau)
    recovering = i_b - (i_b - params.hotspot_end_current) * np.exp(
        -np.maximum(t - t_hs, 0.0) / params.recovery_tau
    )
    out = np.where(t <= t_hs, falling, recovering)
    return float(out) if out.ndim == 0 else out


def _check_grid(params: CircuitParams, sample_period: float) -> None:
    required = params.fall_tau / 4.0
    if sample_period > required * _GRID_SLACK:
        raise PrecisionError(
            f"sample_period {sample_period:.3e} s does not resolve the current "
            f"fall time; need sample_period <= {required:.3e} s"
        )


def load_voltage_waveform(
    params: CircuitParams, sample_period: float, duration: float
) -> Waveform:
    """Voltage across the load resistor after a click at t = 0.

    v(t) = (I_b - i_nanowire(t)) * R_L: the current diverted into the load.
    """
    _check_grid(params, sample_period)
    if duration <= 0:
        raise ValueError("duration must be strictly positive")
    t = np.arange(int(round(duration / sample_period))) * sample_period
    v = (params.bias_current - nanowire_current(params, t)) * params.load_resistance
    return Waveform(v, sample_period)


def readout_pulse(
    params: CircuitParams,
    sample_period: float = DEFAULT_SAMPLE_PERIOD,
    duration: float = 2e-6,
    click_time: float = 0.0,
    cascade: "BiquadCascade | None" = None,
    amplified: bool = True,
) -> Waveform:
    """The detection pulse as it appears at the discriminator.

    Negative-going (the observed polarity), amplified by the chain gain and
    optionally shaped by a band-pass cascade.
    """
    _check_grid(params, sample_period)
    if click_time < 0:
        raise ValueError("click_time must be non-negative")
    t = np.arange(int(round(duration / sample_period))) * sample_period
    v = np.zeros_like(t)
    after = t >= click_time
    v[after] = -(
        params.bias_current - nanowire_current(params, t[after] - click_time)
    ) * params.load_resistance
    if amplified:
        v *= params.amplifier_gain
    wave = Waveform(v, sample_period)
    if cascade is not None:
        wave = apply_filter(cascade, wave)
    return wave


@dataclass(frozen=True)
class FilterSpec:
    """Band-pass specification: even order, cascaded as biquad sections."""

    order: int
    passband_low: float       # Hz
    passband_high: float      # Hz

    def __post_init__(self):
        if self.order < 2 or self.order % 2 != 0:
            raise ConfigError("filter order must be even and >= 2")
        if not 0 < self.passband_low < self.passband_high:
            raise ConfigError("need 0 < passband_low < passband_high")


@dataclass(frozen=True, eq=False)
class BiquadCascade:
    """Discrete-time second-order sections tied to a design sample period."""

    sos: np.ndarray           # (n_sections, 6), scipy layout
    sample_period: float

    @property
    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots(section[3:]) for section in self.sos])

    def response(self, frequencies) -> np.ndarray:
        """Complex frequency response at the given frequencies (Hz)."""
        z = np.exp(2j * np.pi * np.asarray(frequencies, dtype=float) * self.sample_period)
        zi = 1.0 / z
        h = np.ones_like(z)
        for b0, b1, b2, a0, a1, a2 in self.sos:
            h *= (b0 + b1 * zi + b2 * zi**2) / (a0 + a1 * zi + a2 * zi**2)
        return h

    def magnitude_db(self, frequencies) -> np.ndarray:
        mag = np.abs(self.response(frequencies))
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(mag)


def design_bandpass(spec: FilterSpec, sample_period: float) -> BiquadCascade:
    """Butterworth band-pass realized by bilinear transform with prewarped
    band edges, returned as cascaded second-order sections."""
    if sample_period <= 0:
        raise ConfigError("sample_period must be strictly positive")
    nyquist = 0.5 / sample_period
    if spec.passband_high >= nyquist:
        raise ConfigError(
            f"passband_high {spec.passband_high:.3e} Hz is at or above the "
            f"Nyquist frequency {nyquist:.3e} Hz"
        )
    sos = signal.butter(
        spec.order // 2,
        [spec.passband_low, spec.passband_high],
        btype="bandpass",
        output="sos",
        fs=1.0 / sample_period,
    )
    return BiquadCascade(np.asarray(sos, dtype=np.float64), sample_period)


def apply_filter(cascade: BiquadCascade, wave: Waveform) -> Waveform:
    """Causal filtering; output keeps the input's length and grid."""
    if not math.isclose(cascade.sample_period, wave.sample_period, rel_tol=1e-9):
        raise ConfigError(
            f"waveform sample period {wave.sample_period:.3e} s does not match "
            f"the filter design period {cascade.sample_period:.3e} s"
        )
    out = signal.sosfilt(cascade.sos, wave.samples)
    return Waveform(out, wave.sample_period, wave.t0)


def discriminate(wave: Waveform, threshold: float, holdoff: float = 0.0) -> np.ndarray:
    """Times of threshold crossings, sub-sample by linear interpolation.

    A negative threshold registers downward crossings, a positive one upward
    crossings; crossings within `holdoff` of an accepted event are dropped.
    """
    if threshold == 0.0:
        raise ValueError("threshold must be nonzero; its sign selects the pulse polarity")
    if holdoff < 0:
        raise ValueError("holdoff must be non-negative")
    v = wave.samples
    if threshold < 0:
        armed = v[:-1] > threshold
        fired = v[1:] <= threshold
    else:
        armed = v[:-1] < threshold
        fired = v[1:] >= threshold
    crossings = np.nonzero(armed & fired)[0]
    events = []
    last = -math.inf
    for k in crossings:
        frac = (v[k] - threshold) / (v[k] - v[k + 1])
        t = wave.t0 + (k + frac) * wave.sample_period
        if t - last >= holdoff:
            events.append(t)
            last = t
    return np.asarray(events, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class PerturbationKernel:
    """Additive bias-current transient following a click, sampled vs time
    since the click. Zero outside the sampled support."""

    samples: np.ndarray       # amperes
    sample_period: float

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.sample_period <= 0:
            raise ConfigError("kernel sample_period must be strictly positive")
        if self.samples.ndim != 1 or self.samples.size < 2:
            raise ConfigError("kernel needs at least two samples")

    @property
    def duration(self) -> float:
        return (self.samples.size - 1) * self.sample_period

    @property
    def peak(self) -> float:
        return float(np.max(self.samples, initial=0.0))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.sample_period

    def value(self, dt):
        """Kernel amplitude `dt` seconds after a click (0 outside support)."""
        return np.interp(dt, self.times, self.samples, left=0.0, right=0.0)

    def max_remaining(self) -> np.ndarray:
        """For each sample index i, max of the positive part over [i:].

        This table bounds future kernel contributions and only ever decays,
        which is what makes it usable as a thinning envelope.
        """
        positive = np.maximum(self.samples, 0.0)
        return np.maximum.accumulate(positive[::-1])[::-1]


MAX_KERNEL_DURATION = 2e-6


def gaussian_kernel(
    amplitude: float,
    center: float = 180e-9,
    width: float = 40e-9,
    sample_period: float = 1e-9,
    extent: float = 5.0,
) -> PerturbationKernel:
    """Parametric Gaussian bump peaking `center` seconds after a click."""
    if amplitude < 0:
        raise ConfigError("kernel amplitude must be non-negative")
    if width <= 0 or center < 0:
        raise ConfigError("kernel width must be positive and center non-negative")
    span = min(center + extent * width, MAX_KERNEL_DURATION)
    n = max(int(round(span / sample_period)) + 1, 2)
    t = np.arange(n) * sample_period
    return PerturbationKernel(amplitude * np.exp(-0.5 * ((t - center) / width) ** 2), sample_period)


def overshoot_kernel(
    filtered_pulse: Waveform,
    peak_amplitude: float | None = None,
    amps_per_volt: float | None = None,
    click_time: float = 0.0,
    time_offset: float = 0.0,
) -> PerturbationKernel:
    """Bias perturbation derived from a filtered detection pulse.

    Takes the pulse residual after its first zero crossing past the main
    (negative) lobe and converts volts to an equivalent bias current, either
    by pinning the residual peak to `peak_amplitude` or with an explicit
    `amps_per_volt` coupling. `time_offset` shifts the kernel to model the
    lag between the readout transient and the current in the wire.
    """
    if (peak_amplitude is None) == (amps_per_volt is None):
        raise ConfigError("give exactly one of peak_amplitude / amps_per_volt")
    if peak_amplitude is not None and peak_amplitude < 0:
        raise ConfigError("peak_amplitude must be non-negative")
    sp = filtered_pulse.sample_period
    v = filtered_pulse.samples
    imin = int(np.argmin(v))
    after = v[imin:]
    crossings = np.nonzero((after[:-1] < 0) & (after[1:] >= 0))[0]
    n_zero = max(int(round(MAX_KERNEL_DURATION / sp)) + 1, 2)
    if v[imin] >= 0 or len(crossings) == 0:
        return PerturbationKernel(np.zeros(n_zero), sp)
    start = imin + int(crossings[0]) + 1
    residual = after[int(crossings[0]) + 1 :]
    if peak_amplitude is not None:
        top = float(np.max(residual, initial=0.0))
        if top <= 0.0:
            return PerturbationKernel(np.zeros(n_zero), sp)
        scale = peak_amplitude / top
    else:
        scale = amps_per_volt
    t_start = start * sp - click_time + time_offset
    lead = max(int(round(t_start / sp)), 0)
    samples = np.concatenate([np.zeros(lead), residual * scale])
    if (samples.size - 1) * sp > MAX_KERNEL_DURATION:
        samples = samples[: int(round(MAX_KERNEL_DURATION / sp)) + 1]
    if samples.size < 2:
        samples = np.concatenate([samples, [0.0]])
    return PerturbationKernel(samples, sp)
