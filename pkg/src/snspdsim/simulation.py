"""Event-level click-stream simulation.

Dark counts follow an inhomogeneous Poisson process whose rate tracks the
effective bias current; laser pulses detect with a Poissonian photon model;
every click feeds a bias-perturbation kernel back into the effective bias,
which is what produces afterpulsing, and the current recovery after a click
is what produces the dead time.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import CircuitParams, PerturbationKernel, nanowire_current
from .errors import ConfigError, SimulationError

PS_PER_SECOND = 1e12

MODE_NONE = "none"
MODE_PERIODIC = "periodic"
MODE_DOUBLE_PULSE = "double-pulse"

LATCH_NONE = "none"
LATCH_PERMANENT = "permanent-until-reset"


@dataclass(frozen=True)
class RateModel:
    """Bias-dependent dark rate and detection efficiency.

    Both laws are exponentials in the bias current around `reference_bias`;
    efficiency saturates at `efficiency_max`.
    """

    dark_rate_ref: float         # counts/s at reference_bias
    dark_rate_slope: float       # 1/A
    efficiency_max: float
    efficiency_slope: float      # 1/A
    reference_bias: float        # A

    def __post_init__(self):
        if self.dark_rate_ref < 0:
            raise ConfigError("dark_rate_ref must be non-negative")
        if not 0.0 <= self.efficiency_max <= 1.0:
            raise ConfigError("efficiency_max must lie in [0, 1]")
        if self.dark_rate_slope < 0 or self.efficiency_slope < 0:
            raise ConfigError("rate slopes must be non-negative")
        if self.reference_bias <= 0:
            raise ConfigError("reference_bias must be strictly positive")

    def dark_rate(self, bias):
        return self.dark_rate_ref * np.exp(self.dark_rate_slope * (np.asarray(bias) - self.reference_bias))

    def efficiency(self, bias):
        raw = self.efficiency_max * np.exp(self.efficiency_slope * (np.asarray(bias) - self.reference_bias))
        return np.minimum(self.efficiency_max, raw)


@dataclass(frozen=True)
class DetectorModel:
    circuit: CircuitParams
    rates: RateModel
    kernel: PerturbationKernel | None = None
    shunt_enabled: bool = True
    latch_policy: str = LATCH_NONE

    def __post_init__(self):
        if self.latch_policy not in (LATCH_NONE, LATCH_PERMANENT):
            raise ConfigError(f"unknown latch_policy {self.latch_policy!r}")
        if self.kernel is not None and self.kernel.duration > 2e-6 * (1 + 1e-9):
            raise ConfigError("kernel duration must not exceed 2 us")

    @property
    def can_latch(self) -> bool:
        # the shunt diverts the current and prevents latching outright
        return self.latch_policy == LATCH_PERMANENT and not self.shunt_enabled

    def describe(self) -> dict:
        c, r = self.circuit, self.rates
        return {
            "bias_a": c.bias_current,
            "critical_a": c.critical_current,
            "kinetic_inductance_h": c.kinetic_inductance,
            "hotspot_resistance_ohm": c.hotspot_resistance,
            "load_resistance_ohm": c.load_resistance,
            "dark_rate_ref_cps": r.dark_rate_ref,
            "dark_rate_slope_per_a": r.dark_rate_slope,
            "efficiency_max": r.efficiency_max,
            "efficiency_slope_per_a": r.efficiency_slope,
            "reference_bias_a": r.reference_bias,
            "kernel_peak_a": 0.0 if self.kernel is None else self.kernel.peak,
            "shunt_enabled": self.shunt_enabled,
            "latch_policy": self.latch_policy,
        }


@dataclass(frozen=True)
class StimulusConfig:
    mode: str = MODE_NONE
    rate: float = 0.0             # Hz, periodic mode
    mean_photons: float = 0.0     # photons per pulse
    separation: float = 0.0       # s, double-pulse mode
    window: float = 2e-6          # s, double-pulse frame length

    def __post_init__(self):
        if self.mode not in (MODE_NONE, MODE_PERIODIC, MODE_DOUBLE_PULSE):
            raise ConfigError(f"unknown stimulus mode {self.mode!r}")
        if self.mean_photons < 0:
            raise ConfigError("mean_photons must be non-negative")
        if self.mode == MODE_PERIODIC and self.rate <= 0:
            raise ConfigError("periodic stimulus needs rate > 0")
        if self.mode == MODE_DOUBLE_PULSE:
            if self.separation <= 0:
                raise ConfigError("double-pulse separation must be positive")
            if self.window <= 0:
                raise ConfigError("double-pulse window must be positive")
            if self.separation >= self.window:
                raise ConfigError(
                    f"separation {self.separation:.3e} s must be smaller than "
                    f"the {self.window:.3e} s window"
                )

    @classmethod
    def none(cls) -> "StimulusConfig":
        return cls()

    @classmethod
    def periodic(cls, rate: float, mean_photons: float) -> "StimulusConfig":
        return cls(mode=MODE_PERIODIC, rate=rate, mean_photons=mean_photons)

    @classmethod
    def double_pulse(
        cls, separation: float, mean_photons: float, window: float = 2e-6
    ) -> "StimulusConfig":
        return cls(
            mode=MODE_DOUBLE_PULSE,
            separation=separation,
            mean_photons=mean_photons,
            window=window,
        )

    def describe(self) -> dict:
        out = {"stimulus_mode": self.mode}
        if self.mode == MODE_PERIODIC:
            out["rate_hz"] = self.rate
            out["mean_photons"] = self.mean_photons
        elif self.mode == MODE_DOUBLE_PULSE:
            out["separation_ps"] = int(round(self.separation * PS_PER_SECOND))
            out["window_ps"] = int(round(self.window * PS_PER_SECOND))
            out["mean_photons"] = self.mean_photons
        return out


@dataclass(frozen=True)
class StimulusTrain:
    """Optical pulse times plus the trigger reference channel, in ps.

    For double-pulse frames the sync channel carries only the first pulse of
    each pair, which is the time reference the window analyses expect.
    """

    pulse_times_ps: np.ndarray
    sync_times_ps: np.ndarray


def make_stimulus(config: StimulusConfig, duration: float) -> StimulusTrain:
    empty = np.empty(0, dtype=np.int64)
    if config.mode == MODE_NONE or duration <= 0:
        return StimulusTrain(empty, empty)
    duration_ps = int(round(duration * PS_PER_SECOND))
    if config.mode == MODE_PERIODIC:
        period_ps = int(round(PS_PER_SECOND / config.rate))
        n = (duration_ps + period_ps - 1) // period_ps
        times = np.arange(n, dtype=np.int64) * period_ps
        times = times[times < duration_ps]
        return StimulusTrain(times, times)
    # double-pulse frames
    window_ps = int(round(config.window * PS_PER_SECOND))
    sep_ps = int(round(config.separation * PS_PER_SECOND))
    n = duration_ps // window_ps
    starts = np.arange(n, dtype=np.int64) * window_ps
    pulses = np.empty(2 * n, dtype=np.int64)
    pulses[0::2] = starts
    pulses[1::2] = starts + sep_ps
    pulses = pulses[pulses < duration_ps]
    return StimulusTrain(pulses, starts[starts < duration_ps])


@dataclass(frozen=True, eq=False)
class TimeTagStream:
    """Click and sync timestamps in integer picoseconds."""

    detector_events: np.ndarray
    sync_events: np.ndarray
    duration_ps: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("detector_events", "sync_events"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            object.__setattr__(self, name, arr)
            if arr.size:
                if np.any(np.diff(arr) <= 0):
                    raise ValueError(f"{name} must be strictly increasing")
                if arr[0] < 0 or arr[-1] > self.duration_ps:
                    raise ValueError(f"{name} must lie within [0, duration]")
        if self.duration_ps < 0:
            raise ValueError("duration_ps must be non-negative")

    def __eq__(self, other):
        if not isinstance(other, TimeTagStream):
            return NotImplemented
        return (
            self.duration_ps == other.duration_ps
            and np.array_equal(self.detector_events, other.detector_events)
            and np.array_equal(self.sync_events, other.sync_events)
            and self.metadata == other.metadata
        )

    @property
    def duration_seconds(self) -> float:
        return self.duration_ps / PS_PER_SECOND

    @property
    def detector_seconds(self) -> np.ndarray:
        return self.detector_events / PS_PER_SECOND

    @property
    def sync_seconds(self) -> np.ndarray:
        return self.sync_events / PS_PER_SECOND


def effective_bias(model: DetectorModel, t, click_history=()):
    """Effective bias current at time(s) `t` given past click times (seconds).

    Recovery is driven by the most recent click; every click inside the
    kernel support adds its perturbation on top.
    """
    t = np.asarray(t, dtype=np.float64)
    history = np.asarray(click_history, dtype=np.float64)
    if history.size == 0:
        out = np.full(t.shape, model.circuit.bias_current)
    else:
        out = nanowire_current(model.circuit, t - history[-1])
        out = np.asarray(out, dtype=np.float64).copy()
        if model.kernel is not None:
            for tc in history:
                out += model.kernel.value(t - tc)
    return float(out) if out.ndim == 0 else out


def branching_probability(
    model: DetectorModel, window: float = 1e-6, n_grid: int = 20_001
) -> float:
    """Probability that a click triggers at least one further click within
    `window` seconds, from the model's own post-click dark rate:
    1 - exp(-integral of dark_rate(I_recovery + kernel)).

    Under the branching picture this is the per-click afterpulse
    probability, so train lengths follow P(n) = p**(n-1) * (1-p).
    """
    s = np.linspace(0.0, window, n_grid)
    bias = effective_bias(model, s, [0.0])
    lam = model.rates.dark_rate(bias)
    return 1.0 - math.exp(-float(np.trapezoid(lam, s)))


class _BlockUniforms:
    """Draws uniforms from a Generator in blocks; sequential and deterministic."""

    __slots__ = ("_rng", "_block", "_i", "_n")

    def __init__(self, rng: np.random.Generator, block_size: int = 1 << 14):
        self._rng = rng
        self._n = block_size
        self._block = rng.random(block_size).tolist()
        self._i = 0

    def next(self) -> float:
        i = self._i
        if i == self._n:
            self._block = self._rng.random(self._n).tolist()
            i = 0
        self._i = i + 1
        return self._block[i]


def simulate(
    model: DetectorModel,
    stimulus: StimulusConfig,
    duration: float,
    seed,
) -> TimeTagStream:
    """Generate a reproducible TimeTagStream for the given model and drive.

    Dark counts are thinned against an adaptive envelope built from the
    kernel's precomputed max-remaining table: at any instant the envelope is
    dark_rate(I_b + sum of the remaining maxima of the active kernels),
    which can only decay until the next click raises it again. The envelope
    therefore dominates the true rate by construction; a violation would
    indicate internal corruption and raises SimulationError.
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    duration_ps = int(round(duration * PS_PER_SECOND))
    train = make_stimulus(stimulus, duration)
    metadata = _run_metadata(model, stimulus, duration_ps, seed)
    if duration_ps == 0:
        return TimeTagStream(
            np.empty(0, np.int64), np.empty(0, np.int64), 0, metadata
        )
    rng = np.random.default_rng(seed)
    detector = _run_engine(model, stimulus, train, duration, rng)
    return TimeTagStream(detector, train.sync_times_ps, duration_ps, metadata)


def _run_metadata(model, stimulus, duration_ps, seed) -> dict:
    desc = {"duration_ps": duration_ps, **model.describe(), **stimulus.describe()}
    digest = hashlib.sha256(
        json.dumps(desc, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()[:16]
    out = dict(desc)
    out["seed"] = _seed_label(seed)
    out["config_digest"] = digest
    return out


def _seed_label(seed) -> str:
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy if isinstance(seed.entropy, (list, tuple)) else (seed.entropy,)
        return ".".join(str(x) for x in (*entropy, *seed.spawn_key))
    return str(seed)


def _run_engine(
    model: DetectorModel,
    stimulus: StimulusConfig,
    train: StimulusTrain,
    duration: float,
    rng: np.random.Generator,
) -> np.ndarray:
    circ = model.circuit
    rates = model.rates
    i_b = circ.bias_current
    i_c = circ.critical_current
    i_ss = circ.resistive_branch_current
    i_end = circ.hotspot_end_current
    t_hs = circ.hotspot_duration
    tau_fall = circ.fall_tau
    tau_rec = circ.recovery_tau
    r_ref = rates.dark_rate_ref
    i_ref = rates.reference_bias
    g_dark = rates.dark_rate_slope
    eta_max = rates.efficiency_max
    g_eta = rates.efficiency_slope
    mu = stimulus.mean_photons

    kernel = model.kernel
    if kernel is not None and kernel.peak == 0.0 and not np.any(kernel.samples):
        kernel = None  # an identically zero kernel has no effect
    if kernel is not None:
        ksamp = kernel.samples.tolist()
        kmaxrem = kernel.max_remaining().tolist()
        ksp = kernel.sample_period
        klast = len(ksamp) - 1
        kdur = klast * ksp
    else:
        ksamp = kmaxrem = None
        ksp = kdur = 0.0
        klast = 0

    can_latch = model.can_latch
    pulses_ps = train.pulse_times_ps
    pulse_s = (pulses_ps * 1e-12).tolist()
    pulses_ps = pulses_ps.tolist()
    n_pulses = len(pulse_s)

    uniforms = _BlockUniforms(rng)
    exp = math.exp
    log = math.log

    out_ps: list[int] = []
    active: list[float] = []      # click times with a live kernel
    t_last = -1.0                 # most recent click, <0 means none yet
    t = 0.0
    pulse_idx = 0
    latched = False

    def bias_at(when: float) -> float:
        if t_last < 0:
            i = i_b
        else:
            s = when - t_last
            if s <= t_hs:
                i = i_ss + (i_b - i_ss) * exp(-s / tau_fall)
            else:
                i = i_b - (i_b - i_end) * exp(-(s - t_hs) / tau_rec)
        for tc in active:
            d = when - tc
            if 0.0 <= d < kdur:
                x = d / ksp
                j = int(x)
                f = x - j
                i += ksamp[j] * (1.0 - f) + ksamp[j + 1] * f
        return i

    def register_click(when: float, when_ps: int) -> None:
        nonlocal t_last, latched
        out_ps.append(when_ps)
        t_last = when
        if kernel is not None:
            active.append(when)
            if can_latch:
                # scan the kernel horizon for the first crossing of I_c
                for j in range(klast + 1):
                    if bias_at(when + j * ksp) >= i_c:
                        latched = True
                        return

    duration_ps = round(duration * PS_PER_SECOND)
    next_uniform = uniforms.next

    while not latched:
        # adaptive thinning envelope: recovery never exceeds I_b, and each
        # active kernel contributes at most its remaining maximum
        i_env = i_b
        if active:
            if t - active[0] >= kdur:
                active = [tc for tc in active if t - tc < kdur]
            for tc in active:
                d = t - tc
                if d < kdur:
                    i_env += kmaxrem[int(d / ksp)]
        envelope = r_ref * exp(g_dark * (i_env - i_ref))
        gap = -log(1.0 - next_uniform()) / envelope
        if gap <= 0.0:
            continue
        proposal = t + gap

        if pulse_idx < n_pulses and pulse_s[pulse_idx] <= proposal:
            t = pulse_s[pulse_idx]
            t_ps = pulses_ps[pulse_idx]
            pulse_idx += 1
            if active and t - active[0] >= kdur:
                active = [tc for tc in active if t - tc < kdur]
            eta = eta_max * exp(g_eta * (bias_at(t) - i_ref))
            if eta > eta_max:
                eta = eta_max
            p_click = 1.0 - exp(-mu * eta) if mu > 0.0 else 0.0
            if next_uniform() < p_click and (not out_ps or t_ps > out_ps[-1]):
                register_click(t, t_ps)
            continue

        if proposal >= duration:
            break
        t = proposal
        # inline bias_at: this branch dominates the run time
        if t_last < 0:
            i_now = i_b
        else:
            s = t - t_last
            if s <= t_hs:
                i_now = i_ss + (i_b - i_ss) * exp(-s / tau_fall)
            else:
                i_now = i_b - (i_b - i_end) * exp(-(s - t_hs) / tau_rec)
        if active:
            if t - active[0] >= kdur:
                active = [tc for tc in active if t - tc < kdur]
            for tc in active:
                d = t - tc
                if d < kdur:
                    x = d / ksp
                    j = int(x)
                    f = x - j
                    i_now += ksamp[j] * (1.0 - f) + ksamp[j + 1] * f
        rate = r_ref * exp(g_dark * (i_now - i_ref))
        if rate > envelope * (1.0 + 1e-9):
            raise SimulationError(
                f"thinning envelope violated at t={t:.6e}: rate {rate:.3e} "
                f"> envelope {envelope:.3e}"
            )
        if next_uniform() * envelope <= rate:
            t_ps = round(t * PS_PER_SECOND)
            # sub-ps coincidences cannot be resolved; drop them
            if (not out_ps or t_ps > out_ps[-1]) and t_ps <= duration_ps:
                register_click(t, t_ps)

    return np.asarray(out_ps, dtype=np.int64)
