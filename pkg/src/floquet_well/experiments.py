"""Experiments: quasienergy sweeps, crossings, tunneling times, CDT and switching."""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .model import DrivingSchedule, ModelParams, StateAmplitudes, TimeSeries
from .propagate import integrate, monodromy, numeric_quasienergies, propagate_segment

log = logging.getLogger(__name__)

THREADS_ENV = "FLOQUET_WELL_THREADS"

_PAIRS = ((0, 1), (0, 2), (1, 2))
_GOLDEN = (math.sqrt(5) - 1) / 2


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    n = int(raw) if raw else 0
    return n if n > 0 else (os.cpu_count() or 1)


def _parallel_map(func, items):
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _as_array(state) -> np.ndarray:
    if isinstance(state, StateAmplitudes):
        return state.to_array()
    return np.asarray(state, dtype=complex)


# --- quasienergy spectra ---------------------------------------------------------


@dataclass
class SpectrumSweep:
    interaction: float
    omega: float
    gamma: float
    axis: np.ndarray  # eps0/omega values
    analytic: np.ndarray  # (len(axis), 3)
    numeric: np.ndarray  # (len(axis), 3); NaN rows off-stride

    def params_at(self, ratio: float) -> ModelParams:
        return ModelParams.from_ratio(ratio, self.omega, self.gamma, self.interaction)


def sweep_spectrum(interaction: float, omega: float, gamma: float,
                   axis_min: float = 0.0, axis_max: float = 6.0, step: float = 0.05,
                   numeric_stride: int = 10) -> SpectrumSweep:
    """Analytic quasienergies on every axis point, numeric ones on every
    ``numeric_stride``-th point (0 disables the numeric series)."""
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if axis_max < axis_min:
        raise ValueError("axis_max must not be below axis_min")
    count = int(math.floor((axis_max - axis_min) / step + 1e-9)) + 1
    axis = axis_min + step * np.arange(count)
    params = [ModelParams.from_ratio(x, omega, gamma, interaction) for x in axis]
    exact = np.array([analytic.quasienergies(p) for p in params])
    numeric = np.full((count, 3), np.nan)
    if numeric_stride > 0:
        picks = list(range(0, count, numeric_stride))
        values = _parallel_map(lambda i: numeric_quasienergies(params[i]), picks)
        for i, v in zip(picks, values):
            numeric[i] = v
    return SpectrumSweep(interaction, omega, gamma, axis, exact, numeric)


@dataclass(frozen=True)
class CrossingReport:
    location: float
    kind: str  # "three-level", "two-level" or "none"
    min_gap: float
    levels_involved: frozenset = field(default_factory=frozenset)


def _golden_min(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * max(1.0, abs(a) + abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _gaps(E) -> list[float]:
    return [abs(E[i] - E[j]) for i, j in _PAIRS]


def detect_crossings(sweep: SpectrumSweep, degeneracy_tol: float = 1e-3) -> list[CrossingReport]:
    """Locate and classify level (near-)degeneracies of the analytic spectrum.

    Interior local minima of each pairwise gap are refined by golden-section
    search; minima closer than one grid step are merged.
    """
    axis = sweep.axis
    if len(axis) < 3:
        raise ValueError("need at least three sweep points")
    step = float(np.min(np.diff(axis)))

    def energies(x):
        return analytic.quasienergies(sweep.params_at(max(x, 0.0)))

    candidates = []
    for p, (i, j) in enumerate(_PAIRS):
        g = np.abs(sweep.analytic[:, i] - sweep.analytic[:, j])
        for m in range(1, len(g) - 1):
            if g[m] <= g[m - 1] and g[m] <= g[m + 1] and (g[m] < g[m - 1] or g[m] < g[m + 1]):
                x = _golden_min(lambda x: _gaps(energies(x))[p], axis[m - 1], axis[m + 1])
                candidates.append((x, _gaps(energies(x))[p]))
    candidates.sort()
    merged: list[list[tuple[float, float]]] = []
    for cand in candidates:
        if merged and cand[0] - merged[-1][-1][0] <= step:
            merged[-1].append(cand)
        else:
            merged.append([cand])

    reports = []
    for group in merged:
        x = min(group, key=lambda c: c[1])[0]
        gaps = _gaps(energies(x))
        close = [pair for pair, g in zip(_PAIRS, gaps) if g <= degeneracy_tol]
        if len(close) == 3:
            kind = "three-level"
        elif len(close) == 1:
            kind = "two-level"
        else:
            kind = "none"
        levels = frozenset(l for pair in close for l in pair)
        reports.append(CrossingReport(x, kind, min(gaps), levels))
    return reports


# --- dynamics -----------------------------------------------------------------


@dataclass(frozen=True)
class TunnelingTime:
    time: float
    status: str  # "transfer", "partial" or "no-tunneling"
    estimate: float


def tunneling_estimate(params: ModelParams) -> float:
    """Closed-form pair tunneling time; inf where the coupling vanishes."""
    c = analytic.renormalized_coupling(params)
    if c.J_n == 0:
        return math.inf
    if params.u == 0:
        return 2 * math.pi / c.k_n
    return math.pi * params.u / (2 * c.J_n**2)


def _crossing_time(t, p, i, level) -> float:
    """Where ``p`` crosses ``level`` between samples ``i - 1`` and ``i`` (linear)."""
    if i == 0 or p[i] == p[i - 1]:
        return float(t[i])
    return float(t[i - 1] + (level - p[i - 1]) * (t[i] - t[i - 1]) / (p[i] - p[i - 1]))


def _first_lobe(t, p, threshold: float, release: float):
    """Centre of the first excursion of ``p`` above ``threshold``, or None if it
    has not yet fallen back below ``release``."""
    above = np.flatnonzero(p >= threshold)
    if above.size == 0:
        return None
    i_up = above[0]
    below = np.flatnonzero(p[i_up:] < release)
    if below.size == 0:
        return None
    i_end = i_up + below[0]
    i_last = above[above < i_end][-1]
    t_up = _crossing_time(t, p, i_up, threshold)
    t_down = _crossing_time(t, p, i_last + 1, threshold)
    return 0.5 * (t_up + t_down)


def tunneling_time(params: ModelParams, threshold: float = 0.95,
                   sample_dt: float | None = None) -> TunnelingTime:
    """Time for a pair starting in |0,2> to reach |2,0>, from the exact dynamics.

    The first lobe of P2 above ``threshold`` is located and its centre (midpoint
    of the up- and down-crossings) is returned, which is the moment of fullest
    transfer. Without any lobe inside ``4 * estimate`` the time of the largest
    P2 is returned with status ``"partial"``.
    """
    if not 0.5 < threshold < 1:
        raise ValueError("threshold must lie in (0.5, 1)")
    estimate = tunneling_estimate(params)
    if math.isinf(estimate) or abs(analytic.renormalized_coupling(params).J_n) < 1e-12:
        return TunnelingTime(math.inf, "no-tunneling", math.inf)
    horizon = 4 * estimate
    dt = sample_dt or min(0.01, estimate / 2000)
    # hysteresis so micromotion ripples near the threshold do not end a lobe
    release = threshold - (threshold - 0.5) / 2

    y = np.array([1, 0, 0], dtype=complex)
    h = None
    t_parts, p_parts = [np.zeros(1)], [np.zeros(1)]
    t_start = 0.0
    while t_start < horizon:
        t_stop = min(t_start + estimate / 4, horizon)
        times = np.arange(1, int(math.floor((t_stop - t_start) / dt)) + 1) * dt + t_start
        times = np.append(times[times < t_stop], t_stop)
        samples, y, h = propagate_segment(y, t_start, t_stop, params, params.epsilon0, times, h=h)
        t_parts.append(times)
        p_parts.append(np.abs(samples[:, 2]) ** 2)
        t_start = t_stop
        t_all, p_all = np.concatenate(t_parts), np.concatenate(p_parts)
        centre = _first_lobe(t_all, p_all, threshold, release)
        if centre is not None:
            return TunnelingTime(centre, "transfer", estimate)
    i = int(np.argmax(p_all))
    status = "transfer" if p_all[i] >= threshold else "partial"
    return TunnelingTime(float(t_all[i]), status, estimate)


@dataclass(frozen=True)
class CdtResult:
    is_cdt: bool
    max_excursion: float


def cdt_check(params: ModelParams, initial_b, horizon: float = 200.0,
              flatness_tol: float = 0.02, sample_dt: float = 0.05) -> CdtResult:
    """Whether all populations stay within ``flatness_tol`` of their initial values."""
    series = integrate(_as_array(initial_b), horizon, params, sample_dt=sample_dt)
    excursion = float(np.max(np.abs(series.populations - series.populations[0])))
    return CdtResult(excursion <= flatness_tol, excursion)


def analytic_series(params: ModelParams, initial_b, t_end: float, sample_dt: float) -> TimeSeries:
    from .propagate import sample_grid

    times = sample_grid(t_end, sample_dt)
    sol = analytic.fit_superposition(params, _as_array(initial_b))
    return TimeSeries.from_amplitudes(times, analytic.analytic_full_amplitudes(sol, times))


def population_series(params: ModelParams, initial_b, t_end: float, sample_dt: float = 0.1,
                      engine: str = "numeric"):
    """Populations from the analytic or numeric engine.

    With ``engine="both"`` returns ``(analytic, numeric, max_deviation)``.
    """
    if engine == "analytic":
        return analytic_series(params, initial_b, t_end, sample_dt)
    if engine == "numeric":
        return integrate(_as_array(initial_b), t_end, params, sample_dt=sample_dt)
    if engine == "both":
        a = analytic_series(params, initial_b, t_end, sample_dt)
        n = integrate(_as_array(initial_b), t_end, params, sample_dt=sample_dt)
        return a, n, float(np.max(np.abs(a.populations - n.populations)))
    raise ValueError(f"unknown engine {engine!r}")


def _check_schedule(schedule: DrivingSchedule, base: ModelParams):
    for _, eps0 in schedule.segments:
        p = base.with_epsilon0(eps0)
        if base.omega < 10 * max(base.gamma, p.u):
            warnings.warn(
                f"segment eps0={eps0:g} is outside the high-frequency regime", stacklevel=3
            )


def switch_analytic(schedule: DrivingSchedule, params_base: ModelParams, initial,
                    t_end: float, sample_dt: float = 0.1) -> TimeSeries:
    """Analytic evolution under a piecewise schedule.

    At each switch the physical amplitudes are carried over and re-expanded in
    the Floquet modes of the new driving amplitude.
    """
    from .propagate import sample_grid

    times = sample_grid(t_end, sample_dt)
    out = np.empty((len(times), 3), dtype=complex)
    a = _as_array(initial)
    for start, stop, eps0 in schedule.boundaries(t_end):
        p = params_base.with_epsilon0(eps0)
        sol = analytic.fit_superposition(p, analytic.to_slow(p, start, a), t0=start)
        last = stop >= t_end
        mask = (times >= start) & ((times <= stop) if last else (times < stop))
        out[mask] = analytic.analytic_full_amplitudes(sol, times[mask])
        a = analytic.analytic_full_amplitudes(sol, stop)
        a = a / np.linalg.norm(a)
    return TimeSeries.from_amplitudes(times, out)


def run_switch(schedule: DrivingSchedule, params_base: ModelParams, initial, t_end: float,
               sample_dt: float = 0.1, engine: str = "numeric"):
    """Evolution under a piecewise-constant driving amplitude.

    ``engine`` is ``"numeric"``, ``"analytic"`` or ``"both"`` (returns
    ``(analytic, numeric, max_deviation)``).
    """
    _check_schedule(schedule, params_base)
    if engine == "numeric":
        return integrate(_as_array(initial), t_end, params_base, schedule, sample_dt)
    if engine == "analytic":
        return switch_analytic(schedule, params_base, initial, t_end, sample_dt)
    if engine == "both":
        a = switch_analytic(schedule, params_base, initial, t_end, sample_dt)
        n = integrate(_as_array(initial), t_end, params_base, schedule, sample_dt)
        return a, n, float(np.max(np.abs(a.populations - n.populations)))
    raise ValueError(f"unknown engine {engine!r}")


#: switching protocols of the tunneling-switch scheme: (omega, gamma, U) = (50, 0.5, 2)
FIRST_ZERO_RATIO = 2.404825557695773


def switch_protocol(kind: str, omega: float = 50.0) -> DrivingSchedule:
    """Full pair transfer (``"a"``) or transfer to the quasi-NOON state (``"b"``)."""
    hold = FIRST_ZERO_RATIO * omega
    if kind == "a":
        return DrivingSchedule(((0.0, hold), (20.0, 2 * omega), (145.0, hold)))
    if kind == "b":
        return DrivingSchedule(((0.0, hold), (20.0, 2 * omega), (82.5, hold)))
    raise ValueError(f"unknown protocol {kind!r}")
