"""Numerical propagation of the full driven three-level equations.

The Hamiltonian in the Fock basis is

    H(t) = [[U - eps(t), g, 0], [g, 0, g], [0, g, U + eps(t)]],  g = sqrt(2)*gamma,

with ``eps(t) = eps0 * cos(omega t)``. Integration uses an adaptive
Dormand-Prince 5(4) pair compiled with numba.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numba
import numpy as np

from .analytic import floquet_modes, mode_matrix
from .model import DrivingSchedule, ModelParams, StateAmplitudes, TimeSeries, drive_value

RTOL = 1e-13
ATOL = 1e-15

# overlaps below this make a label assignment ambiguous
_MIN_OVERLAP = 0.5


class IntegrationError(RuntimeError):
    def __init__(self, t: float, message: str = "step size underflow"):
        super().__init__(f"{message} at t = {t!r}")
        self.t = t


def hamiltonian(params: ModelParams, t: float, epsilon0: float | None = None) -> np.ndarray:
    eps0 = params.epsilon0 if epsilon0 is None else epsilon0
    e = eps0 * math.cos(params.omega * t)
    g = math.sqrt(2) * params.gamma
    U = params.interaction_u_total
    return np.array([[U - e, g, 0], [g, 0, g], [0, g, U + e]], dtype=complex)


def exact_rhs(t: float, a, params: ModelParams, schedule: DrivingSchedule | None = None):
    """``da/dt = -i H(t) a``."""
    eps0 = params.epsilon0 if schedule is None else drive_value(schedule, t)
    return -1j * hamiltonian(params, t, eps0) @ np.asarray(a, dtype=complex)


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth-order weights minus embedded fourth-order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


@numba.njit(cache=True, nogil=True)
def _rhs(t, y, out, eps0, omega, g, U):
    e = eps0 * math.cos(omega * t)
    out[0] = -1j * ((U - e) * y[0] + g * y[1])
    out[1] = -1j * (g * (y[0] + y[2]))
    out[2] = -1j * ((U + e) * y[2] + g * y[1])


@numba.njit(cache=True, nogil=True)
def _dopri(y0, t0, t1, sample_times, eps0, omega, g, U, rtol, atol, h):
    """Integrate from t0 to t1, landing exactly on every sample time.

    Returns (samples, y_end, h_next, n_steps, status, t_status); status 0 is
    success, 1 is step-size underflow.
    """
    m = sample_times.shape[0]
    samples = np.empty((m, 3), dtype=np.complex128)
    y = y0.copy()
    ynew = np.empty(3, dtype=np.complex128)
    tmp = np.empty(3, dtype=np.complex128)
    k1 = np.empty(3, dtype=np.complex128)
    k2 = np.empty(3, dtype=np.complex128)
    k3 = np.empty(3, dtype=np.complex128)
    k4 = np.empty(3, dtype=np.complex128)
    k5 = np.empty(3, dtype=np.complex128)
    k6 = np.empty(3, dtype=np.complex128)
    k7 = np.empty(3, dtype=np.complex128)
    t = t0
    idx = 0
    while idx < m and sample_times[idx] <= t:
        samples[idx] = y
        idx += 1
    _rhs(t, y, k1, eps0, omega, g, U)
    n_steps = 0
    while t < t1:
        target = sample_times[idx] if idx < m else t1
        if target > t1:
            target = t1
        if h < 1e-14 * max(1.0, abs(t)):
            return samples, y, h, n_steps, 1, t
        clipped = t + h >= target
        step = target - t if clipped else h

        for j in range(3):
            tmp[j] = y[j] + step * _A21 * k1[j]
        _rhs(t + _C2 * step, tmp, k2, eps0, omega, g, U)
        for j in range(3):
            tmp[j] = y[j] + step * (_A31 * k1[j] + _A32 * k2[j])
        _rhs(t + _C3 * step, tmp, k3, eps0, omega, g, U)
        for j in range(3):
            tmp[j] = y[j] + step * (_A41 * k1[j] + _A42 * k2[j] + _A43 * k3[j])
        _rhs(t + _C4 * step, tmp, k4, eps0, omega, g, U)
        for j in range(3):
            tmp[j] = y[j] + step * (_A51 * k1[j] + _A52 * k2[j] + _A53 * k3[j] + _A54 * k4[j])
        _rhs(t + _C5 * step, tmp, k5, eps0, omega, g, U)
        for j in range(3):
            tmp[j] = y[j] + step * (
                _A61 * k1[j] + _A62 * k2[j] + _A63 * k3[j] + _A64 * k4[j] + _A65 * k5[j]
            )
        _rhs(t + step, tmp, k6, eps0, omega, g, U)
        for j in range(3):
            ynew[j] = y[j] + step * (
                _B1 * k1[j] + _B3 * k3[j] + _B4 * k4[j] + _B5 * k5[j] + _B6 * k6[j]
            )
        _rhs(t + step, ynew, k7, eps0, omega, g, U)

        err = 0.0
        for j in range(3):
            e = step * (
                _E1 * k1[j] + _E3 * k3[j] + _E4 * k4[j] + _E5 * k5[j] + _E6 * k6[j] + _E7 * k7[j]
            )
            scale = atol + rtol * max(abs(y[j]), abs(ynew[j]))
            err += (abs(e) / scale) ** 2
        err = math.sqrt(err / 3)

        if err <= 1.0:
            t = target if clipped else t + step
            for j in range(3):
                y[j] = ynew[j]
                k1[j] = k7[j]
            n_steps += 1
            while idx < m and sample_times[idx] <= t:
                samples[idx] = y
                idx += 1
            factor = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** -0.2)
            # a step shortened to hit a sample says nothing about the natural size
            if not clipped or step * factor > h:
                h = step * factor
        else:
            h = step * max(0.2, 0.9 * err ** -0.2)
    return samples, y, h, n_steps, 0, t


def _initial_step(params: ModelParams, eps0: float) -> float:
    scale = abs(params.interaction_u_total) + eps0 + math.sqrt(2) * params.gamma + 1.0
    return 0.01 / scale


def propagate_segment(y0, t0, t1, params: ModelParams, eps0: float, sample_times=None,
                      rtol: float = RTOL, atol: float = ATOL, h: float | None = None):
    """Propagate ``y0`` from ``t0`` to ``t1`` at fixed driving amplitude.

    Returns ``(samples, y_end, h_next)``.
    """
    if sample_times is None:
        sample_times = np.empty(0)
    samples, y_end, h_next, _, status, t_fail = _dopri(
        np.asarray(y0, dtype=np.complex128),
        float(t0),
        float(t1),
        np.asarray(sample_times, dtype=np.float64),
        float(eps0),
        float(params.omega),
        math.sqrt(2) * params.gamma,
        float(params.interaction_u_total),
        rtol,
        atol,
        h if h is not None else _initial_step(params, eps0),
    )
    if status != 0:
        raise IntegrationError(t_fail)
    return samples, y_end, h_next


def sample_grid(t_end: float, sample_dt: float) -> np.ndarray:
    count = int(math.floor(t_end / sample_dt + 1e-9))
    times = np.arange(count + 1) * sample_dt
    if t_end - times[-1] > 1e-9 * max(1.0, t_end):
        times = np.append(times, t_end)
    return times


def integrate(initial, t_end: float, params: ModelParams,
              schedule: DrivingSchedule | None = None, sample_dt: float = 0.1,
              rtol: float = RTOL, atol: float = ATOL) -> TimeSeries:
    """Propagate full amplitudes from ``t = 0`` to ``t_end``.

    With a schedule, each constant-amplitude segment is integrated separately so
    no step straddles a switch. The state is never renormalized.
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if not sample_dt > 0:
        raise ValueError(f"sample_dt must be positive, got {sample_dt}")
    if schedule is None:
        schedule = DrivingSchedule.constant(params.epsilon0)
    y = initial.to_array() if isinstance(initial, StateAmplitudes) else np.asarray(initial, complex)
    times = sample_grid(t_end, sample_dt)
    out = np.empty((len(times), 3), dtype=complex)
    h = None
    for start, stop, eps0 in schedule.boundaries(t_end):
        last = stop >= t_end
        mask = (times >= start) & ((times <= stop) if last else (times < stop))
        samples, y, h = propagate_segment(y, start, stop, params, eps0, times[mask], rtol, atol, h)
        out[mask] = samples
    return TimeSeries.from_amplitudes(times, out)


@dataclass(frozen=True)
class Monodromy:
    matrix: np.ndarray
    params: ModelParams

    def unitarity_error(self) -> float:
        U = self.matrix
        return float(np.max(np.abs(U.conj().T @ U - np.eye(3))))


def monodromy(params: ModelParams, rtol: float = RTOL, atol: float = ATOL) -> Monodromy:
    """One-period propagator, built column by column from the Fock basis states."""
    T = params.period
    cols = []
    for j in range(3):
        e = np.zeros(3, dtype=complex)
        e[j] = 1.0
        _, y, _ = propagate_segment(e, 0.0, T, params, params.epsilon0, rtol=rtol, atol=atol)
        cols.append(y)
    return Monodromy(np.column_stack(cols), params)


def fold(energy, omega: float):
    """Map quasienergies into ``[-omega/2, omega/2)``."""
    return (np.asarray(energy) + omega / 2) % omega - omega / 2


def numeric_quasienergies(params: ModelParams, mono: Monodromy | None = None):
    """Quasienergies from the monodromy eigenphases, labelled like the analytic modes.

    Labels come from the permutation maximizing eigenvector overlap with the
    analytic mode vectors. If that assignment is ambiguous (degenerate modes),
    the sorted values are matched to the sorted analytic quasienergies instead.

    Returns:
        array ``(E0, E1, E2)``.
    """
    if mono is None:
        mono = monodromy(params)
    vals, vecs = np.linalg.eig(mono.matrix)
    energies = fold(-np.angle(vals) / params.period, params.omega)
    modes, degenerate = floquet_modes(params)
    M = mode_matrix(modes)
    analytic = np.array([m.quasienergy for m in modes])
    overlap = np.abs(M.T @ vecs) ** 2  # [label, eigenvector]
    best = max(permutations(range(3)), key=lambda p: sum(overlap[l, p[l]] for l in range(3)))
    if not degenerate and min(overlap[l, best[l]] for l in range(3)) >= _MIN_OVERLAP:
        return energies[list(best)]
    out = np.empty(3)
    out[np.argsort(analytic, kind="stable")] = np.sort(energies)
    return out
