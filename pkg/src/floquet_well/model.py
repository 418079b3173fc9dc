"""Domain types for two bosons in a driven double well.

All energies and times are in units of the reference frequency (omega_0 = 100 1/s)
and its inverse. Amplitudes are ordered over the Fock basis |0,2>, |1,1>, |2,0>.
"""

from __future__ import annotations

import bisect
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

#: reference frequency in 1/s; used only for display conversions
OMEGA_REF = 100.0


class ParameterError(ValueError):
    """Invalid physical parameter."""


class HighFrequencyWarning(UserWarning):
    """Reduced interaction is not small compared to the driving frequency."""


def reduce_interaction(interaction: float, omega: float) -> tuple[int, float, bool]:
    """Split ``U = n*omega + u`` with ``n = floor(U/omega)``.

    Returns:
        ``(n, u, strained)`` where ``strained`` is True when ``u > omega/10``,
        i.e. the averaging assumption ``u << omega`` is questionable.
    """
    if not omega > 0:
        raise ParameterError(f"omega must be positive, got {omega}")
    if interaction < 0:
        raise ParameterError(f"interaction must be non-negative, got {interaction}")
    n = int(math.floor(interaction / omega))
    u = interaction - n * omega
    # floor() on a value like 2.9999999999999996 can leave u == omega or u < 0
    if u >= omega:
        n += 1
        u = interaction - n * omega
    if u < 0:
        n -= 1
        u = interaction - n * omega
    u = max(u, 0.0)
    return n, u, u > omega / 10


@dataclass(frozen=True)
class ModelParams:
    epsilon0: float
    omega: float
    gamma: float
    interaction_u_total: float
    n: int = field(init=False)
    u: float = field(init=False)

    def __post_init__(self):
        if not self.epsilon0 >= 0:
            raise ParameterError(f"epsilon0 must be >= 0, got {self.epsilon0}")
        if not self.gamma >= 0:
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        n, u, strained = reduce_interaction(self.interaction_u_total, self.omega)
        if strained:
            warnings.warn(
                f"reduced interaction u={u:g} exceeds omega/10 (omega={self.omega:g})",
                HighFrequencyWarning,
                stacklevel=3,
            )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "u", u)

    @classmethod
    def from_ratio(cls, ratio: float, omega: float, gamma: float, interaction: float):
        """Build from the driving ratio ``epsilon0/omega``."""
        return cls(ratio * omega, omega, gamma, interaction)

    @property
    def ratio(self) -> float:
        return self.epsilon0 / self.omega

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega

    def with_epsilon0(self, epsilon0: float) -> ModelParams:
        return ModelParams(epsilon0, self.omega, self.gamma, self.interaction_u_total)


@dataclass(frozen=True)
class StateAmplitudes:
    a0: complex
    a1: complex
    a2: complex

    def __post_init__(self):
        norm = abs(self.a0) ** 2 + abs(self.a1) ** 2 + abs(self.a2) ** 2
        if abs(norm - 1) > 1e-9:
            raise ParameterError(f"state is not normalized (|a|^2 = {norm!r})")

    @classmethod
    def from_array(cls, values) -> StateAmplitudes:
        a0, a1, a2 = (complex(v) for v in values)
        return cls(a0, a1, a2)

    def to_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2], dtype=complex)

    @property
    def populations(self) -> tuple[float, float, float]:
        return abs(self.a0) ** 2, abs(self.a1) ** 2, abs(self.a2) ** 2


#: named initial states
PAIR_RIGHT = StateAmplitudes(1, 0, 0)
PAIR_LEFT = StateAmplitudes(0, 0, 1)
NOON = StateAmplitudes(1 / math.sqrt(2), 0, -1 / math.sqrt(2))


@dataclass(frozen=True)
class FloquetMode:
    label: int
    quasienergy: float
    coeff_A: float
    coeff_B: float
    coeff_C: float

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.coeff_A, self.coeff_B, self.coeff_C])


@dataclass(frozen=True)
class DrivingSchedule:
    """Piecewise-constant driving amplitude.

    ``segments`` is a sequence of ``(start_time, epsilon0)``. A boundary belongs
    to the segment that starts there.
    """

    segments: tuple[tuple[float, float], ...]

    def __post_init__(self):
        segs = tuple((float(t), float(e)) for t, e in self.segments)
        if not segs:
            raise ParameterError("schedule needs at least one segment")
        if segs[0][0] != 0:
            raise ParameterError("first segment must start at t = 0")
        starts = [t for t, _ in segs]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ParameterError("segment start times must be strictly increasing")
        if any(e < 0 for _, e in segs):
            raise ParameterError("driving amplitudes must be >= 0")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, epsilon0: float) -> DrivingSchedule:
        return cls(((0.0, epsilon0),))

    @classmethod
    def parse(cls, text: str) -> DrivingSchedule:
        """Parse ``"t0:eps0,t1:eps1,..."``."""
        segs = []
        for item in text.split(","):
            t, sep, eps = item.partition(":")
            if not sep:
                raise ParameterError(f"malformed schedule entry {item!r}")
            try:
                segs.append((float(t), float(eps)))
            except ValueError as exc:
                raise ParameterError(f"malformed schedule entry {item!r}") from exc
        return cls(tuple(segs))

    @property
    def starts(self) -> list[float]:
        return [t for t, _ in self.segments]

    def boundaries(self, t_end: float) -> list[tuple[float, float, float]]:
        """Segments clipped to ``[0, t_end]`` as ``(start, stop, epsilon0)``."""
        out = []
        for i, (start, eps) in enumerate(self.segments):
            if start >= t_end:
                break
            stop = self.segments[i + 1][0] if i + 1 < len(self.segments) else t_end
            out.append((start, min(stop, t_end), eps))
        return out


def drive_value(schedule: DrivingSchedule, t: float) -> float:
    """Driving amplitude active at time ``t`` (right-continuous)."""
    if not t >= 0:
        raise ParameterError(f"time must be >= 0, got {t}")
    idx = bisect.bisect_right(schedule.starts, t) - 1
    return schedule.segments[idx][1]


@dataclass
class TimeSeries:
    times: np.ndarray
    populations: np.ndarray  # shape (len(times), 3)
    amplitudes: np.ndarray | None = None  # shape (len(times), 3), complex

    @classmethod
    def from_amplitudes(cls, times, amplitudes) -> TimeSeries:
        amplitudes = np.asarray(amplitudes, dtype=complex)
        return cls(np.asarray(times, dtype=float), np.abs(amplitudes) ** 2, amplitudes)

    def __len__(self):
        return len(self.times)

    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.populations.sum(axis=1) - 1)))
