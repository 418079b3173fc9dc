"""Leading-order high-frequency theory.

After removing the rapid phases, the slow amplitudes obey a constant 3x3
system with the renormalized coupling ``J_n = sqrt(2) * gamma * J_n(eps0/omega)``.
Its eigenvectors are the Floquet modes; any initial state is a superposition
of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import FloquetMode, ModelParams, StateAmplitudes
from .special import bessel_j


@dataclass(frozen=True)
class RenormalizedCoupling:
    J_n: float
    k_n: float


def renormalized_coupling(params: ModelParams) -> RenormalizedCoupling:
    J = math.sqrt(2) * params.gamma * bessel_j(params.n, params.ratio)
    return RenormalizedCoupling(J, math.sqrt(8 * J * J + params.u**2))


def averaged_matrix(params: ModelParams) -> np.ndarray:
    """Real symmetric generator of the slow dynamics."""
    J = renormalized_coupling(params).J_n
    s = (-1) ** params.n
    u = params.u
    return np.array([[u, J, 0.0], [J, 0.0, s * J], [0.0, s * J, u]])


def averaged_rhs(params: ModelParams, b) -> np.ndarray:
    """Time derivative of the slow amplitudes ``b``."""
    return -1j * averaged_matrix(params) @ np.asarray(b, dtype=complex)


def quasienergies(params: ModelParams) -> tuple[float, float, float]:
    u = params.u
    k = renormalized_coupling(params).k_n
    return u, 0.5 * (u - k), 0.5 * (u + k)


def floquet_modes(params: ModelParams) -> tuple[tuple[FloquetMode, ...], bool]:
    """The three Floquet modes and a flag for the fully degenerate point.

    When ``J_n = 0`` and ``u = 0`` every vector is an eigenvector; a fixed
    orthonormal basis is returned and the flag is set.
    """
    c = renormalized_coupling(params)
    J, k, u = c.J_n, c.k_n, params.u
    s = (-1) ** params.n
    r2 = 1 / math.sqrt(2)
    E0, E1, E2 = quasienergies(params)
    mode0 = FloquetMode(0, E0, r2, 0.0, -s * r2)
    if k == 0.0:
        return (
            mode0,
            FloquetMode(1, E1, 0.0, 1.0, 0.0),
            FloquetMode(2, E2, r2, 0.0, s * r2),
        ), True

    norm1 = math.sqrt(8 * J * J + (u + k) ** 2)
    mode1 = FloquetMode(1, E1, 2 * J / norm1, -(u + k) / norm1, s * 2 * J / norm1)

    # (k - u) / |J| written without cancellation; finite as J -> 0
    sigma = -1.0 if J < 0 else 1.0
    r = 8 * abs(J) / (k + u)
    norm2 = math.sqrt(8 + r * r)
    mode2 = FloquetMode(2, E2, 2 * sigma / norm2, r / norm2, s * 2 * sigma / norm2)
    return (mode0, mode1, mode2), False


def mode_matrix(modes) -> np.ndarray:
    """Columns are the (A, B, C) vectors of the modes, ordered by label."""
    return np.column_stack([m.vector for m in sorted(modes, key=lambda m: m.label)])


@dataclass(frozen=True)
class AnalyticSolution:
    """Superposition of Floquet modes, with the coefficients fixed at ``t0``."""

    params: ModelParams
    modes: tuple[FloquetMode, ...]
    coeffs: np.ndarray  # complex (c0, c1, c2)
    t0: float = 0.0
    degenerate: bool = False

    @property
    def c0(self) -> complex:
        return complex(self.coeffs[0])

    @property
    def c1(self) -> complex:
        return complex(self.coeffs[1])

    @property
    def c2(self) -> complex:
        return complex(self.coeffs[2])

    @property
    def energies(self) -> np.ndarray:
        return np.array([m.quasienergy for m in self.modes])


def fit_superposition(params: ModelParams, initial_b, t0: float = 0.0) -> AnalyticSolution:
    """Expand slow amplitudes ``initial_b`` (given at time ``t0``) in Floquet modes."""
    b = np.asarray(
        initial_b.to_array() if isinstance(initial_b, StateAmplitudes) else initial_b,
        dtype=complex,
    )
    norm = float(np.vdot(b, b).real)
    if abs(norm - 1) > 1e-9:
        raise ValueError(f"initial state is not normalized (|b|^2 = {norm!r})")
    modes, degenerate = floquet_modes(params)
    M = mode_matrix(modes)
    try:
        coeffs = np.linalg.solve(M, b)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("Floquet mode vectors are linearly dependent") from exc
    if np.max(np.abs(M @ coeffs - b)) > 1e-10:
        raise RuntimeError("Floquet mode expansion is ill-conditioned")
    return AnalyticSolution(params, modes, coeffs, float(t0), degenerate)


def analytic_slow_amplitudes(sol: AnalyticSolution, t):
    """Slow amplitudes b'(t); ``t`` may be a scalar or an array."""
    t = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(t - sol.t0, sol.energies))
    out = (phases * sol.coeffs) @ mode_matrix(sol.modes).T
    return out


def rapid_phases(params: ModelParams, t):
    """Phase factors linking slow and full amplitudes of |0,2> and |2,0>."""
    t = np.asarray(t, dtype=float)
    x = params.ratio * np.sin(params.omega * t)
    nwt = params.n * params.omega * t
    return np.exp(1j * (x - nwt)), np.exp(-1j * (x + nwt))


def to_full(params: ModelParams, t, b):
    b = np.asarray(b, dtype=complex)
    p0, p2 = rapid_phases(params, t)
    a = b.copy()
    a[..., 0] *= p0
    a[..., 2] *= p2
    return a


def to_slow(params: ModelParams, t, a):
    a = np.asarray(a, dtype=complex)
    p0, p2 = rapid_phases(params, t)
    b = a.copy()
    b[..., 0] /= p0
    b[..., 2] /= p2
    return b


def analytic_full_amplitudes(sol: AnalyticSolution, t):
    """Full amplitudes a(t) of the original problem, for scalar or array ``t``."""
    return to_full(sol.params, t, analytic_slow_amplitudes(sol, t))
