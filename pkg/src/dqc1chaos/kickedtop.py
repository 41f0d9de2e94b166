"""Floquet operator of the nonlinear kicked top.

One period is ``F = U_z U_y U_x`` with

    U_k = exp(-i tau_k J_k^2 / (2j+1) - i alpha_k J_k),

acting on the spin-j multiplet of dimension ``N = 2j + 1``. Parameters are
packed as ``p = (alpha_x, alpha_y, alpha_z, tau_x, tau_y, tau_z)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .linalg import EigenSolverError, UnitaryMatrix

REGULAR = (0.0, 0.0, 1.0, 0.0, 0.0, 10.0)
CHAOTIC = (1.1, 1.0, 1.0, 4.0, 0.0, 10.0)


def _as_spin(j) -> Fraction:
    twice = Fraction(j) * 2
    if twice.denominator != 1 or twice < 0:
        raise ValueError(f"j must be a non-negative integer or half-integer, got {j}")
    return Fraction(int(twice), 2)


@dataclass(frozen=True)
class TopParams:
    """Kick angles ``alpha``, kick strengths ``tau`` and total spin ``j``."""

    alpha: tuple[float, float, float]
    tau: tuple[float, float, float]
    j: float

    def __post_init__(self):
        a = tuple(float(x) for x in self.alpha)
        t = tuple(float(x) for x in self.tau)
        if len(a) != 3 or len(t) != 3:
            raise ValueError("alpha and tau need three components each")
        if not all(np.isfinite(a + t)):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "tau", t)
        object.__setattr__(self, "j", float(_as_spin(self.j)))

    @classmethod
    def from_vector(cls, p, j) -> "TopParams":
        p = tuple(p)
        if len(p) != 6:
            raise ValueError("parameter vector needs six entries")
        return cls(p[:3], p[3:], j)

    @classmethod
    def regular(cls, j) -> "TopParams":
        return cls.from_vector(REGULAR, j)

    @classmethod
    def chaotic(cls, j) -> "TopParams":
        return cls.from_vector(CHAOTIC, j)

    @property
    def vector(self) -> tuple[float, ...]:
        return self.alpha + self.tau

    @property
    def dim(self) -> int:
        return int(round(2 * self.j)) + 1


@dataclass(frozen=True, eq=False)
class AngularMomentumOps:
    """Spin matrices in the ``|j, m>`` basis ordered ``m = j, j-1, ..., -j``."""

    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    def __iter__(self):
        return iter((self.jx, self.jy, self.jz))


def angular_momentum(j) -> AngularMomentumOps:
    s = _as_spin(j)
    jf = float(s)
    m = jf - np.arange(int(2 * s) + 1)
    # <m+1| J_+ |m> on the superdiagonal
    lower = m[1:]
    jp = np.diag(np.sqrt(jf * (jf + 1) - lower * (lower + 1)), k=1).astype(np.complex128)
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(m).astype(np.complex128)
    return AngularMomentumOps(jx, jy, jz)


def expm_hermitian(h: np.ndarray) -> np.ndarray:
    """``exp(-i h)`` for Hermitian ``h`` through its eigen-decomposition."""
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from exc
    return (v * np.exp(-1j * w)) @ v.conj().T


def kick_generators(params: TopParams, ops: AngularMomentumOps | None = None):
    """Hermitian ``H_k = tau_k J_k^2 / (2j+1) + alpha_k J_k`` for k = x, y, z."""
    ops = ops or angular_momentum(params.j)
    n = params.dim
    return [
        tau * (jk @ jk) / n + alpha * jk
        for jk, alpha, tau in zip(ops, params.alpha, params.tau)
    ]


def floquet(params: TopParams) -> UnitaryMatrix:
    """``F = U_z U_y U_x``; ``U_x`` acts first."""
    ux, uy, uz = (expm_hermitian(h) for h in kick_generators(params))
    return UnitaryMatrix(uz @ uy @ ux)


def interpolate_params(p_r: TopParams, p_c: TopParams, eps: float) -> TopParams:
    """``(1 - eps) p_r + eps p_c`` component-wise at fixed ``j``."""
    if p_r.j != p_c.j:
        raise ValueError(f"j mismatch: {p_r.j} vs {p_c.j}")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    v = tuple((1 - eps) * a + eps * b for a, b in zip(p_r.vector, p_c.vector))
    return TopParams.from_vector(v, p_r.j)
