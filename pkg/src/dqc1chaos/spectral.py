"""Form factors and the regular-vs-chaotic hypothesis test.

The form factor of a unitary ``F`` with eigenphases ``phi_j`` is

    T_n = |Tr F^n|^2 = |sum_j exp(-i n phi_j)|^2.

For independent (Poisson) levels the ensemble mean of ``T_n`` is ``N`` for all
``n``; for circular ensembles it grows from ``O(1)`` (see :func:`wigner_surmise`).
Averaging ``T_n / mean(T_n)`` over a window of ``delta_n`` consecutive ``n``
makes a single matrix behave like the ensemble, with fluctuations of order
``1/sqrt(delta_n)``. :func:`hypothesis_test` uses this to decide which mean a
given spectrum follows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .linalg import EigenphaseSpectrum


class WindowError(ValueError):
    """An averaging window is empty, out of range, or too wide for N."""


@dataclass(frozen=True, eq=False)
class FormFactorSeries:
    """``values[n-1] = T_n`` for ``n = 1..n_max``; ``dim`` is the N of the spectrum."""

    values: np.ndarray
    dim: int

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if v.size < 1:
            raise ValueError("series must hold at least one value")
        # T_n = N^2 exactly when all phases coincide; allow rounding above it
        if np.any(v < 0) or np.any(v > self.dim**2 * (1 + 1e-9)):
            raise ValueError("form factors must lie in [0, N^2]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_max(self) -> int:
        return self.values.size

    @property
    def n(self) -> np.ndarray:
        return np.arange(1, self.n_max + 1)

    def __getitem__(self, n: int) -> float:
        """Return ``T_n`` (1-based)."""
        if not 1 <= n <= self.n_max:
            raise IndexError(n)
        return float(self.values[n - 1])

    def __len__(self) -> int:
        return self.n_max


def _phases(spectrum) -> np.ndarray:
    if isinstance(spectrum, EigenphaseSpectrum):
        return spectrum.phases
    return np.asarray(spectrum, dtype=np.float64)


def form_factor(spectrum, n: int) -> float:
    """Return ``|sum_j exp(-i n phi_j)|^2``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    s = np.exp(-1j * n * _phases(spectrum)).sum()
    return float(s.real**2 + s.imag**2)


def form_factor_series(spectrum, n_max: int) -> FormFactorSeries:
    """``T_1 .. T_{n_max}`` by repeated rotation of the unit phasors."""
    if n_max < 1:
        raise ValueError("n_max must be a positive integer")
    phi = _phases(spectrum)
    z = np.exp(-1j * phi)
    w = np.ones_like(z)
    out = np.empty(n_max)
    for k in range(n_max):
        w *= z
        # re-project onto the unit circle so rounding does not compound in n
        if k % 64 == 63:
            w /= np.abs(w)
        s = w.sum()
        out[k] = s.real**2 + s.imag**2
    return FormFactorSeries(out, phi.size)


def deduplicate_doublets(spectrum: EigenphaseSpectrum, tol: float = 1e-6) -> EigenphaseSpectrum:
    """Collapse a Kramers-degenerate spectrum to one phase per doublet.

    Adjacent sorted phases are paired, either as (0,1),(2,3),... or, when a
    doublet straddles the branch cut at +-pi, as (1,2),...,(last,0). Each
    pair must agree to within ``tol`` on the circle.

    Raises:
        ValueError: if the spectrum does not pair up.
    """
    p = spectrum.phases
    if p.size % 2:
        raise ValueError("odd number of phases cannot form doublets")
    for shift in (0, 1):
        q = np.roll(p, -shift)
        a, b = q[0::2], q[1::2]
        gap = np.abs(np.angle(np.exp(1j * (b - a))))
        if np.all(gap <= tol):
            mid = a + 0.5 * np.angle(np.exp(1j * (b - a)))
            return EigenphaseSpectrum.from_phases(mid)
    raise ValueError(f"spectrum is not doubly degenerate within {tol}")


def wigner_surmise(beta: int, n: int, dim: int) -> float:
    """Ensemble-mean form factor for symmetry class ``beta`` at time ``n``.

    Valid for ``0 < n < N``. Poisson (beta=0) gives ``N``, CUE gives ``n``;
    the COE and CSE rows carry the finite-N harmonic corrections.
    """
    if beta not in (0, 1, 2, 4):
        raise ValueError(f"invalid beta {beta}")
    if not 0 < n < dim:
        raise ValueError(f"need 0 < n < N, got n={n}, N={dim}")
    if beta == 0:
        return float(dim)
    if beta == 2:
        return float(n)
    m = np.arange(1, n + 1)
    if beta == 1:
        return float(2 * n - n * np.sum(1.0 / (m + (dim + 1) / 2)))
    return float(n + 0.5 * n * np.sum(1.0 / (dim + 0.5 - m)))


def surmise_series(beta: int, n_max: int, dim: int) -> np.ndarray:
    """:func:`wigner_surmise` for ``n = 1..n_max`` in one vector."""
    return np.array([wigner_surmise(beta, n, dim) for n in range(1, n_max + 1)])


def ergodic_average(series: FormFactorSeries, hypothesis: str, window, beta: int = 2) -> float:
    """Window average of ``T_n / mean(T_n)`` under a hypothesis.

    Args:
        series: form factors of one spectrum.
        hypothesis: ``"regular"`` (mean ``N``) or ``"chaotic"`` (mean from
            :func:`wigner_surmise` for ``beta``).
        window: inclusive ``(n_lo, n_hi)``.
        beta: symmetry class for the chaotic mean.
    """
    n_lo, n_hi = window
    if not 1 <= n_lo <= n_hi <= series.n_max:
        raise WindowError(f"window {window} outside 1..{series.n_max}")
    n = np.arange(n_lo, n_hi + 1)
    t = series.values[n_lo - 1:n_hi]
    if hypothesis == "regular":
        mean = np.full(n.size, float(series.dim))
    elif hypothesis == "chaotic":
        mean = np.array([wigner_surmise(beta, int(k), series.dim) for k in n])
    else:
        raise ValueError(f"unknown hypothesis {hypothesis!r}")
    return float(np.mean(t / mean))


def t_statistics(series: FormFactorSeries, delta_n: int) -> tuple[float, float]:
    """``(t0, t1)`` over ``n = 1..delta_n`` without any window-size guard."""
    if not 1 <= delta_n <= series.n_max:
        raise WindowError(f"delta_n={delta_n} outside 1..{series.n_max}")
    t = series.values[:delta_n]
    n = np.arange(1, delta_n + 1)
    return float(np.mean(t) / series.dim), float(np.mean(t / n))


def cumulative_t_statistics(series: FormFactorSeries) -> tuple[np.ndarray, np.ndarray]:
    """``t0`` and ``t1`` for every ``delta_n = 1..n_max`` at once."""
    n = series.n
    t0 = np.cumsum(series.values) / n / series.dim
    t1 = np.cumsum(series.values / n) / n
    return t0, t1


class Decision(str, enum.Enum):
    REGULAR = "regular"
    CHAOTIC = "chaotic"
    INCONCLUSIVE = "inconclusive"

    def __str__(self) -> str:
        return self.value


SUBSPACE_SCALINGS = ("linear", "quadratic")


@dataclass(frozen=True)
class HypothesisVerdict:
    t0: float
    t1: float
    delta_n: int
    threshold_c: float
    decision: Decision
    k_estimate: int | None = None

    @property
    def tolerance(self) -> float:
        return self.threshold_c / math.sqrt(self.delta_n)


def _subspace_scale(k: int, scaling: str) -> int:
    return k if scaling == "linear" else k * k


def estimate_subspaces(t1: float, scaling: str = "linear", k_max: int | None = None) -> int:
    """Most likely number of invariant subspaces given ``t1``.

    Under ``k`` subspaces the chaotic mean is ``s(k) * n`` with ``s(k) = k``
    for independent blocks (``"linear"``) or ``k^2`` for degenerate copies
    (``"quadratic"``). Each ``T_n / (s n)`` is close to unit-mean exponential,
    so the log-likelihood of ``k`` is ``-log s(k) - t1 / s(k)`` per term; this
    returns the maximising integer ``k >= 1``.
    """
    if scaling not in SUBSPACE_SCALINGS:
        raise ValueError(f"scaling must be one of {SUBSPACE_SCALINGS}")
    if t1 <= 0:
        return 1
    root = t1 if scaling == "linear" else math.sqrt(t1)
    lo = max(1, math.floor(root))
    candidates = [k for k in (lo, lo + 1) if k_max is None or k <= k_max] or [k_max]

    def loglik(k):
        s = _subspace_scale(k, scaling)
        return -math.log(s) - t1 / s

    return max(candidates, key=loglik)


def hypothesis_test(
    series: FormFactorSeries,
    delta_n: int,
    threshold_c: float = 3.0,
    max_window_fraction: float | None = 0.1,
    subspace_scaling: str = "linear",
) -> HypothesisVerdict:
    """Decide whether ``series`` follows the regular or the chaotic mean.

    Each hypothesis passes when its statistic is within ``c / sqrt(delta_n)``
    of 1. Exactly one passing hypothesis gives the decision. When both fail,
    ``t1`` is tested against ``k`` invariant subspaces for the most likely
    ``2 <= k <= sqrt(N)`` (see :func:`estimate_subspaces`); a pass there is a
    chaotic verdict carrying ``k_estimate``. Anything else is inconclusive.

    Raises:
        WindowError: if ``delta_n`` exceeds the series or
            ``max_window_fraction * N``.
    """
    if delta_n < 1 or delta_n > series.n_max:
        raise WindowError(f"delta_n={delta_n} outside 1..{series.n_max}")
    if max_window_fraction is not None and delta_n > max_window_fraction * series.dim:
        raise WindowError(
            f"delta_n={delta_n} too wide for N={series.dim} "
            f"(limit {max_window_fraction:g} N)"
        )
    t0, t1 = t_statistics(series, delta_n)
    tol = threshold_c / math.sqrt(delta_n)
    pass0 = abs(t0 - 1) <= tol
    pass1 = abs(t1 - 1) <= tol

    def verdict(decision, k=None):
        return HypothesisVerdict(t0, t1, delta_n, threshold_c, decision, k)

    if pass0 and not pass1:
        return verdict(Decision.REGULAR)
    if pass1 and not pass0:
        return verdict(Decision.CHAOTIC, 1)
    if not pass0 and not pass1:
        k_max = math.isqrt(series.dim)
        if k_max >= 2:
            k = estimate_subspaces(t1, subspace_scaling, k_max)
            s = _subspace_scale(k, subspace_scaling)
            if k >= 2 and abs(t1 / s - 1) <= tol:
                return verdict(Decision.CHAOTIC, k)
    return verdict(Decision.INCONCLUSIVE)


@dataclass(frozen=True, eq=False)
class WalkPath:
    """Partial sums of unit vectors ``(cos phi_j, sin phi_j)``; ``points[0]`` is the origin."""

    points: np.ndarray

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    @property
    def steps(self) -> int:
        return len(self.points) - 1


def eigenphase_walk(spectrum) -> WalkPath:
    phi = np.sort(_phases(spectrum))
    steps = np.column_stack([np.cos(phi), np.sin(phi)])
    pts = np.vstack([np.zeros((1, 2)), np.cumsum(steps, axis=0)])
    pts.setflags(write=False)
    return WalkPath(pts)
